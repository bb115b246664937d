// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#include "keygr/corpus.h"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "keygr/error.h"

namespace keygr {

using json = nlohmann::json;

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string field;
  while (in >> field) out.push_back(field);
  return out;
}

bool parse_int(const std::string& s, int* out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_double(const std::string& s, double* out) {
  try {
    std::size_t pos = 0;
    *out = std::stod(s, &pos);
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    fn(lineno, line);
  }
}

std::string require_string(const json& obj, const char* key, const std::string& source,
                           std::size_t lineno) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ParseError(source, lineno, fmt::format("missing string field \"{}\"", key));
  }
  return it->get<std::string>();
}

}  // namespace

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
  out << contents;
  if (!out) throw IoError(fmt::format("write failed for {}", path.string()));
}

Corpus::Corpus(std::vector<Document> docs) : docs_(std::move(docs)) {
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    const auto& d = docs_[i];
    if (d.doc_id.empty()) throw IntegrityError(fmt::format("document {} has an empty doc_id", i));
    if (is_blank(d.text)) throw IntegrityError(fmt::format("document \"{}\" has blank text", d.doc_id));
    if (!index_.emplace(d.doc_id, i).second) {
      throw IntegrityError(fmt::format("duplicate doc_id \"{}\"", d.doc_id));
    }
  }
}

std::optional<std::size_t> Corpus::index_of(const std::string& doc_id) const {
  auto it = index_.find(doc_id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::vector<Document> docs;
  std::set<std::string> seen;
  const std::string source = path.string();
  for_each_line(path, [&](std::size_t lineno, const std::string& line) {
    if (is_blank(line)) return;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(source, lineno, e.what());
    }
    if (!obj.is_object()) throw ParseError(source, lineno, "expected a JSON object");
    Document doc;
    doc.doc_id = require_string(obj, "doc_id", source, lineno);
    doc.text = require_string(obj, "text", source, lineno);
    if (auto it = obj.find("metadata"); it != obj.end() && !it->is_null()) {
      if (!it->is_object()) throw ParseError(source, lineno, "metadata must be an object");
      for (const auto& [k, v] : it->items()) {
        if (!v.is_string()) throw ParseError(source, lineno, "metadata values must be strings");
        doc.metadata[k] = v.get<std::string>();
      }
    }
    if (!seen.insert(doc.doc_id).second) {
      throw IntegrityError(fmt::format("{}:{}: duplicate doc_id \"{}\"", source, lineno, doc.doc_id));
    }
    docs.push_back(std::move(doc));
  });
  return Corpus(std::move(docs));
}

std::vector<TaskInstruction> load_instructions(const std::filesystem::path& path) {
  std::vector<TaskInstruction> out;
  std::set<std::string> seen;
  const std::string source = path.string();
  for_each_line(path, [&](std::size_t lineno, const std::string& line) {
    if (is_blank(line)) return;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(source, lineno, e.what());
    }
    TaskInstruction instr{require_string(obj, "instr_id", source, lineno),
                          require_string(obj, "text", source, lineno)};
    if (is_blank(instr.text)) throw ParseError(source, lineno, "instruction text is empty");
    if (!seen.insert(instr.instr_id).second) {
      throw IntegrityError(fmt::format("{}:{}: duplicate instr_id \"{}\"", source, lineno, instr.instr_id));
    }
    out.push_back(std::move(instr));
  });
  return out;
}

Qrels::Qrels(std::vector<QrelsEntry> entries) : entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (e.relevance < 0) {
      throw IntegrityError(fmt::format("negative relevance for ({}, {})", e.query_id, e.doc_id));
    }
    if (!by_query_[e.query_id].emplace(e.doc_id, e.relevance).second) {
      throw IntegrityError(fmt::format("duplicate judgment ({}, {})", e.query_id, e.doc_id));
    }
  }
}

const std::map<std::string, int>* Qrels::judgments(const std::string& query_id) const {
  auto it = by_query_.find(query_id);
  return it == by_query_.end() ? nullptr : &it->second;
}

Qrels load_qrels(const std::filesystem::path& path) {
  std::vector<QrelsEntry> entries;
  std::set<std::pair<std::string, std::string>> seen;
  const std::string source = path.string();
  for_each_line(path, [&](std::size_t lineno, const std::string& line) {
    auto fields = split_ws(line);
    if (fields.empty()) return;
    if (fields.size() != 4) throw ParseError(source, lineno, "expected `query_id 0 doc_id relevance`");
    QrelsEntry e{fields[0], fields[2], 0};
    if (!parse_int(fields[3], &e.relevance)) {
      throw ParseError(source, lineno, fmt::format("non-integer relevance \"{}\"", fields[3]));
    }
    if (e.relevance < 0) throw ParseError(source, lineno, "negative relevance");
    if (!seen.emplace(e.query_id, e.doc_id).second) {
      throw IntegrityError(
          fmt::format("{}:{}: duplicate judgment ({}, {})", source, lineno, e.query_id, e.doc_id));
    }
    entries.push_back(std::move(e));
  });
  return Qrels(std::move(entries));
}

void validate_run(const std::vector<RunEntry>& entries) {
  std::map<std::string, std::vector<const RunEntry*>> groups;
  for (const auto& e : entries) groups[e.query_id].push_back(&e);
  for (auto& [qid, list] : groups) {
    std::sort(list.begin(), list.end(),
              [](const RunEntry* a, const RunEntry* b) { return a->rank < b->rank; });
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i]->rank != static_cast<int>(i + 1)) {
        throw IntegrityError(fmt::format("query {}: ranks are not 1..{} without gaps", qid, list.size()));
      }
      if (i > 0) {
        const double prev = list[i - 1]->score;
        const double cur = list[i]->score;
        // Compare the serialized values too, so a written run always reloads as valid.
        if (!(cur < prev) || fmt::format("{:.6f}", cur) == fmt::format("{:.6f}", prev)) {
          throw IntegrityError(fmt::format(
              "query {}: score at rank {} is not strictly below rank {}", qid, i + 1, i));
        }
      }
    }
  }
}

std::string format_run(const std::vector<RunEntry>& entries) {
  validate_run(entries);
  std::unordered_map<std::string, std::size_t> order;
  for (const auto& e : entries) order.emplace(e.query_id, order.size());
  std::vector<const RunEntry*> rows;
  rows.reserve(entries.size());
  for (const auto& e : entries) rows.push_back(&e);
  std::stable_sort(rows.begin(), rows.end(), [&](const RunEntry* a, const RunEntry* b) {
    const auto qa = order.at(a->query_id), qb = order.at(b->query_id);
    return qa != qb ? qa < qb : a->rank < b->rank;
  });
  std::string out;
  for (const auto* e : rows) {
    out += fmt::format("{} Q0 {} {} {:.6f} {}\n", e->query_id, e->doc_id, e->rank, e->score, e->tag);
  }
  return out;
}

void write_run(const std::vector<RunEntry>& entries, const std::filesystem::path& path) {
  write_file(path, format_run(entries));
}

std::vector<RunEntry> load_run(const std::filesystem::path& path) {
  std::vector<RunEntry> out;
  const std::string source = path.string();
  for_each_line(path, [&](std::size_t lineno, const std::string& line) {
    auto f = split_ws(line);
    if (f.empty()) return;
    if (f.size() != 6) throw ParseError(source, lineno, "expected `query_id Q0 doc_id rank score tag`");
    RunEntry e;
    e.query_id = f[0];
    e.doc_id = f[2];
    if (!parse_int(f[3], &e.rank) || e.rank < 1) throw ParseError(source, lineno, "bad rank");
    if (!parse_double(f[4], &e.score)) throw ParseError(source, lineno, "bad score");
    e.tag = f[5];
    out.push_back(std::move(e));
  });
  validate_run(out);
  return out;
}

std::vector<RankedList> to_ranked_lists(const std::vector<RunEntry>& entries) {
  std::vector<RankedList> lists;
  std::unordered_map<std::string, std::size_t> pos;
  std::vector<std::vector<std::pair<int, std::string>>> ranked;
  for (const auto& e : entries) {
    auto [it, inserted] = pos.emplace(e.query_id, lists.size());
    if (inserted) {
      lists.push_back({e.query_id, {}});
      ranked.emplace_back();
    }
    ranked[it->second].emplace_back(e.rank, e.doc_id);
  }
  for (std::size_t i = 0; i < lists.size(); ++i) {
    std::stable_sort(ranked[i].begin(), ranked[i].end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [rank, doc] : ranked[i]) lists[i].doc_ids.push_back(std::move(doc));
  }
  return lists;
}

}  // namespace keygr
