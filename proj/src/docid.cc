// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#include "keygr/docid.h"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "keygr/error.h"
#include "keygr/vocab.h"

namespace keygr {

namespace detail {
extern const char* const kBuiltinStopwords;
}

using json = nlohmann::json;

namespace {

bool is_article(std::string_view t) { return t == "a" || t == "an" || t == "the"; }

std::string join(const std::vector<std::string>& terms) { return fmt::format("{}", fmt::join(terms, " ")); }

}  // namespace

const Stoplist& Stoplist::builtin() {
  static const Stoplist list = parse(detail::kBuiltinStopwords);
  return list;
}

Stoplist Stoplist::parse(std::string_view text) {
  std::set<std::string> words;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    for (auto& t : tokenize(line)) words.insert(std::move(t));
  }
  return Stoplist(std::move(words));
}

Stoplist Stoplist::load(const std::filesystem::path& path) { return parse(read_file(path)); }

bool is_valid_docid_term(std::string_view term) {
  if (term.empty() || is_article(term)) return false;
  const auto alnum = [](char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); };
  if (!alnum(term.front())) return false;
  return std::all_of(term.begin() + 1, term.end(), [&](char c) {
    return alnum(c) || c == '.' || c == '#' || c == '-';
  });
}

KeywordExtractor::KeywordExtractor(const Corpus& corpus, const Stoplist& stoplist)
    : stoplist_(stoplist), n_docs_(corpus.size()) {
  for (const auto& doc : corpus.docs()) {
    auto toks = tokenize(doc.text);
    std::sort(toks.begin(), toks.end());
    toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
    for (auto& t : toks) ++df_[t];
  }
}

double KeywordExtractor::idf(const std::string& term) const {
  if (n_docs_ <= 1) return 1.0;
  auto it = df_.find(term);
  const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
  return std::log((static_cast<double>(n_docs_) + 1.0) / (df + 1.0)) + 1.0;
}

bool KeywordExtractor::is_candidate(const std::string& token) const {
  return is_valid_docid_term(token) && !stoplist_.contains(token);
}

std::vector<ScoredTerm> KeywordExtractor::rank_terms(const Document& doc) const {
  std::vector<ScoredTerm> terms;
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::size_t> tf;
  const auto toks = tokenize(doc.text);
  for (std::size_t pos = 0; pos < toks.size(); ++pos) {
    if (!is_candidate(toks[pos])) continue;
    auto [it, inserted] = slot.emplace(toks[pos], terms.size());
    if (inserted) {
      terms.push_back({toks[pos], 0.0, pos});
      tf.push_back(0);
    }
    ++tf[it->second];
  }
  for (std::size_t i = 0; i < terms.size(); ++i) {
    terms[i].score = static_cast<double>(tf[i]) * idf(terms[i].term);
  }
  std::stable_sort(terms.begin(), terms.end(), [](const ScoredTerm& a, const ScoredTerm& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.first_position < b.first_position;
  });
  return terms;
}

Docid generate_docid(const Document& doc, std::size_t max_len, const KeywordExtractor& extractor) {
  if (max_len == 0) throw UsageError("docid length must be at least 1");
  auto ranked = extractor.rank_terms(doc);
  if (ranked.empty()) {
    throw DegenerateDocumentError(fmt::format("document \"{}\" has no candidate docid terms", doc.doc_id));
  }
  Docid id{doc.doc_id, {}};
  const std::size_t n = std::min(max_len, ranked.size());
  for (std::size_t i = 0; i < n; ++i) id.terms.push_back(ranked[i].term);
  return id;
}

DocidSource extractive_docid_source(const KeywordExtractor& extractor, std::size_t max_len) {
  return [&extractor, max_len](const Document& doc) {
    DocidProposal p;
    p.terms = generate_docid(doc, max_len, extractor).terms;
    auto ranked = extractor.rank_terms(doc);
    for (std::size_t i = p.terms.size(); i < ranked.size(); ++i) p.spare_terms.push_back(ranked[i].term);
    return p;
  };
}

ExternalDocids load_external_docids(const std::filesystem::path& path, const Corpus& corpus,
                                    std::size_t max_len) {
  ExternalDocids out;
  const std::string source = path.string();
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(source, lineno, e.what());
    }
    if (!obj.is_object() || !obj.contains("doc_id") || !obj["doc_id"].is_string() ||
        !obj.contains("docid") || !obj["docid"].is_string()) {
      throw ParseError(source, lineno, "expected {\"doc_id\": string, \"docid\": string}");
    }
    Docid id{obj["doc_id"].get<std::string>(), tokenize(obj["docid"].get<std::string>())};
    if (!corpus.index_of(id.doc_id)) {
      throw IntegrityError(fmt::format("{}:{}: unknown doc_id \"{}\"", source, lineno, id.doc_id));
    }
    if (id.terms.empty()) throw IntegrityError(fmt::format("{}:{}: empty docid", source, lineno));
    for (const auto& t : id.terms) {
      if (!is_valid_docid_term(t)) {
        throw IntegrityError(fmt::format("{}:{}: invalid docid term \"{}\"", source, lineno, t));
      }
    }
    if (id.terms.size() > max_len) {
      id.terms.resize(max_len);
      ++out.truncated;
    }
    if (out.by_doc.count(id.doc_id)) {
      throw IntegrityError(fmt::format("{}:{}: duplicate doc_id \"{}\"", source, lineno, id.doc_id));
    }
    out.by_doc.emplace(id.doc_id, std::move(id));
  }
  std::vector<std::string> missing;
  for (const auto& d : corpus.docs()) {
    if (!out.by_doc.count(d.doc_id)) missing.push_back(d.doc_id);
  }
  if (!missing.empty()) {
    throw IntegrityError(fmt::format("{}: no docid for documents: {}", source, fmt::join(missing, ", ")));
  }
  return out;
}

DocidSource external_docid_source(const ExternalDocids& docids) {
  return [&docids](const Document& doc) {
    auto it = docids.by_doc.find(doc.doc_id);
    if (it == docids.by_doc.end()) {
      throw IntegrityError(fmt::format("no external docid for \"{}\"", doc.doc_id));
    }
    return DocidProposal{it->second.terms, {}};
  };
}

DedupPolicy parse_dedup_policy(std::string_view name) {
  if (name == "error") return DedupPolicy::kError;
  if (name == "suffix-term") return DedupPolicy::kSuffixTerm;
  if (name == "suffix-ordinal") return DedupPolicy::kSuffixOrdinal;
  throw UsageError(fmt::format("unknown dedup policy \"{}\"", name));
}

std::string_view dedup_policy_name(DedupPolicy policy) {
  switch (policy) {
    case DedupPolicy::kError: return "error";
    case DedupPolicy::kSuffixTerm: return "suffix-term";
    case DedupPolicy::kSuffixOrdinal: return "suffix-ordinal";
  }
  return "?";
}

DocidAssignment::DocidAssignment(std::vector<AssignedDocid> entries, double conflict_rate_before_dedup)
    : entries_(std::move(entries)), conflict_rate_(conflict_rate_before_dedup) {
  if (!(conflict_rate_ >= 0.0 && conflict_rate_ <= 1.0)) {
    throw IntegrityError("conflict rate outside [0, 1]");
  }
  std::set<std::vector<std::string>> seqs;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.terms.empty()) throw IntegrityError(fmt::format("empty docid for \"{}\"", e.doc_id));
    if (!index_.emplace(e.doc_id, i).second) {
      throw IntegrityError(fmt::format("doc_id \"{}\" assigned twice", e.doc_id));
    }
    if (!seqs.insert(e.terms).second) {
      throw IntegrityError(fmt::format("docid \"{}\" is not unique", join(e.terms)));
    }
  }
}

const AssignedDocid* DocidAssignment::find(const std::string& doc_id) const {
  auto it = index_.find(doc_id);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

std::string DocidAssignment::serialize() const {
  std::string out;
  for (const auto& e : entries_) {
    json row = {{"doc_id", e.doc_id}, {"docid", join(e.terms)}, {"deduped", e.deduped}};
    out += row.dump();
    out += '\n';
  }
  return out;
}

DocidAssignment DocidAssignment::parse(std::string_view jsonl, double conflict_rate_before_dedup) {
  std::vector<AssignedDocid> entries;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    try {
      auto obj = json::parse(line);
      entries.push_back({obj.at("doc_id").get<std::string>(),
                         tokenize(obj.at("docid").get<std::string>()),
                         obj.value("deduped", false)});
    } catch (const json::exception& e) {
      throw ParseError("docids", lineno, e.what());
    }
  }
  return DocidAssignment(std::move(entries), conflict_rate_before_dedup);
}

double raw_conflict_rate(const std::vector<std::vector<std::string>>& sequences) {
  if (sequences.empty()) return 0.0;
  std::map<std::vector<std::string>, std::size_t> counts;
  for (const auto& s : sequences) ++counts[s];
  std::size_t conflicting = 0;
  for (const auto& s : sequences) {
    if (counts[s] > 1) ++conflicting;
  }
  return static_cast<double>(conflicting) / static_cast<double>(sequences.size());
}

DocidAssignment assign_docids(const Corpus& corpus, const DocidSource& source, DedupPolicy policy) {
  std::vector<DocidProposal> proposals;
  proposals.reserve(corpus.size());
  for (const auto& doc : corpus.docs()) proposals.push_back(source(doc));

  std::vector<std::vector<std::string>> raw;
  raw.reserve(proposals.size());
  for (const auto& p : proposals) raw.push_back(p.terms);
  const double rate = raw_conflict_rate(raw);

  if (policy == DedupPolicy::kError && rate > 0.0) {
    std::map<std::vector<std::string>, std::vector<std::string>> groups;
    for (std::size_t i = 0; i < raw.size(); ++i) groups[raw[i]].push_back(corpus[i].doc_id);
    std::vector<std::string> described;
    for (const auto& [terms, ids] : groups) {
      if (ids.size() > 1) described.push_back(fmt::format("[{}] <- {{{}}}", join(terms), fmt::join(ids, ", ")));
    }
    throw ConflictError(fmt::format("docid conflicts: {}", fmt::join(described, "; ")));
  }

  // Every raw sequence is reserved up front so a suffixed docid never lands
  // on another document's original docid.
  std::set<std::vector<std::string>> taken(raw.begin(), raw.end());
  std::set<std::vector<std::string>> claimed;
  std::map<std::vector<std::string>, int> next_ordinal;
  std::vector<AssignedDocid> entries;
  entries.reserve(raw.size());

  for (std::size_t i = 0; i < raw.size(); ++i) {
    AssignedDocid e{corpus[i].doc_id, raw[i], false};
    if (claimed.insert(raw[i]).second) {
      entries.push_back(std::move(e));
      continue;
    }
    bool placed = false;
    if (policy == DedupPolicy::kSuffixTerm) {
      for (const auto& spare : proposals[i].spare_terms) {
        if (std::find(raw[i].begin(), raw[i].end(), spare) != raw[i].end()) continue;
        auto candidate = raw[i];
        candidate.push_back(spare);
        if (taken.insert(candidate).second) {
          e.terms = std::move(candidate);
          placed = true;
          break;
        }
      }
    }
    if (!placed) {
      int& k = next_ordinal.try_emplace(raw[i], 2).first->second;
      for (;; ++k) {
        auto candidate = raw[i];
        candidate.push_back(std::to_string(k));
        if (taken.insert(candidate).second) {
          e.terms = std::move(candidate);
          ++k;
          break;
        }
      }
    }
    e.deduped = true;
    claimed.insert(e.terms);
    entries.push_back(std::move(e));
  }
  return DocidAssignment(std::move(entries), rate);
}

}  // namespace keygr
