// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#include "keygr/querygen.h"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "keygr/error.h"
#include "keygr/rng.h"
#include "keygr/vocab.h"

namespace keygr {

using json = nlohmann::json;

namespace {

constexpr std::size_t kKeywordPool = 10;
constexpr std::size_t kClaimTokens = 24;

constexpr std::array<std::string_view, 4> kStyleMarkers = {"code", "error", "table", "conversation"};

std::string question_text(std::size_t which, const std::string& top, const std::string& second) {
  switch (which) {
    case 0: return fmt::format("what is {} in {}", top, second);
    case 1: return fmt::format("how is {} used in {}", top, second);
    case 2: return fmt::format("what does {} mean for {}", top, second);
    default: return fmt::format("which {} involves {}", second, top);
  }
}

std::vector<std::string> split_sentences(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    cur.push_back(c);
    const bool terminal = c == '.' || c == '!' || c == '?';
    const bool at_break = i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]));
    if (c == '\n' || (terminal && at_break)) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string claim_text(const Document& doc, const std::vector<ScoredTerm>& ranked) {
  std::unordered_map<std::string, double> weight;
  for (const auto& t : ranked) weight.emplace(t.term, t.score);
  std::vector<std::string> best;
  double best_mass = -1.0;
  for (const auto& sentence : split_sentences(doc.text)) {
    auto toks = tokenize(sentence);
    if (toks.empty()) continue;
    double mass = 0.0;
    for (const auto& t : toks) {
      if (auto it = weight.find(t); it != weight.end()) mass += it->second;
    }
    if (mass > best_mass) {
      best_mass = mass;
      best = std::move(toks);
    }
  }
  if (best.size() > kClaimTokens) best.resize(kClaimTokens);
  return fmt::format("{}", fmt::join(best, " "));
}

}  // namespace

std::size_t QueryBatch::query_count() const {
  std::size_t n = 0;
  for (const auto& d : docs) n += d.queries.size();
  return n;
}

std::string_view query_style_name(QueryStyle style) {
  switch (style) {
    case QueryStyle::kKeyword: return "keyword";
    case QueryStyle::kQuestion: return "question";
    case QueryStyle::kClaim: return "claim";
  }
  return "?";
}

QueryStyle parse_query_style(std::string_view name) {
  if (name == "keyword") return QueryStyle::kKeyword;
  if (name == "question") return QueryStyle::kQuestion;
  if (name == "claim") return QueryStyle::kClaim;
  throw UsageError(fmt::format("unknown query style \"{}\"", name));
}

bool has_style_marker(const TaskInstruction& instr) {
  for (const auto& tok : tokenize(instr.text)) {
    if (std::find(kStyleMarkers.begin(), kStyleMarkers.end(), tok) != kStyleMarkers.end()) return true;
  }
  return false;
}

StyleMix style_mix(const TaskInstruction& instr) {
  if (has_style_marker(instr)) return StyleMix{0.8, 0.12, 0.08};
  return StyleMix{};
}

std::vector<PseudoQuery> generate_queries(const Document& doc, const TaskInstruction& instr, int per_doc,
                                          std::uint64_t seed, const KeywordExtractor& extractor) {
  if (per_doc < 1) throw UsageError("queries per document must be at least 1");
  const auto ranked = extractor.rank_terms(doc);
  if (ranked.empty()) {
    throw DegenerateDocumentError(fmt::format("document \"{}\" has no content tokens", doc.doc_id));
  }
  const StyleMix mix = style_mix(instr);
  const std::size_t pool = std::min(kKeywordPool, ranked.size());
  const std::uint64_t doc_key = fnv1a64(doc.doc_id);

  std::vector<PseudoQuery> out;
  out.reserve(static_cast<std::size_t>(per_doc));
  for (int j = 0; j < per_doc; ++j) {
    Rng rng = Rng::derive(seed, doc_key, static_cast<std::uint64_t>(j));
    PseudoQuery q{doc.doc_id, instr.instr_id, "", std::nullopt, j};
    const double u = rng.uniform();
    if (u < mix.keyword) {
      q.style = QueryStyle::kKeyword;
      const std::size_t want = std::min<std::size_t>(2 + rng.below(4), pool);
      std::vector<std::size_t> idx(pool);
      std::iota(idx.begin(), idx.end(), 0);
      std::vector<std::string> terms;
      for (std::size_t k = 0; k < want; ++k) {
        const std::size_t pick = k + rng.below(pool - k);
        std::swap(idx[k], idx[pick]);
        terms.push_back(ranked[idx[k]].term);
      }
      q.text = fmt::format("{}", fmt::join(terms, " "));
    } else if (u < mix.keyword + mix.question) {
      q.style = QueryStyle::kQuestion;
      const std::string& top = ranked[0].term;
      const std::string& second = ranked.size() > 1 ? ranked[1].term : ranked[0].term;
      q.text = question_text(rng.below(4), top, second);
    } else {
      q.style = QueryStyle::kClaim;
      q.text = claim_text(doc, ranked);
    }
    out.push_back(std::move(q));
  }
  return out;
}

QueryBatch generate_batch(const Corpus& corpus, const TaskInstruction& instr, int per_doc,
                          std::uint64_t seed, const KeywordExtractor& extractor) {
  QueryBatch batch;
  batch.per_doc = per_doc;
  for (const auto& doc : corpus.docs()) {
    batch.docs.push_back({doc.doc_id, generate_queries(doc, instr, per_doc, seed, extractor)});
  }
  return batch;
}

QueryBatch load_external_queries(const std::filesystem::path& path, const Corpus& corpus, int per_doc) {
  if (per_doc < 1) throw UsageError("queries per document must be at least 1");
  const std::string source = path.string();
  std::map<std::string, std::map<int, PseudoQuery>> by_doc;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    PseudoQuery q;
    try {
      auto obj = json::parse(line);
      q.doc_id = obj.at("doc_id").get<std::string>();
      q.instr_id = obj.at("instr_id").get<std::string>();
      q.text = obj.at("text").get<std::string>();
      q.seed_index = obj.at("j").get<int>();
      if (obj.contains("style")) q.style = parse_query_style(obj["style"].get<std::string>());
    } catch (const json::exception& e) {
      throw ParseError(source, lineno, e.what());
    }
    if (!corpus.index_of(q.doc_id)) {
      throw IntegrityError(fmt::format("{}:{}: unknown doc_id \"{}\"", source, lineno, q.doc_id));
    }
    if (tokenize(q.text).empty()) throw IntegrityError(fmt::format("{}:{}: empty query text", source, lineno));
    if (q.seed_index < 0 || q.seed_index >= per_doc) {
      throw IntegrityError(fmt::format("{}:{}: j={} outside [0, {})", source, lineno, q.seed_index, per_doc));
    }
    const int j = q.seed_index;
    if (!by_doc[q.doc_id].emplace(j, std::move(q)).second) {
      throw IntegrityError(fmt::format("{}:{}: duplicate query j={}", source, lineno, j));
    }
  }
  QueryBatch batch;
  batch.per_doc = per_doc;
  std::vector<std::string> short_docs;
  for (const auto& doc : corpus.docs()) {
    auto it = by_doc.find(doc.doc_id);
    const std::size_t have = it == by_doc.end() ? 0 : it->second.size();
    if (have != static_cast<std::size_t>(per_doc)) {
      short_docs.push_back(fmt::format("{} ({}/{})", doc.doc_id, have, per_doc));
      continue;
    }
    DocQueries dq{doc.doc_id, {}};
    for (auto& [j, q] : it->second) dq.queries.push_back(std::move(q));
    batch.docs.push_back(std::move(dq));
  }
  if (!short_docs.empty()) {
    throw IntegrityError(fmt::format("{}: wrong query count for: {}", source, fmt::join(short_docs, ", ")));
  }
  return batch;
}

std::string serialize_batch(const QueryBatch& batch) {
  std::string out;
  for (const auto& d : batch.docs) {
    for (const auto& q : d.queries) {
      json row = {{"doc_id", q.doc_id}, {"instr_id", q.instr_id}, {"text", q.text}, {"j", q.seed_index}};
      if (q.style) row["style"] = std::string(query_style_name(*q.style));
      out += row.dump();
      out += '\n';
    }
  }
  return out;
}

double avg_query_length(const QueryBatch& batch) {
  std::size_t tokens = 0, count = 0;
  for (const auto& d : batch.docs) {
    for (const auto& q : d.queries) {
      tokens += tokenize(q.text).size();
      ++count;
    }
  }
  if (count == 0) throw ContractError("average query length of an empty batch");
  return static_cast<double>(tokens) / static_cast<double>(count);
}

}  // namespace keygr
