// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#include "keygr/scorer.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "keygr/corpus.h"
#include "keygr/docid.h"
#include "keygr/error.h"

namespace keygr {

using json = nlohmann::json;

namespace {

bool contains(std::span<const TokenId> seq, TokenId t) {
  return std::find(seq.begin(), seq.end(), t) != seq.end();
}

TokenId lookup_token(const Vocabulary& vocab, const std::string& token, std::size_t lineno) {
  if (!vocab.contains(token)) {
    throw IntegrityError(fmt::format("line {}: token \"{}\" is not in the vocabulary", lineno, token));
  }
  return vocab.id(token);
}

}  // namespace

void BigramCounts::add_sequence(std::span<const TokenId> docid) {
  TokenId prev = kBos;
  for (TokenId t : docid) {
    add(prev, t);
    prev = t;
  }
  add(prev, kEos);
}

void BigramCounts::add(TokenId prev, TokenId next, std::uint64_t count) {
  pairs_[key(prev, next)] += count;
  totals_[prev] += count;
}

std::uint64_t BigramCounts::count(TokenId prev, TokenId next) const {
  auto it = pairs_.find(key(prev, next));
  return it == pairs_.end() ? 0 : it->second;
}

std::uint64_t BigramCounts::total(TokenId prev) const {
  auto it = totals_.find(prev);
  return it == totals_.end() ? 0 : it->second;
}

std::map<std::pair<TokenId, TokenId>, std::uint64_t> BigramCounts::entries() const {
  std::map<std::pair<TokenId, TokenId>, std::uint64_t> out;
  for (const auto& [k, v] : pairs_) {
    out.emplace(std::make_pair(static_cast<TokenId>(k >> 32), static_cast<TokenId>(k & 0xffffffffu)), v);
  }
  return out;
}

LexicalScorer::LexicalScorer(std::shared_ptr<const BigramCounts> counts, std::size_t support, double alpha,
                             double beta)
    : counts_(std::move(counts)), support_(support), alpha_(alpha), beta_(beta) {
  if (!counts_) counts_ = std::make_shared<const BigramCounts>();
  if (!(alpha_ > 0.0)) throw UsageError("smoothing alpha must be positive");
  if (!(beta_ >= 0.0)) throw UsageError("overlap bonus beta must be non-negative");
  if (support_ == 0) throw UsageError("smoothing support must be positive");
}

double LexicalScorer::probability(TokenId prev, TokenId next) const {
  const double num = static_cast<double>(counts_->count(prev, next)) + alpha_;
  const double den = static_cast<double>(counts_->total(prev)) + alpha_ * static_cast<double>(support_);
  return num / den;
}

std::vector<double> LexicalScorer::logits(const ScorerContext& ctx, std::span<const TokenId> candidates) const {
  const TokenId prev = ctx.prefix.empty() ? kBos : ctx.prefix.back();
  std::vector<double> out;
  out.reserve(candidates.size());
  for (TokenId v : candidates) {
    double l = std::log(probability(prev, v));
    if (beta_ > 0.0 && (contains(ctx.query, v) || contains(ctx.instr, v))) l += beta_;
    out.push_back(l);
  }
  return out;
}

std::string LexicalScorer::serialize(const Vocabulary& vocab) const {
  std::string out = json{{"alpha", alpha_}, {"beta", beta_}, {"support", support_}}.dump();
  out += '\n';
  for (const auto& [edge, count] : counts_->entries()) {
    out += json{{"prev", vocab.token(edge.first)}, {"next", vocab.token(edge.second)}, {"count", count}}.dump();
    out += '\n';
  }
  return out;
}

LexicalScorer LexicalScorer::parse(std::string_view jsonl, const Vocabulary& vocab) {
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t lineno = 0;
  auto counts = std::make_shared<BigramCounts>();
  double alpha = 0.0, beta = 0.0;
  std::size_t support = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    try {
      auto obj = json::parse(line);
      if (!header) {
        alpha = obj.at("alpha").get<double>();
        beta = obj.at("beta").get<double>();
        support = obj.at("support").get<std::size_t>();
        header = true;
        continue;
      }
      counts->add(lookup_token(vocab, obj.at("prev").get<std::string>(), lineno),
                  lookup_token(vocab, obj.at("next").get<std::string>(), lineno),
                  obj.at("count").get<std::uint64_t>());
    } catch (const json::exception& e) {
      throw ParseError("scorer", lineno, e.what());
    }
  }
  if (!header) throw ParseError("scorer", lineno, "missing header row");
  return LexicalScorer(std::move(counts), support, alpha, beta);
}

TableScorer TableScorer::parse(std::string_view jsonl, const Vocabulary& vocab) {
  TableScorer table;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    std::string query_id;
    std::string prefix;
    json logits;
    try {
      auto obj = json::parse(line);
      query_id = obj.at("query_id").get<std::string>();
      prefix = obj.value("prefix", "");
      logits = obj.at("logits");
      if (!logits.is_object()) throw ParseError("table scorer", lineno, "logits must be an object");
    } catch (const json::exception& e) {
      throw ParseError("table scorer", lineno, e.what());
    }
    TokenSeq key;
    for (const auto& t : tokenize(prefix)) key.push_back(lookup_token(vocab, t, lineno));
    std::map<TokenId, double> row;
    for (const auto& [tok, value] : logits.items()) {
      if (!value.is_number()) throw ParseError("table scorer", lineno, "logit values must be numbers");
      row[lookup_token(vocab, tok, lineno)] = value.get<double>();
    }
    if (!table.rows_.emplace(std::make_pair(query_id, std::move(key)), std::move(row)).second) {
      throw IntegrityError(fmt::format("table scorer line {}: duplicate (query_id, prefix)", lineno));
    }
  }
  return table;
}

TableScorer TableScorer::load(const std::filesystem::path& path, const Vocabulary& vocab) {
  return parse(read_file(path), vocab);
}

std::vector<double> TableScorer::logits(const ScorerContext& ctx, std::span<const TokenId> candidates) const {
  std::vector<double> out(candidates.size(), 0.0);
  auto it = rows_.find(std::make_pair(std::string(ctx.query_id), TokenSeq(ctx.prefix.begin(), ctx.prefix.end())));
  if (it == rows_.end()) return out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (auto v = it->second.find(candidates[i]); v != it->second.end()) out[i] = v->second;
  }
  return out;
}

std::vector<double> log_softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  if (out.empty()) return out;
  const double max = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (double l : out) sum += std::exp(l - max);
  const double log_z = max + std::log(sum);
  for (double& l : out) l -= log_z;
  return out;
}

double sequence_logprob(const Scorer& scorer, const ScorerContext& ctx, std::span<const TokenId> path,
                        const DocidTrie& trie) {
  std::span<const TokenId> body = path;
  if (!body.empty() && body.back() == kEos) body = body.first(body.size() - 1);
  if (!trie.walk(body) || !trie.child(*trie.walk(body), kEos)) {
    throw ContractError("sequence_logprob: path is not a docid leaf");
  }
  double total = 0.0;
  DocidTrie::NodeId at = DocidTrie::kRoot;
  std::vector<TokenId> candidates;
  for (std::size_t step = 0; step <= body.size(); ++step) {
    const TokenId chosen = step < body.size() ? body[step] : kEos;
    candidates.clear();
    std::size_t chosen_pos = 0;
    for (const auto& e : trie.children(at)) {
      if (e.token == chosen) chosen_pos = candidates.size();
      candidates.push_back(e.token);
    }
    ScorerContext step_ctx = ctx;
    step_ctx.prefix = body.first(step);
    const auto lp = log_softmax(scorer.logits(step_ctx, candidates));
    total += lp[chosen_pos];
    at = *trie.child(at, chosen);
  }
  return total;
}

std::size_t smoothing_support(const DocidTrie& trie) {
  std::set<TokenId> tokens;
  for (DocidTrie::NodeId n = 0; n < trie.node_count(); ++n) {
    for (const auto& e : trie.children(n)) {
      if (e.token != kEos) tokens.insert(e.token);
    }
  }
  return tokens.size() + 1;
}

double mean_cross_entropy(const Scorer& scorer, std::span<const TrainingPair> pairs, const DocidTrie& trie) {
  if (pairs.empty()) throw ContractError("cross-entropy over zero pairs");
  double sum = 0.0;
  for (const auto& p : pairs) {
    ScorerContext ctx{"", p.instr, p.query, {}};
    sum -= sequence_logprob(scorer, ctx, p.docid, trie);
  }
  return sum / static_cast<double>(pairs.size());
}

FitResult fit_lexical_scorer(std::span<const TrainingPair> train, std::span<const TrainingPair> heldout,
                             std::vector<double> alpha_grid, std::vector<double> beta_grid,
                             const DocidTrie& trie) {
  if (train.empty()) throw ContractError("fit needs at least one training pair");
  if (alpha_grid.empty() || beta_grid.empty()) throw UsageError("empty hyperparameter grid");
  std::sort(alpha_grid.begin(), alpha_grid.end());
  std::sort(beta_grid.begin(), beta_grid.end());

  auto counts = std::make_shared<BigramCounts>();
  for (const auto& p : train) counts->add_sequence(p.docid);
  std::shared_ptr<const BigramCounts> shared = counts;
  const std::size_t support = smoothing_support(trie);

  const bool use_train = heldout.empty();
  const auto eval_set = use_train ? train : heldout;

  std::vector<GridPoint> grid;
  std::size_t best = 0;
  for (double alpha : alpha_grid) {
    for (double beta : beta_grid) {
      LexicalScorer candidate(shared, support, alpha, beta);
      grid.push_back({alpha, beta, mean_cross_entropy(candidate, eval_set, trie)});
      if (grid.back().cross_entropy < grid[best].cross_entropy) best = grid.size() - 1;
    }
  }
  return FitResult{LexicalScorer(shared, support, grid[best].alpha, grid[best].beta), grid[best].cross_entropy,
                   use_train, std::move(grid)};
}

TokenSeq encode_instruction(std::string_view text, const Vocabulary& vocab, const Stoplist& stoplist) {
  TokenSeq out;
  for (const auto& t : tokenize(text)) {
    if (stoplist.contains(t)) continue;
    const TokenId id = vocab.id(t);
    if (id != kUnk) out.push_back(id);
  }
  return out;
}

}  // namespace keygr
