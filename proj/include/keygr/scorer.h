// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "keygr/trie.h"
#include "keygr/vocab.h"

namespace keygr {

/// What a scorer conditions on. Views only; the caller owns the storage.
struct ScorerContext {
  std::string_view query_id;
  /// Instruction content tokens (stopwords already removed).
  std::span<const TokenId> instr;
  std::span<const TokenId> query;
  /// Docid tokens decoded so far; never contains <eos>.
  std::span<const TokenId> prefix;
};

/// Conditional next-token logit source over the docid vocabulary.
class Scorer {
 public:
  virtual ~Scorer() = default;
  /// One finite logit per candidate, in candidate order.
  virtual std::vector<double> logits(const ScorerContext& ctx, std::span<const TokenId> candidates) const = 0;
};

/// Zero logits everywhere.
class UniformScorer final : public Scorer {
 public:
  std::vector<double> logits(const ScorerContext&, std::span<const TokenId> candidates) const override {
    return std::vector<double>(candidates.size(), 0.0);
  }
};

/// Docid token transition counts, including <bos> -> first and last -> <eos>.
class BigramCounts {
 public:
  /// Adds one pass over a docid path (without <eos>).
  void add_sequence(std::span<const TokenId> docid);
  void add(TokenId prev, TokenId next, std::uint64_t count = 1);

  std::uint64_t count(TokenId prev, TokenId next) const;
  std::uint64_t total(TokenId prev) const;
  /// Sorted by (prev, next).
  std::map<std::pair<TokenId, TokenId>, std::uint64_t> entries() const;
  bool operator==(const BigramCounts& other) const = default;

 private:
  static std::uint64_t key(TokenId prev, TokenId next) {
    return (static_cast<std::uint64_t>(prev) << 32) | next;
  }
  std::unordered_map<std::uint64_t, std::uint64_t> pairs_;
  std::unordered_map<TokenId, std::uint64_t> totals_;
};

/// Add-alpha smoothed bigram docid LM plus an additive query/instruction
/// overlap bonus:
///   logit(v) = ln((c(prev,v) + alpha) / (c(prev) + alpha * support))
///              + beta * [v in query or instruction]
/// with prev = <bos> for an empty prefix. `support` is the size of the docid
/// vocabulary including <eos>.
class LexicalScorer final : public Scorer {
 public:
  LexicalScorer(std::shared_ptr<const BigramCounts> counts, std::size_t support, double alpha, double beta);

  std::vector<double> logits(const ScorerContext& ctx, std::span<const TokenId> candidates) const override;
  double probability(TokenId prev, TokenId next) const;

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  std::size_t support() const { return support_; }
  const BigramCounts& counts() const { return *counts_; }

  /// JSONL: a header row {"alpha","beta","support"} then {"prev","next","count"} rows.
  std::string serialize(const Vocabulary& vocab) const;
  static LexicalScorer parse(std::string_view jsonl, const Vocabulary& vocab);

 private:
  std::shared_ptr<const BigramCounts> counts_;
  std::size_t support_;
  double alpha_;
  double beta_;
};

/// Test double: logits looked up by (query_id, prefix). Rows are JSONL
/// {"query_id", "prefix": "t1 t2", "logits": {"token": value}}. Contexts
/// without a row are uniform; tokens missing from a row score 0.
class TableScorer final : public Scorer {
 public:
  static TableScorer parse(std::string_view jsonl, const Vocabulary& vocab);
  static TableScorer load(const std::filesystem::path& path, const Vocabulary& vocab);

  std::vector<double> logits(const ScorerContext& ctx, std::span<const TokenId> candidates) const override;
  std::size_t row_count() const { return rows_.size(); }

 private:
  std::map<std::pair<std::string, TokenSeq>, std::map<TokenId, double>> rows_;
};

/// Log-softmax, max-subtracted.
std::vector<double> log_softmax(std::span<const double> logits);

/// Sum over steps of the log-softmax of logits restricted to the trie's
/// continuations, at temperature 1. `path` may include the final <eos>;
/// the <eos> step is always scored. ctx.prefix is ignored.
double sequence_logprob(const Scorer& scorer, const ScorerContext& ctx, std::span<const TokenId> path,
                        const DocidTrie& trie);

/// Distinct docid tokens in the trie plus one for <eos>.
std::size_t smoothing_support(const DocidTrie& trie);

/// An encoded (pseudo-query, docid) pair. `docid` excludes <eos>.
struct TrainingPair {
  TokenSeq instr;
  TokenSeq query;
  TokenSeq docid;
};

/// -(1/N) sum over pairs of sequence_logprob.
double mean_cross_entropy(const Scorer& scorer, std::span<const TrainingPair> pairs, const DocidTrie& trie);

struct GridPoint {
  double alpha = 0.0;
  double beta = 0.0;
  double cross_entropy = 0.0;
};

struct FitResult {
  LexicalScorer scorer;
  double cross_entropy = 0.0;
  /// Set when no held-out pairs were supplied and training CE was used.
  bool used_training_ce = false;
  std::vector<GridPoint> grid;
};

inline const std::vector<double> kDefaultAlphaGrid = {0.01, 0.1, 1.0};
inline const std::vector<double> kDefaultBetaGrid = {0.0, 0.5, 1.0, 2.0, 4.0};

/// Counts bigrams over every training docid (once per pair), then picks the
/// (alpha, beta) grid point with the lowest mean held-out cross-entropy,
/// preferring smaller alpha, then smaller beta, on ties.
FitResult fit_lexical_scorer(std::span<const TrainingPair> train, std::span<const TrainingPair> heldout,
                             std::vector<double> alpha_grid, std::vector<double> beta_grid,
                             const DocidTrie& trie);

/// Instruction tokens that earn the overlap bonus: known, non-stopword tokens.
TokenSeq encode_instruction(std::string_view text, const Vocabulary& vocab, const Stoplist& stoplist);

}  // namespace keygr
