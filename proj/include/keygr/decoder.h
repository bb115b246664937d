// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "keygr/corpus.h"
#include "keygr/rng.h"
#include "keygr/scorer.h"
#include "keygr/trie.h"

namespace keygr {

/// Temperatures at or below this decode by argmax (ties to the lowest id).
inline constexpr double kArgmaxCutoff = 1e-6;

/// Numerically symmetric logistic: sigmoid(-z) == 1 - sigmoid(z) exactly.
double sigmoid(double z);

/// Normalized sigmoid temperature ramp over K emissions:
///   g(i) = T_max * (s(k(i/K - m)) - s(-km)) / (s(k(1-m)) - s(-km))
/// so g(0) = 0, g(K) = T_max, and g is non-decreasing in between.
struct TemperatureSchedule {
  int total = 100;
  double slope = 10.0;
  double midpoint = 0.5;
  double max_temperature = 1.0;

  /// Throws UsageError for K < 1, slope <= 0, midpoint outside (0,1), T_max < 0.
  void validate() const;
  /// i in [0, K]; throws ContractError otherwise.
  double at(int i) const;
};

/// One decoded docid.
struct Emission {
  std::string doc_id;
  /// Docid tokens followed by <eos>.
  TokenSeq path;
  /// Temperature-1 log-probability under the full trie.
  double logprob = 0.0;
  /// 1-based position in the output list.
  int index = 0;
};

struct Retrieval {
  std::string decoder;
  std::uint64_t seed = 0;
  std::vector<Emission> emissions;
};

/// Encoded query side of a decoding request.
struct DecodeQuery {
  std::string query_id;
  TokenSeq instr;
  TokenSeq query;

  ScorerContext context() const { return ScorerContext{query_id, instr, query, {}}; }
};

/// Draws the next token for ctx.prefix from softmax(logits / t) restricted to
/// the session's live continuations. t <= kArgmaxCutoff takes the argmax.
TokenId sample_step(const Scorer& scorer, const ScorerContext& ctx, const TrieSession& session, double t,
                    Rng& rng);

/// Temperature-1 draw from the smallest descending-probability set of live
/// continuations whose mass reaches top_p.
TokenId nucleus_step(const Scorer& scorer, const ScorerContext& ctx, const TrieSession& session, double top_p,
                     Rng& rng);

/// Emits up to schedule.total docids. The i-th docid is decoded token by
/// token at temperature schedule.at(i); its leaf is then removed from the
/// session. Emission i draws from Rng::derive(seed, fnv1a64(query_id), i).
Retrieval reverse_annealing(const Scorer& scorer, const DecodeQuery& query, TrieSession& session,
                            const TemperatureSchedule& schedule, std::uint64_t seed);

/// K argmax paths with leaf removal between them.
Retrieval greedy_no_replacement(const Scorer& scorer, const DecodeQuery& query, TrieSession& session, int k);

/// K nucleus-sampled paths with leaf removal between them.
Retrieval nucleus(const Scorer& scorer, const DecodeQuery& query, TrieSession& session, int k, double top_p,
                  std::uint64_t seed);

/// Constrained beam search over the trie, scored by summed masked
/// log-softmax (no length normalization). The beam keeps max(width, k)
/// hypotheses so that min(k, leaves) docids always complete. Results are
/// ordered by score, ties by token-id path.
Retrieval beam(const Scorer& scorer, const DecodeQuery& query, const DocidTrie& trie, int k, int width);

enum class Strategy { kReverseAnnealing, kGreedy, kNucleus, kBeam };

Strategy parse_strategy(std::string_view name);
std::string_view strategy_name(Strategy strategy);

struct DecoderConfig {
  Strategy strategy = Strategy::kReverseAnnealing;
  int k = 100;
  double slope = 10.0;
  double midpoint = 0.5;
  double max_temperature = 1.0;
  double top_p = 0.9;
  int width = 10;
  std::uint64_t seed = 0;

  void validate() const;
  TemperatureSchedule schedule() const { return {k, slope, midpoint, max_temperature}; }
  /// Strategy name plus its parameters, e.g. "nucleus(p=0.9)".
  std::string label() const;
};

/// Runs one strategy on a fresh session of `trie`.
Retrieval decode(const DecoderConfig& config, const Scorer& scorer, const DocidTrie& trie,
                 const DecodeQuery& query);

/// TREC rows for one retrieval. Rank follows emission order and the score is
/// k - index, which is strictly decreasing whatever the logprobs do.
std::vector<RunEntry> to_run_entries(const std::string& query_id, const Retrieval& retrieval, int k,
                                     const std::string& tag);

}  // namespace keygr
