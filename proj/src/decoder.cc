// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#include "keygr/decoder.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "keygr/error.h"

namespace keygr {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  return 1.0 - sigmoid(-z);
}

void TemperatureSchedule::validate() const {
  if (total < 1) throw UsageError("K must be at least 1");
  if (!(slope > 0.0)) throw UsageError("schedule slope must be positive");
  if (!(midpoint > 0.0 && midpoint < 1.0)) throw UsageError("schedule midpoint must lie in (0, 1)");
  if (!(max_temperature >= 0.0)) throw UsageError("max temperature must be non-negative");
}

namespace {

// sigmoid(z) - 1/2, odd in z. The subtraction is exact for sigmoid >= 1/2.
double centered_sigmoid(double z) {
  const double h = sigmoid(std::abs(z)) - 0.5;
  return z < 0.0 ? -h : h;
}

}  // namespace

// Written over the centered sigmoid so that g(0) = 0, g(K) = T_max and, for
// m = 1/2, g(K/2) = T_max/2 hold exactly in floating point.
double TemperatureSchedule::at(int i) const {
  if (i < 0 || i > total) throw ContractError(fmt::format("temperature index {} outside [0, {}]", i, total));
  const double floor = centered_sigmoid(-slope * midpoint);
  const double ceil = centered_sigmoid(slope * (1.0 - midpoint));
  const double frac = static_cast<double>(i) / static_cast<double>(total);
  return max_temperature * ((centered_sigmoid(slope * (frac - midpoint)) - floor) / (ceil - floor));
}

namespace {

std::size_t argmax_lowest(std::span<const double> logits) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return best;
}

// Index drawn proportionally to `weights` (non-negative, not all zero).
std::size_t draw(std::span<const double> weights, Rng& rng) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double target = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (target < acc) return i;
  }
  return last_positive;
}

using StepFn = std::function<TokenId(const ScorerContext&, int emission)>;

// Shared emission loop of the sampling decoders: decode a path with `step`,
// record it, remove its leaf, repeat.
Retrieval emit_with_removal(const Scorer& scorer, const DecodeQuery& query, TrieSession& session, int k,
                            std::string decoder, std::uint64_t seed, const StepFn& step) {
  if (k < 1) throw UsageError("K must be at least 1");
  Retrieval out{std::move(decoder), seed, {}};
  const ScorerContext base = query.context();
  for (int i = 1; i <= k && !session.empty(); ++i) {
    TokenSeq path;
    for (;;) {
      ScorerContext ctx = base;
      ctx.prefix = path;
      const TokenId tok = step(ctx, i);
      path.push_back(tok);
      if (tok == kEos) break;
    }
    Emission e;
    e.doc_id = session.trie().lookup_doc(path);
    e.logprob = sequence_logprob(scorer, base, path, session.trie());
    e.index = i;
    session.remove_leaf(path);
    e.path = std::move(path);
    out.emissions.push_back(std::move(e));
  }
  return out;
}

}  // namespace

TokenId sample_step(const Scorer& scorer, const ScorerContext& ctx, const TrieSession& session, double t,
                    Rng& rng) {
  const auto candidates = session.valid_next(ctx.prefix);
  if (candidates.size() == 1) return candidates.front();
  const auto logits = scorer.logits(ctx, candidates);
  if (t <= kArgmaxCutoff) return candidates[argmax_lowest(logits)];
  const double max = *std::max_element(logits.begin(), logits.end());
  std::vector<double> weights(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) weights[i] = std::exp((logits[i] - max) / t);
  return candidates[draw(weights, rng)];
}

TokenId nucleus_step(const Scorer& scorer, const ScorerContext& ctx, const TrieSession& session, double top_p,
                     Rng& rng) {
  const auto candidates = session.valid_next(ctx.prefix);
  if (candidates.size() == 1) return candidates.front();
  const auto logits = scorer.logits(ctx, candidates);
  const double max = *std::max_element(logits.begin(), logits.end());
  std::vector<double> probs(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += probs[i] = std::exp(logits[i] - max);
  for (double& p : probs) p /= z;

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  // Candidates are id-sorted, so a stable sort breaks ties toward lower ids.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  std::vector<double> kept;
  double mass = 0.0;
  for (std::size_t idx : order) {
    kept.push_back(probs[idx]);
    mass += probs[idx];
    if (mass >= top_p) break;
  }
  return candidates[order[draw(kept, rng)]];
}

Retrieval reverse_annealing(const Scorer& scorer, const DecodeQuery& query, TrieSession& session,
                            const TemperatureSchedule& schedule, std::uint64_t seed) {
  schedule.validate();
  const std::uint64_t qkey = fnv1a64(query.query_id);
  Rng rng(0);
  int current = 0;
  double temperature = 0.0;
  return emit_with_removal(scorer, query, session, schedule.total, "reverse-annealing", seed,
                           [&](const ScorerContext& ctx, int i) {
                             if (i != current) {
                               current = i;
                               temperature = schedule.at(i);
                               rng = Rng::derive(seed, qkey, static_cast<std::uint64_t>(i));
                             }
                             return sample_step(scorer, ctx, session, temperature, rng);
                           });
}

Retrieval greedy_no_replacement(const Scorer& scorer, const DecodeQuery& query, TrieSession& session, int k) {
  Rng unused(0);
  return emit_with_removal(scorer, query, session, k, "greedy", 0, [&](const ScorerContext& ctx, int) {
    return sample_step(scorer, ctx, session, 0.0, unused);
  });
}

Retrieval nucleus(const Scorer& scorer, const DecodeQuery& query, TrieSession& session, int k, double top_p,
                  std::uint64_t seed) {
  if (!(top_p > 0.0 && top_p <= 1.0)) throw UsageError("top_p must lie in (0, 1]");
  const std::uint64_t qkey = fnv1a64(query.query_id);
  Rng rng(0);
  int current = 0;
  return emit_with_removal(scorer, query, session, k, "nucleus", seed, [&](const ScorerContext& ctx, int i) {
    if (i != current) {
      current = i;
      rng = Rng::derive(seed, qkey, static_cast<std::uint64_t>(i));
    }
    return nucleus_step(scorer, ctx, session, top_p, rng);
  });
}

Retrieval beam(const Scorer& scorer, const DecodeQuery& query, const DocidTrie& trie, int k, int width) {
  if (k < 1) throw UsageError("K must be at least 1");
  if (width < 1) throw UsageError("beam width must be at least 1");
  struct Hyp {
    TokenSeq path;
    DocidTrie::NodeId node;
    double score;
  };
  const auto better = [](const Hyp& a, const Hyp& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.path < b.path;
  };
  const std::size_t beam_size = static_cast<std::size_t>(std::max(width, k));
  const ScorerContext base = query.context();

  std::vector<Hyp> active;
  if (trie.leaf_count() > 0) active.push_back({{}, DocidTrie::kRoot, 0.0});
  std::vector<Hyp> finished;
  std::vector<TokenId> candidates;
  while (!active.empty()) {
    std::vector<Hyp> expansions;
    for (const auto& h : active) {
      candidates.clear();
      for (const auto& e : trie.children(h.node)) candidates.push_back(e.token);
      ScorerContext ctx = base;
      ctx.prefix = h.path;
      const auto lp = log_softmax(scorer.logits(ctx, candidates));
      const auto kids = trie.children(h.node);
      for (std::size_t c = 0; c < kids.size(); ++c) {
        Hyp next{h.path, kids[c].node, h.score + lp[c]};
        next.path.push_back(kids[c].token);
        expansions.push_back(std::move(next));
      }
    }
    std::sort(expansions.begin(), expansions.end(), better);
    if (expansions.size() > beam_size) expansions.resize(beam_size);
    active.clear();
    for (auto& h : expansions) {
      if (h.path.back() == kEos) {
        finished.push_back(std::move(h));
      } else {
        active.push_back(std::move(h));
      }
    }
  }
  std::sort(finished.begin(), finished.end(), better);
  if (finished.size() > static_cast<std::size_t>(k)) finished.resize(static_cast<std::size_t>(k));

  Retrieval out{"beam", 0, {}};
  for (std::size_t i = 0; i < finished.size(); ++i) {
    Emission e;
    e.doc_id = trie.lookup_doc(finished[i].path);
    e.logprob = finished[i].score;
    e.index = static_cast<int>(i + 1);
    e.path = std::move(finished[i].path);
    out.emissions.push_back(std::move(e));
  }
  return out;
}

Strategy parse_strategy(std::string_view name) {
  if (name == "reverse-annealing") return Strategy::kReverseAnnealing;
  if (name == "greedy") return Strategy::kGreedy;
  if (name == "nucleus") return Strategy::kNucleus;
  if (name == "beam") return Strategy::kBeam;
  throw UsageError(fmt::format("unknown decoding strategy \"{}\"", name));
}

std::string_view strategy_name(Strategy strategy) {
  switch (strategy) {
    case Strategy::kReverseAnnealing: return "reverse-annealing";
    case Strategy::kGreedy: return "greedy";
    case Strategy::kNucleus: return "nucleus";
    case Strategy::kBeam: return "beam";
  }
  return "?";
}

void DecoderConfig::validate() const {
  if (k < 1) throw UsageError("K must be at least 1");
  if (strategy == Strategy::kReverseAnnealing) schedule().validate();
  if (strategy == Strategy::kNucleus && !(top_p > 0.0 && top_p <= 1.0)) throw UsageError("top_p must lie in (0, 1]");
  if (strategy == Strategy::kBeam && width < 1) throw UsageError("beam width must be at least 1");
}

std::string DecoderConfig::label() const {
  switch (strategy) {
    case Strategy::kReverseAnnealing:
      return fmt::format("reverse-annealing(k={:g},m={:g},tmax={:g})", slope, midpoint, max_temperature);
    case Strategy::kGreedy: return "greedy";
    case Strategy::kNucleus: return fmt::format("nucleus(p={:g})", top_p);
    case Strategy::kBeam: return fmt::format("beam(width={})", width);
  }
  return "?";
}

Retrieval decode(const DecoderConfig& config, const Scorer& scorer, const DocidTrie& trie,
                 const DecodeQuery& query) {
  config.validate();
  if (config.strategy == Strategy::kBeam) return beam(scorer, query, trie, config.k, config.width);
  TrieSession session(trie);
  switch (config.strategy) {
    case Strategy::kReverseAnnealing:
      return reverse_annealing(scorer, query, session, config.schedule(), config.seed);
    case Strategy::kGreedy: return greedy_no_replacement(scorer, query, session, config.k);
    case Strategy::kNucleus: return nucleus(scorer, query, session, config.k, config.top_p, config.seed);
    case Strategy::kBeam: break;
  }
  throw ContractError("unreachable decoding strategy");
}

std::vector<RunEntry> to_run_entries(const std::string& query_id, const Retrieval& retrieval, int k,
                                     const std::string& tag) {
  std::vector<RunEntry> out;
  for (const auto& e : retrieval.emissions) {
    out.push_back({query_id, e.doc_id, e.index, static_cast<double>(k - e.index), tag});
  }
  return out;
}

}  // namespace keygr
