// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "keygr/corpus.h"
#include "keygr/decoder.h"
#include "keygr/docid.h"

namespace keygr {

/// One metric over a run. Queries outside the metric's domain are skipped
/// and counted, never scored as zero.
struct MetricValue {
  double mean = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  std::vector<std::pair<std::string, double>> per_query;
};

/// Relevance >= 1 at rank 1. Queries absent from the qrels are skipped.
MetricValue acc_at_1(const std::vector<RankedList>& run, const Qrels& qrels);
/// Gain 2^rel - 1, discount log2(rank + 1), ideal ordering from the qrels.
/// Queries without a positive judgment are skipped.
MetricValue ndcg_at(const std::vector<RankedList>& run, const Qrels& qrels, std::size_t cutoff);
/// |relevant in top cutoff| / |relevant|. Queries without a positive judgment are skipped.
MetricValue recall_at(const std::vector<RankedList>& run, const Qrels& qrels, std::size_t cutoff);

inline MetricValue ndcg_at_10(const std::vector<RankedList>& run, const Qrels& qrels) {
  return ndcg_at(run, qrels, 10);
}
inline MetricValue recall_at_100(const std::vector<RankedList>& run, const Qrels& qrels) {
  return recall_at(run, qrels, 100);
}

struct QueryMetrics {
  std::string query_id;
  std::optional<double> acc_at_1;
  std::optional<double> ndcg_at_10;
  std::optional<double> recall_at_100;
};

struct MetricReport {
  std::vector<QueryMetrics> per_query;
  MetricValue acc_at_1;
  MetricValue ndcg_at_10;
  MetricValue recall_at_100;
  std::size_t query_count = 0;

  /// Per-query rows then one aggregate row with query_id "all".
  std::string to_jsonl() const;
};

MetricReport evaluate(const std::vector<RankedList>& run, const Qrels& qrels);

/// Pre-deduplication docid conflict rate of an assignment.
inline double conflict_rate(const DocidAssignment& assignment) { return assignment.conflict_rate_before_dedup(); }

/// Decodes every query with `config`, spreading queries over `threads`
/// workers. Output order matches `queries`.
std::vector<Retrieval> decode_all(const DecoderConfig& config, const Scorer& scorer, const DocidTrie& trie,
                                  const std::vector<DecodeQuery>& queries, int threads = 1);

/// Ranked doc ids of decoded retrievals.
std::vector<RankedList> ranked_lists(const std::vector<DecodeQuery>& queries,
                                     const std::vector<Retrieval>& retrievals);

struct ComparisonRow {
  DecoderConfig config;
  MetricReport report;
};

struct Comparison {
  std::vector<ComparisonRow> rows;

  std::string to_jsonl() const;
  /// Fixed-width text table, one line per decoder.
  std::string to_table() const;
};

/// Runs each decoder configuration over the same index and queries.
Comparison compare_decoders(const Scorer& scorer, const DocidTrie& trie, const std::vector<DecodeQuery>& queries,
                            const Qrels& qrels, const std::vector<DecoderConfig>& configs, int threads = 1);

}  // namespace keygr
