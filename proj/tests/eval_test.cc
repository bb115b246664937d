// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#include "keygr/eval.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "keygr/rng.h"
#include "support/fixtures.h"
#include "support/metric_oracle.h"

namespace keygr {
namespace {

using Lists = std::vector<RankedList>;

TEST(AccAt1, Examples) {
  const Qrels qrels({{"q1", "d1", 1}, {"q2", "d2", 1}});
  EXPECT_EQ(acc_at_1({{"q1", {"d1"}}, {"q2", {"d2", "d1"}}}, qrels).mean, 1.0);
  EXPECT_EQ(acc_at_1({{"q1", {"d1"}}, {"q2", {"d1", "d2"}}}, qrels).mean, 0.5);
  const auto skipped = acc_at_1({{"q1", {"d1"}}, {"q9", {"d1"}}}, qrels);
  EXPECT_EQ(skipped.mean, 1.0);
  EXPECT_EQ(skipped.evaluated, 1u);
  EXPECT_EQ(skipped.skipped, 1u);
}

TEST(NdcgAt10, Examples) {
  const Qrels qrels({{"q", "d1", 1}});
  EXPECT_EQ(ndcg_at_10({{"q", {"d1", "x"}}}, qrels).mean, 1.0);
  EXPECT_NEAR(ndcg_at_10({{"q", {"x", "d1"}}}, qrels).mean, 0.6309, 1e-4);
  EXPECT_DOUBLE_EQ(ndcg_at_10({{"q", {"x", "d1"}}}, qrels).mean, 1.0 / std::log2(3.0));
}

TEST(NdcgAt10, GradedFixture) {
  const Qrels qrels({{"q", "a", 3}, {"q", "b", 2}});
  const double dcg = 7.0 / std::log2(2.0) + 3.0 / std::log2(4.0);
  const double idcg = 7.0 / std::log2(2.0) + 3.0 / std::log2(3.0);
  EXPECT_NEAR(ndcg_at_10({{"q", {"a", "x", "b"}}}, qrels).mean, dcg / idcg, 1e-12);
  EXPECT_NEAR(dcg / idcg, 0.955831, 1e-6);
}

TEST(NdcgAt10, QueriesWithoutPositivesAreSkipped) {
  const Qrels qrels({{"q", "a", 0}, {"r", "a", 1}});
  const auto v = ndcg_at_10({{"q", {"a"}}, {"r", {"a"}}}, qrels);
  EXPECT_EQ(v.evaluated, 1u);
  EXPECT_EQ(v.skipped, 1u);
}

TEST(RecallAt100, Examples) {
  const Qrels qrels({{"q", "a", 1}, {"q", "b", 1}, {"q", "c", 1}, {"q", "d", 1}});
  EXPECT_EQ(recall_at_100({{"q", {"a", "b", "c", "d"}}}, qrels).mean, 1.0);
  EXPECT_EQ(recall_at_100({{"q", {"x", "b"}}}, qrels).mean, 0.25);
  std::vector<std::string> all{"x", "y", "d", "c", "b", "a"};
  EXPECT_EQ(recall_at_100({{"q", all}}, qrels).mean, 1.0);
}

TEST(Metrics, MatchBruteForceOnRandomFixtures) {
  Rng rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    Lists run;
    std::vector<QrelsEntry> entries;
    testing::random_metric_fixture(rng, run, entries);
    const Qrels qrels(entries);
    const testing::MetricOracle o = testing::brute_force_metrics(run, entries);
    const auto acc = acc_at_1(run, qrels);
    const auto ndcg = ndcg_at_10(run, qrels);
    const auto recall = recall_at_100(run, qrels);
    EXPECT_NEAR(acc.mean, o.acc, 1e-9);
    EXPECT_NEAR(ndcg.mean, o.ndcg, 1e-9);
    EXPECT_NEAR(recall.mean, o.recall, 1e-9);
    EXPECT_EQ(acc.evaluated, static_cast<std::size_t>(o.n_acc));
    EXPECT_EQ(ndcg.evaluated, static_cast<std::size_t>(o.n_pos));
    for (const auto* m : {&acc, &ndcg, &recall}) {
      EXPECT_GE(m->mean, 0.0);
      EXPECT_LE(m->mean, 1.0);
    }
  }
}

TEST(Metrics, IdealOrderingScoresOne) {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    Lists run;
    std::vector<QrelsEntry> entries;
    testing::random_metric_fixture(rng, run, entries);
    const Qrels qrels(entries);
    Lists ideal;
    for (const auto& list : run) {
      const auto* j = qrels.judgments(list.query_id);
      if (j == nullptr) continue;
      std::vector<std::pair<int, std::string>> ranked;
      for (const auto& [doc, rel] : *j) ranked.emplace_back(-rel, doc);
      std::sort(ranked.begin(), ranked.end());
      RankedList l{list.query_id, {}};
      for (const auto& [neg, doc] : ranked) l.doc_ids.push_back(doc);
      ideal.push_back(l);
    }
    for (const auto& [qid, v] : ndcg_at_10(ideal, qrels).per_query) EXPECT_NEAR(v, 1.0, 1e-12) << qid;
  }
}

TEST(Metrics, ShufflingBelowCutoffChangesNothing) {
  Rng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    Lists run;
    std::vector<QrelsEntry> entries;
    testing::random_metric_fixture(rng, run, entries);
    const Qrels qrels(entries);
    Lists shuffled = run;
    for (auto& l : shuffled) {
      for (std::size_t i = l.doc_ids.size(); i > 11; --i) std::swap(l.doc_ids[i - 1], l.doc_ids[10 + rng.below(i - 10)]);
    }
    EXPECT_EQ(ndcg_at_10(run, qrels).mean, ndcg_at_10(shuffled, qrels).mean);
    EXPECT_EQ(acc_at_1(run, qrels).mean, acc_at_1(shuffled, qrels).mean);
  }
}

TEST(MetricReport, JsonlHasAggregateRow) {
  const Qrels qrels({{"q1", "d1", 1}});
  const auto report = evaluate({{"q1", {"d1"}}, {"q2", {"d1"}}}, qrels);
  const auto text = report.to_jsonl();
  EXPECT_NE(text.find("\"query_id\":\"all\""), std::string::npos) << text;
  EXPECT_EQ(report.query_count, 2u);
  EXPECT_EQ(report.acc_at_1.skipped, 1u);
}

TEST(CompareDecoders, IdenticalConfigsGiveIdenticalRows) {
  Rng rng(1);
  const auto t = DocidTrie::from_paths(testing::random_docids(rng, 20, 5, 3));
  const testing::HashScorer scorer(4);
  std::vector<DecodeQuery> queries;
  std::vector<QrelsEntry> qrels;
  for (int i = 0; i < 5; ++i) {
    queries.push_back({"q" + std::to_string(i), {}, {}});
    qrels.push_back({"q" + std::to_string(i), "doc" + std::to_string(i), 1});
  }
  DecoderConfig ra;
  ra.k = 10;
  DecoderConfig greedy = ra;
  greedy.strategy = Strategy::kGreedy;
  const auto cmp = compare_decoders(scorer, t, queries, Qrels(qrels), {ra, ra, greedy}, 2);
  ASSERT_EQ(cmp.rows.size(), 3u);
  EXPECT_EQ(cmp.rows[0].report.to_jsonl(), cmp.rows[1].report.to_jsonl());
  EXPECT_NE(cmp.rows[0].config.label(), cmp.rows[2].config.label());
  EXPECT_NE(cmp.to_table().find("greedy"), std::string::npos);
}

TEST(DecodeAll, ThreadCountDoesNotChangeOutput) {
  Rng rng(3);
  const auto t = DocidTrie::from_paths(testing::random_docids(rng, 40, 6, 4));
  const testing::HashScorer scorer(8);
  std::vector<DecodeQuery> queries;
  for (int i = 0; i < 12; ++i) queries.push_back({"q" + std::to_string(i), {}, {}});
  DecoderConfig cfg;
  cfg.k = 15;
  const auto one = decode_all(cfg, scorer, t, queries, 1);
  const auto four = decode_all(cfg, scorer, t, queries, 4);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    ASSERT_EQ(one[i].emissions.size(), four[i].emissions.size());
    for (std::size_t j = 0; j < one[i].emissions.size(); ++j) EXPECT_EQ(one[i].emissions[j].path, four[i].emissions[j].path);
  }
}

}  // namespace
}  // namespace keygr
