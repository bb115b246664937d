// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#include "keygr/corpus.h"

#include <gtest/gtest.h>

#include "keygr/error.h"
#include "keygr/rng.h"
#include "support/fixtures.h"

namespace keygr {
namespace {

using testing::TempDir;

TEST(LoadCorpus, KeepsFileOrder) {
  TempDir dir;
  const auto c = load_corpus(dir.write("c.jsonl", "{\"doc_id\":\"a\",\"text\":\"x\"}\n{\"doc_id\":\"b\",\"text\":\"y\"}\n"));
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].doc_id, "a");
  EXPECT_EQ(c[1].doc_id, "b");
  EXPECT_EQ(c[1].text, "y");
  EXPECT_EQ(c.index_of("b"), 1u);
  EXPECT_FALSE(c.index_of("zz").has_value());
}

TEST(LoadCorpus, EmptyFileIsEmptyCorpus) {
  TempDir dir;
  EXPECT_TRUE(load_corpus(dir.write("c.jsonl", "")).empty());
}

TEST(LoadCorpus, DuplicateIdNamesTheId) {
  TempDir dir;
  const auto p = dir.write("c.jsonl", "{\"doc_id\":\"a\",\"text\":\"x\"}\n{\"doc_id\":\"a\",\"text\":\"y\"}\n");
  try {
    load_corpus(p);
    FAIL() << "expected IntegrityError";
  } catch (const IntegrityError& e) {
    EXPECT_NE(std::string(e.what()).find("\"a\""), std::string::npos) << e.what();
  }
}

TEST(LoadCorpus, RejectsBlankTextAndBadJson) {
  TempDir dir;
  EXPECT_THROW(load_corpus(dir.write("a.jsonl", "{\"doc_id\":\"a\",\"text\":\"  \"}\n")), IntegrityError);
  try {
    load_corpus(dir.write("b.jsonl", "{\"doc_id\":\"a\",\"text\":\"x\"}\n{oops\n"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(load_corpus(dir.write("c.jsonl", "{\"text\":\"x\"}\n")), ParseError);
}

TEST(LoadCorpus, KeepsMetadata) {
  TempDir dir;
  const auto c =
      load_corpus(dir.write("c.jsonl", "{\"doc_id\":\"a\",\"text\":\"x\",\"metadata\":{\"lang\":\"en\"}}\n"));
  EXPECT_EQ(c[0].metadata.at("lang"), "en");
}

TEST(LoadCorpus, PreservesOrderForRandomFiles) {
  TempDir dir;
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = rng.below(30);
    std::vector<std::string> ids;
    std::string text;
    for (std::size_t i = 0; i < n; ++i) {
      ids.push_back("id" + std::to_string(rng.next() % 100000) + "_" + std::to_string(i));
      text += "{\"doc_id\":\"" + ids.back() + "\",\"text\":\"w" + std::to_string(i) + "\"}\n";
      if (rng.below(4) == 0) text += "\n";
    }
    const auto c = load_corpus(dir.write("r.jsonl", text));
    ASSERT_EQ(c.size(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(c[i].doc_id, ids[i]);
  }
}

TEST(LoadQrels, SingleAndGraded) {
  TempDir dir;
  const auto one = load_qrels(dir.write("q1", "q1 0 d1 1\n"));
  ASSERT_EQ(one.entries().size(), 1u);
  EXPECT_EQ(one.entries()[0].query_id, "q1");
  EXPECT_EQ(one.entries()[0].doc_id, "d1");
  EXPECT_EQ(one.entries()[0].relevance, 1);

  const auto graded = load_qrels(dir.write("q2", "q1 0 d1 2\nq1 0 d2 0\n"));
  ASSERT_EQ(graded.entries().size(), 2u);
  EXPECT_EQ(graded.judgments("q1")->at("d1"), 2);
  EXPECT_EQ(graded.judgments("q1")->at("d2"), 0);
  EXPECT_EQ(graded.judgments("q9"), nullptr);
}

TEST(LoadQrels, NonIntegerRelevanceIsLineOneParseError) {
  TempDir dir;
  try {
    load_qrels(dir.write("q", "q1 0 d1 x\n"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  EXPECT_THROW(load_qrels(dir.write("q3", "q1 0 d1\n")), ParseError);
}

TEST(WriteRun, TwoRowsBestFirst) {
  TempDir dir;
  const auto p = dir / "run";
  write_run({{"q1", "d1", 1, 3.0, "t"}, {"q1", "d2", 2, 2.5, "t"}}, p);
  EXPECT_EQ(read_file(p), "q1 Q0 d1 1 3.000000 t\nq1 Q0 d2 2 2.500000 t\n");
}

TEST(WriteRun, EmptyListEmptyFile) {
  TempDir dir;
  write_run({}, dir / "run");
  EXPECT_EQ(read_file(dir / "run"), "");
}

TEST(WriteRun, RejectsTiedScores) {
  TempDir dir;
  EXPECT_THROW(write_run({{"q1", "d1", 1, 1.0, "t"}, {"q1", "d2", 2, 1.0, "t"}}, dir / "run"), IntegrityError);
  // Distinct doubles that print identically are ties too.
  EXPECT_THROW(write_run({{"q1", "d1", 1, 1.0000001, "t"}, {"q1", "d2", 2, 1.0, "t"}}, dir / "run"),
               IntegrityError);
  EXPECT_THROW(validate_run({{"q1", "d1", 1, 2.0, "t"}, {"q1", "d2", 3, 1.0, "t"}}), IntegrityError);
}

TEST(WriteRun, RoundTripsRandomRuns) {
  TempDir dir;
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<RunEntry> run;
    const std::size_t queries = 1 + rng.below(4);
    for (std::size_t q = 0; q < queries; ++q) {
      const std::size_t rows = rng.below(8);
      double score = 100.0 * rng.uniform();
      for (std::size_t r = 0; r < rows; ++r) {
        const double rounded = std::round(score * 1e6) / 1e6;
        run.push_back({"q" + std::to_string(q), "d" + std::to_string(rng.below(1000)), static_cast<int>(r + 1), rounded,
                       "tag"});
        score -= 0.001 + rng.uniform();
      }
    }
    write_run(run, dir / "run");
    const auto back = load_run(dir / "run");
    ASSERT_EQ(back.size(), run.size());
    for (std::size_t i = 0; i < run.size(); ++i) {
      EXPECT_EQ(back[i].query_id, run[i].query_id);
      EXPECT_EQ(back[i].doc_id, run[i].doc_id);
      EXPECT_EQ(back[i].rank, run[i].rank);
      EXPECT_NEAR(back[i].score, run[i].score, 5e-7);
    }
    EXPECT_EQ(format_run(back), read_file(dir / "run"));
  }
}

TEST(ToRankedLists, GroupsByFirstAppearanceAndSortsByRank) {
  const auto lists = to_ranked_lists({{"b", "x", 2, 1, "t"}, {"a", "y", 1, 5, "t"}, {"b", "z", 1, 2, "t"}});
  ASSERT_EQ(lists.size(), 2u);
  EXPECT_EQ(lists[0].query_id, "b");
  EXPECT_EQ(lists[0].doc_ids, (std::vector<std::string>{"z", "x"}));
  EXPECT_EQ(lists[1].doc_ids, (std::vector<std::string>{"y"}));
}

}  // namespace
}  // namespace keygr
