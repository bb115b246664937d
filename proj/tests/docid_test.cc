// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#include "keygr/docid.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "keygr/error.h"
#include "keygr/rng.h"
#include "keygr/vocab.h"
#include "support/fixtures.h"
#include "support/synthetic.h"

namespace keygr {
namespace {

using Terms = std::vector<std::string>;
using testing::TempDir;

Corpus corpus_of(const std::vector<std::string>& texts) {
  std::vector<Document> docs;
  for (std::size_t i = 0; i < texts.size(); ++i) docs.push_back({"d" + std::to_string(i + 1), texts[i], {}});
  return Corpus(std::move(docs));
}

// Single-document oracle: with uniform IDF the ranking is tf descending, ties
// by first occurrence, over tokens outside the stoplist.
Terms tf_oracle(const std::string& text, const Stoplist& stop, std::size_t max_len) {
  std::vector<std::string> order;
  std::map<std::string, int> tf;
  for (const auto& t : tokenize(text)) {
    if (stop.contains(t) || t == "a" || t == "an" || t == "the") continue;
    if (tf[t]++ == 0) order.push_back(t);
  }
  std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) { return tf[a] > tf[b]; });
  if (order.size() > max_len) order.resize(max_len);
  return order;
}

TEST(GenerateDocid, SingleDocumentTfOrder) {
  const std::string text = "the cat sat on the mat, the cat purred";
  const auto corpus = corpus_of({text});
  const KeywordExtractor ex(corpus, Stoplist::builtin());
  const auto docid = generate_docid(corpus[0], 8, ex);
  EXPECT_EQ(docid.terms, tf_oracle(text, Stoplist::builtin(), 8));
  EXPECT_EQ(docid.terms, (Terms{"cat", "sat", "mat", "purred"}));
}

TEST(GenerateDocid, AllStopwordsIsDegenerate) {
  const auto corpus = corpus_of({"a a a"});
  const KeywordExtractor ex(corpus, Stoplist(std::set<std::string>{"a"}));
  EXPECT_THROW(generate_docid(corpus[0], 8, ex), DegenerateDocumentError);
}

TEST(GenerateDocid, IdfPrefersRareTerms) {
  const auto corpus = corpus_of({"apple apple banana", "apple cherry", "apple durian"});
  const KeywordExtractor ex(corpus, Stoplist::builtin());
  // idf(apple) = ln(4/4)+1 = 1 so tf*idf = 2; idf(banana) = ln(4/2)+1 > 1.69.
  EXPECT_DOUBLE_EQ(ex.idf("apple"), 1.0);
  EXPECT_DOUBLE_EQ(ex.idf("banana"), std::log(2.0) + 1.0);
  EXPECT_EQ(generate_docid(corpus[0], 8, ex).terms, (Terms{"apple", "banana"}));
  EXPECT_EQ(generate_docid(corpus[0], 1, ex).terms, (Terms{"apple"}));
}

TEST(GenerateDocid, LengthAndArticleBoundOnRandomDocs) {
  Rng rng(21);
  const char* words[] = {"the", "a", "an", "is", "of", "river", "stone", "quick", "pd3.1", "c++", "x-ray", "on"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> texts;
    for (std::size_t d = 0, n = 1 + rng.below(5); d < n; ++d) {
      std::string t = "river";
      for (std::size_t i = 0, m = rng.below(30); i < m; ++i) t += std::string(" ") + words[rng.below(std::size(words))];
      texts.push_back(t);
    }
    const auto corpus = corpus_of(texts);
    const KeywordExtractor ex(corpus, Stoplist::builtin());
    const std::size_t L = 1 + rng.below(8);
    for (const auto& doc : corpus.docs()) {
      const auto a = generate_docid(doc, L, ex);
      EXPECT_EQ(a.terms, generate_docid(doc, L, ex).terms);
      EXPECT_LE(a.terms.size(), L);
      for (const auto& t : a.terms) {
        EXPECT_NE(t, "a");
        EXPECT_NE(t, "an");
        EXPECT_NE(t, "the");
        EXPECT_TRUE(is_valid_docid_term(t)) << t;
      }
    }
  }
}

TEST(Stoplist, ParseSkipsCommentsAndBlankLines) {
  const auto s = Stoplist::parse("# header\nfoo\n\n  Bar \n  # indented comment\n");
  EXPECT_EQ(s.size(), 2u);
  EXPECT_TRUE(s.contains("foo"));
  EXPECT_TRUE(s.contains("bar"));
  EXPECT_TRUE(Stoplist::builtin().contains("the"));
  EXPECT_TRUE(Stoplist::builtin().contains("is"));
}

DocidSource fixed_source(std::map<std::string, DocidProposal> table) {
  return [table = std::move(table)](const Document& d) { return table.at(d.doc_id); };
}

TEST(AssignDocids, ConflictRateAndOrdinalSuffix) {
  const auto corpus = corpus_of({"one", "two", "three"});
  const auto source = fixed_source({{"d1", {{"x", "y"}, {}}}, {"d2", {{"x", "y"}, {}}}, {"d3", {{"w"}, {}}}});
  const auto a = assign_docids(corpus, source, DedupPolicy::kSuffixOrdinal);
  EXPECT_DOUBLE_EQ(a.conflict_rate_before_dedup(), 2.0 / 3.0);
  EXPECT_EQ(a.entries()[0].terms, (Terms{"x", "y"}));
  EXPECT_EQ(a.entries()[1].terms, (Terms{"x", "y", "2"}));
  EXPECT_EQ(a.entries()[2].terms, (Terms{"w"}));
  EXPECT_TRUE(a.entries()[1].deduped);
  EXPECT_FALSE(a.entries()[0].deduped);
}

TEST(AssignDocids, SuffixTermUsesSpareTerms) {
  const auto corpus = corpus_of({"one", "two"});
  const auto source = fixed_source({{"d1", {{"x", "y"}, {"z"}}}, {"d2", {{"x", "y"}, {"y", "q"}}}});
  const auto a = assign_docids(corpus, source, DedupPolicy::kSuffixTerm);
  EXPECT_EQ(a.entries()[0].terms, (Terms{"x", "y"}));
  EXPECT_EQ(a.entries()[1].terms, (Terms{"x", "y", "q"}));
}

TEST(AssignDocids, DistinctIsUnchanged) {
  const auto corpus = corpus_of({"one", "two"});
  const auto a = assign_docids(corpus, fixed_source({{"d1", {{"x"}, {}}}, {"d2", {{"y"}, {}}}}), DedupPolicy::kError);
  EXPECT_EQ(a.conflict_rate_before_dedup(), 0.0);
  EXPECT_EQ(a.entries()[0].terms, Terms{"x"});
  EXPECT_EQ(a.entries()[1].terms, Terms{"y"});
}

TEST(AssignDocids, ErrorPolicyRaisesOnIdenticalDocs) {
  const auto corpus = corpus_of({"river stone", "river stone"});
  const KeywordExtractor ex(corpus, Stoplist::builtin());
  EXPECT_THROW(assign_docids(corpus, extractive_docid_source(ex, 8), DedupPolicy::kError), ConflictError);
}

TEST(AssignDocids, RandomCorporaStayUniqueAndBounded) {
  Rng rng(99);
  const char* words[] = {"red", "blue", "green", "fast", "slow", "cat", "dog"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> texts;
    for (std::size_t d = 0, n = 1 + rng.below(12); d < n; ++d) {
      std::string t = words[rng.below(3)];
      for (std::size_t i = 0, m = rng.below(3); i < m; ++i) t += std::string(" ") + words[rng.below(std::size(words))];
      texts.push_back(t);
    }
    const auto corpus = corpus_of(texts);
    const KeywordExtractor ex(corpus, Stoplist::builtin());
    const std::size_t L = 1 + rng.below(3);
    const auto policy = rng.below(2) == 0 ? DedupPolicy::kSuffixTerm : DedupPolicy::kSuffixOrdinal;
    const auto a = assign_docids(corpus, extractive_docid_source(ex, L), policy);

    std::vector<Terms> raw;
    for (const auto& d : corpus.docs()) raw.push_back(generate_docid(d, L, ex).terms);
    std::map<Terms, int> counts;
    for (const auto& r : raw) ++counts[r];
    int conflicted = 0;
    for (const auto& r : raw) conflicted += counts[r] > 1 ? 1 : 0;
    EXPECT_DOUBLE_EQ(a.conflict_rate_before_dedup(), static_cast<double>(conflicted) / raw.size());
    EXPECT_GE(a.conflict_rate_before_dedup(), 0.0);
    EXPECT_LE(a.conflict_rate_before_dedup(), 1.0);

    std::set<Terms> seen;
    for (const auto& e : a.entries()) {
      EXPECT_TRUE(seen.insert(e.terms).second);
      EXPECT_LE(e.terms.size(), L + 1);
    }
  }
}

TEST(RawConflictRate, Extremes) {
  EXPECT_EQ(raw_conflict_rate({{"a"}, {"b"}, {"c"}}), 0.0);
  EXPECT_EQ(raw_conflict_rate({{"a"}, {"a"}, {"a"}}), 1.0);
  EXPECT_EQ(raw_conflict_rate({}), 0.0);
}

TEST(ExternalDocids, FullCoverageTruncationAndMissing) {
  TempDir dir;
  const auto corpus = corpus_of({"one", "two"});
  const auto full = load_external_docids(
      dir.write("e.jsonl", "{\"doc_id\":\"d1\",\"docid\":\"a1 b c d e f g h i j\"}\n{\"doc_id\":\"d2\",\"docid\":\"x y\"}\n"),
      corpus, 8);
  EXPECT_EQ(full.by_doc.size(), 2u);
  EXPECT_EQ(full.truncated, 1u);
  EXPECT_EQ(full.by_doc.at("d1").terms.size(), 8u);
  EXPECT_EQ(full.by_doc.at("d1").terms.back(), "h");

  try {
    load_external_docids(dir.write("m.jsonl", "{\"doc_id\":\"d1\",\"docid\":\"x\"}\n"), corpus, 8);
    FAIL();
  } catch (const IntegrityError& e) {
    EXPECT_NE(std::string(e.what()).find("d2"), std::string::npos) << e.what();
  }
}

TEST(DocidAssignment, SerializeParseRoundTrip) {
  const auto corpus = corpus_of({"one", "two"});
  const auto a = assign_docids(corpus, fixed_source({{"d1", {{"x", "y"}, {}}}, {"d2", {{"x", "y"}, {}}}}),
                               DedupPolicy::kSuffixOrdinal);
  const auto b = DocidAssignment::parse(a.serialize(), a.conflict_rate_before_dedup());
  EXPECT_EQ(b.serialize(), a.serialize());
  EXPECT_EQ(b.find("d2")->terms, (Terms{"x", "y", "2"}));
}

TEST(DuplicateCorpus, FortyOfTwoHundredConflict) {
  TempDir dir;
  const auto corpus = load_corpus(dir.write("c.jsonl", testing::duplicate_corpus_jsonl(200, 20, 5)));
  ASSERT_EQ(corpus.size(), 200u);
  const KeywordExtractor ex(corpus, Stoplist::builtin());
  const auto a = assign_docids(corpus, extractive_docid_source(ex, 8), DedupPolicy::kSuffixTerm);
  EXPECT_DOUBLE_EQ(a.conflict_rate_before_dedup(), 0.2);
}

}  // namespace
}  // namespace keygr
