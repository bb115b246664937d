// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#include "support/synthetic.h"

#include <cmath>
#include <set>

#include <fmt/format.h>

#include "json.hpp"
#include "keygr/rng.h"

namespace keygr::testing {

namespace {

constexpr const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "kr", "st", "tr"};
constexpr const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};

constexpr const char* kFiller[] = {"report", "general", "item", "system", "value", "record",
                                   "section", "overview", "summary", "detail", "note", "entry"};

// Templates for the held-out queries. None of these words are produced by
// the pseudo-query templates.
constexpr const char* kQueryTemplates[] = {"looking for {}", "documents discussing {}", "find material on {}",
                                           "{} explained"};

std::string pseudo_word(Rng& rng) {
  std::string w;
  const std::size_t syllables = 2 + rng.below(2);
  for (std::size_t s = 0; s < syllables; ++s) {
    w += kOnsets[rng.below(std::size(kOnsets))];
    w += kVowels[rng.below(std::size(kVowels))];
  }
  return w;
}

// Index drawn with probability proportional to 1 / (rank + 1).
std::size_t zipf(Rng& rng, std::size_t n) {
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) total += 1.0 / static_cast<double>(r + 1);
  double u = rng.uniform() * total;
  for (std::size_t r = 0; r < n; ++r) {
    u -= 1.0 / static_cast<double>(r + 1);
    if (u < 0.0) return r;
  }
  return n - 1;
}

}  // namespace

SyntheticTask make_synthetic_task(const SyntheticOptions& o) {
  Rng rng = Rng::derive(o.seed, fnv1a64("synthetic-task"));
  std::set<std::string> used(std::begin(kFiller), std::end(kFiller));
  std::vector<std::vector<std::string>> topics(o.documents);
  for (auto& topic : topics) {
    while (topic.size() < o.topic_words) {
      std::string w = pseudo_word(rng);
      if (used.insert(w).second) topic.push_back(std::move(w));
    }
  }

  SyntheticTask task;
  task.documents = o.documents;
  for (std::size_t d = 0; d < o.documents; ++d) {
    std::string text;
    for (std::size_t i = 0; i < o.words_per_doc; ++i) {
      const std::string& w = rng.uniform() < o.filler_share ? std::string(kFiller[rng.below(std::size(kFiller))])
                                                            : topics[d][zipf(rng, o.topic_words)];
      if (!text.empty()) text += (i % 12 == 0) ? ". The " : " ";
      text += w;
    }
    text += ".";
    const std::string doc_id = fmt::format("doc{:03}", d);
    task.corpus_jsonl += nlohmann::json{{"doc_id", doc_id}, {"text", text}}.dump() + "\n";

    std::set<std::size_t> picked;
    while (picked.size() < std::min(o.query_words, o.topic_words)) picked.insert(zipf(rng, o.topic_words));
    std::string words;
    for (std::size_t p : picked) words += (words.empty() ? "" : " ") + topics[d][p];
    const std::string qtext = fmt::format(fmt::runtime(kQueryTemplates[rng.below(std::size(kQueryTemplates))]), words);
    const std::string qid = fmt::format("q{:03}", d);
    task.queries_jsonl += nlohmann::json{{"query_id", qid}, {"text", qtext}}.dump() + "\n";
    task.qrels += fmt::format("{} 0 {} 1\n", qid, doc_id);
  }
  return task;
}

std::string duplicate_corpus_jsonl(std::size_t documents, std::size_t pairs, std::uint64_t seed) {
  SyntheticOptions o;
  o.documents = documents - pairs;
  o.seed = seed;
  const SyntheticTask base = make_synthetic_task(o);
  std::vector<std::string> texts;
  std::string out;
  std::size_t line_start = 0;
  while (line_start < base.corpus_jsonl.size()) {
    const auto end = base.corpus_jsonl.find('\n', line_start);
    texts.push_back(nlohmann::json::parse(base.corpus_jsonl.substr(line_start, end - line_start)).at("text"));
    line_start = end + 1;
  }
  std::size_t next = 0;
  for (const auto& t : texts) out += nlohmann::json{{"doc_id", fmt::format("u{:03}", next++)}, {"text", t}}.dump() + "\n";
  for (std::size_t i = 0; i < pairs; ++i) {
    out += nlohmann::json{{"doc_id", fmt::format("c{:03}", i)}, {"text", texts[i]}}.dump() + "\n";
  }
  return out;
}

}  // namespace keygr::testing
