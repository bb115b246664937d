// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#include "support/fixtures.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <unistd.h>

namespace keygr::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() / fmt::format("keygr-test-{}-{}", ::getpid(), counter++);
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

fs::path TempDir::write(const std::string& name, const std::string& contents) const {
  const auto p = path_ / name;
  write_file(p, contents);
  return p;
}

std::string five_doc_corpus_jsonl() {
  return R"({"doc_id":"d1","text":"The cat sat on the mat. The cat purred loudly near the warm fireplace."}
{"doc_id":"d2","text":"Quantum computers use qubits and superposition to solve hard problems."}
{"doc_id":"d3","text":"Sourdough bread needs a starter, flour, water and a long fermentation."}
{"doc_id":"d4","text":"The stock market fell sharply as interest rates rose again this quarter."}
{"doc_id":"d5","text":"Migratory birds navigate using the magnetic field and the stars at night."}
)";
}

Corpus five_doc_corpus() {
  TempDir dir;
  return load_corpus(dir.write("corpus.jsonl", five_doc_corpus_jsonl()));
}

std::vector<std::pair<TokenSeq, std::string>> random_docids(Rng& rng, std::size_t count, std::size_t alphabet,
                                                            std::size_t max_len) {
  std::set<TokenSeq> seen;
  std::vector<std::pair<TokenSeq, std::string>> out;
  std::size_t attempts = 0;
  while (out.size() < count && attempts < count * 50) {
    ++attempts;
    const std::size_t len = 1 + rng.below(max_len);
    TokenSeq path;
    for (std::size_t i = 0; i < len; ++i) path.push_back(static_cast<TokenId>(3 + rng.below(alphabet)));
    if (!seen.insert(path).second) continue;
    out.emplace_back(path, fmt::format("doc{}", out.size()));
  }
  return out;
}

std::vector<double> HashScorer::logits(const ScorerContext& ctx, std::span<const TokenId> candidates) const {
  std::uint64_t h = mix64(salt_ ^ fnv1a64(ctx.query_id));
  for (TokenId t : ctx.prefix) h = mix64(h ^ t);
  std::vector<double> out;
  out.reserve(candidates.size());
  for (TokenId c : candidates) {
    const std::uint64_t v = mix64(h ^ (static_cast<std::uint64_t>(c) << 20));
    out.push_back(scale_ * (static_cast<double>(v >> 11) * 0x1.0p-53 - 0.5));
  }
  return out;
}

namespace {

void walk(const Scorer& scorer, const ScorerContext& base, const DocidTrie& trie, DocidTrie::NodeId node,
          TokenSeq& path, double acc, std::vector<std::pair<double, TokenSeq>>& out) {
  const auto edges = trie.children(node);
  if (edges.empty()) {
    out.emplace_back(acc, path);
    return;
  }
  std::vector<TokenId> cands;
  for (const auto& e : edges) cands.push_back(e.token);
  ScorerContext ctx = base;
  TokenSeq prefix(path.begin(), path.end());
  ctx.prefix = prefix;
  const auto raw = scorer.logits(ctx, cands);
  // Plain log-sum-exp, written out rather than borrowed from the library.
  double mx = -INFINITY;
  for (double v : raw) mx = std::max(mx, v);
  double z = 0.0;
  for (double v : raw) z += std::exp(v - mx);
  const double lse = mx + std::log(z);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    path.push_back(edges[i].token);
    // <eos> is the last token; the scorer never sees it in a prefix.
    walk(scorer, base, trie, edges[i].node, path, acc + raw[i] - lse, out);
    path.pop_back();
  }
}

}  // namespace

std::vector<std::pair<double, TokenSeq>> enumerate_leaves(const Scorer& scorer, const ScorerContext& ctx,
                                                          const DocidTrie& trie) {
  std::vector<std::pair<double, TokenSeq>> out;
  TokenSeq path;
  walk(scorer, ctx, trie, DocidTrie::kRoot, path, 0.0, out);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  return out;
}

}  // namespace keygr::testing
