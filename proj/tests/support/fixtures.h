// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

// Shared helpers for the test binaries.

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "keygr/corpus.h"
#include "keygr/rng.h"
#include "keygr/scorer.h"
#include "keygr/trie.h"
#include "keygr/vocab.h"

namespace keygr::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  /// Writes `contents` to `name` inside the directory and returns its path.
  std::filesystem::path write(const std::string& name, const std::string& contents) const;

 private:
  std::filesystem::path path_;
};

/// Five short, topically distinct documents.
Corpus five_doc_corpus();
std::string five_doc_corpus_jsonl();

/// Random set of distinct docid paths over tokens [3, 3 + alphabet), each
/// 1..max_len tokens long. Paths may be prefixes of one another.
std::vector<std::pair<TokenSeq, std::string>> random_docids(Rng& rng, std::size_t count, std::size_t alphabet,
                                                            std::size_t max_len);

/// Scorer with a fixed pseudo-random logit per (query_id, prefix, token).
class HashScorer final : public Scorer {
 public:
  explicit HashScorer(std::uint64_t salt, double scale = 3.0) : salt_(salt), scale_(scale) {}
  std::vector<double> logits(const ScorerContext& ctx, std::span<const TokenId> candidates) const override;

 private:
  std::uint64_t salt_;
  double scale_;
};

/// Adds `shift` to every logit of the wrapped scorer.
class ShiftedScorer final : public Scorer {
 public:
  ShiftedScorer(const Scorer& inner, double shift) : inner_(inner), shift_(shift) {}
  std::vector<double> logits(const ScorerContext& ctx, std::span<const TokenId> candidates) const override {
    auto out = inner_.logits(ctx, candidates);
    for (double& v : out) v += shift_;
    return out;
  }

 private:
  const Scorer& inner_;
  double shift_;
};

/// Every leaf of `trie` scored by an independent depth-first enumeration of
/// masked log-softmax sums, best first, ties by path.
std::vector<std::pair<double, TokenSeq>> enumerate_leaves(const Scorer& scorer, const ScorerContext& ctx,
                                                          const DocidTrie& trie);

}  // namespace keygr::testing
