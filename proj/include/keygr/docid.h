// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "keygr/corpus.h"

namespace keygr {

inline constexpr std::size_t kDefaultDocidLength = 8;

/// Versioned list of function words that never become docid terms.
class Stoplist {
 public:
  Stoplist() = default;
  explicit Stoplist(std::set<std::string> words) : words_(std::move(words)) {}

  /// The list shipped in data/stopwords.txt, compiled in.
  static const Stoplist& builtin();
  static Stoplist parse(std::string_view text);
  static Stoplist load(const std::filesystem::path& path);

  bool contains(std::string_view word) const { return words_.count(std::string(word)) > 0; }
  std::size_t size() const { return words_.size(); }

 private:
  std::set<std::string> words_;
};

/// `[a-z0-9][a-z0-9.#-]*` and not an article.
bool is_valid_docid_term(std::string_view term);

struct Docid {
  std::string doc_id;
  std::vector<std::string> terms;
};

struct ScoredTerm {
  std::string term;
  double score = 0.0;
  std::size_t first_position = 0;
};

/// TF-IDF keyword ranking with IDF = ln((n+1)/(df+1)) + 1 over the indexing
/// corpus (uniform for corpora of at most one document).
class KeywordExtractor {
 public:
  KeywordExtractor(const Corpus& corpus, const Stoplist& stoplist);

  double idf(const std::string& term) const;
  /// Stopwords, invalid tokens and articles are never candidates.
  bool is_candidate(const std::string& token) const;
  /// Every distinct candidate term of `doc`, by descending tf*idf, ties
  /// broken by earlier first occurrence.
  std::vector<ScoredTerm> rank_terms(const Document& doc) const;
  const Stoplist& stoplist() const { return stoplist_; }

 private:
  Stoplist stoplist_;
  std::size_t n_docs_ = 0;
  std::unordered_map<std::string, std::size_t> df_;
};

/// Top min(max_len, available) ranked terms. Throws DegenerateDocumentError
/// when the document has no candidate term.
Docid generate_docid(const Document& doc, std::size_t max_len, const KeywordExtractor& extractor);

/// A docid proposal plus spare ranked terms usable for suffix deduplication.
struct DocidProposal {
  std::vector<std::string> terms;
  std::vector<std::string> spare_terms;
};

using DocidSource = std::function<DocidProposal(const Document&)>;

DocidSource extractive_docid_source(const KeywordExtractor& extractor, std::size_t max_len);

struct ExternalDocids {
  std::map<std::string, Docid> by_doc;
  std::size_t truncated = 0;
};

/// JSONL `{"doc_id", "docid": "term term ..."}`. Docids longer than max_len
/// are truncated and counted. Missing coverage is an IntegrityError.
ExternalDocids load_external_docids(const std::filesystem::path& path, const Corpus& corpus,
                                    std::size_t max_len = kDefaultDocidLength);

DocidSource external_docid_source(const ExternalDocids& docids);

enum class DedupPolicy { kError, kSuffixTerm, kSuffixOrdinal };

DedupPolicy parse_dedup_policy(std::string_view name);
std::string_view dedup_policy_name(DedupPolicy policy);

struct AssignedDocid {
  std::string doc_id;
  std::vector<std::string> terms;
  bool deduped = false;
};

/// Unique docid per document, in corpus order.
class DocidAssignment {
 public:
  DocidAssignment() = default;
  /// Throws IntegrityError if doc ids or term sequences repeat.
  DocidAssignment(std::vector<AssignedDocid> entries, double conflict_rate_before_dedup);

  const std::vector<AssignedDocid>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  double conflict_rate_before_dedup() const { return conflict_rate_; }
  const AssignedDocid* find(const std::string& doc_id) const;

  /// JSONL `{"doc_id", "docid", "deduped"}`, one line per document.
  std::string serialize() const;
  static DocidAssignment parse(std::string_view jsonl, double conflict_rate_before_dedup);

 private:
  std::vector<AssignedDocid> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  double conflict_rate_ = 0.0;
};

/// Fraction of documents whose raw term sequence equals another document's.
double raw_conflict_rate(const std::vector<std::vector<std::string>>& sequences);

/// Proposes a docid per document, measures the raw conflict rate, then
/// deduplicates. Suffixes may push a docid to max_len + 1 terms.
DocidAssignment assign_docids(const Corpus& corpus, const DocidSource& source, DedupPolicy policy);

}  // namespace keygr
