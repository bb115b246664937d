// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace keygr {

struct Document {
  std::string doc_id;
  std::string text;
  std::map<std::string, std::string> metadata;
};

/// Ordered, id-unique document collection.
class Corpus {
 public:
  Corpus() = default;
  /// Throws IntegrityError on duplicate or empty ids and on blank text.
  explicit Corpus(std::vector<Document> docs);

  const std::vector<Document>& docs() const { return docs_; }
  std::size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }
  const Document& operator[](std::size_t i) const { return docs_[i]; }

  std::optional<std::size_t> index_of(const std::string& doc_id) const;

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct TaskInstruction {
  std::string instr_id;
  std::string text;
};

struct QrelsEntry {
  std::string query_id;
  std::string doc_id;
  int relevance = 0;
};

/// TREC relevance judgments.
class Qrels {
 public:
  Qrels() = default;
  explicit Qrels(std::vector<QrelsEntry> entries);

  const std::vector<QrelsEntry>& entries() const { return entries_; }
  /// Judgments for one query, or nullptr if the query was never judged.
  const std::map<std::string, int>* judgments(const std::string& query_id) const;

 private:
  std::vector<QrelsEntry> entries_;
  std::map<std::string, std::map<std::string, int>> by_query_;
};

struct RunEntry {
  std::string query_id;
  std::string doc_id;
  int rank = 0;
  double score = 0.0;
  std::string tag;

  bool operator==(const RunEntry&) const = default;
};

/// Ranked doc ids for one query, best first.
struct RankedList {
  std::string query_id;
  std::vector<std::string> doc_ids;
};

Corpus load_corpus(const std::filesystem::path& path);
std::vector<TaskInstruction> load_instructions(const std::filesystem::path& path);
Qrels load_qrels(const std::filesystem::path& path);

/// Checks rank contiguity and strictly decreasing scores per query.
void validate_run(const std::vector<RunEntry>& entries);
/// Formats `query_id Q0 doc_id rank score tag` lines, scores with 6 decimals.
std::string format_run(const std::vector<RunEntry>& entries);
void write_run(const std::vector<RunEntry>& entries, const std::filesystem::path& path);
std::vector<RunEntry> load_run(const std::filesystem::path& path);

/// Groups entries by query (first-appearance order) and sorts each by rank.
std::vector<RankedList> to_ranked_lists(const std::vector<RunEntry>& entries);

// Small file helpers shared by the loaders and the pipeline.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);
bool is_blank(const std::string& s);

}  // namespace keygr
