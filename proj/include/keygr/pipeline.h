// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "keygr/corpus.h"
#include "keygr/decoder.h"
#include "keygr/docid.h"
#include "keygr/eval.h"
#include "keygr/scorer.h"
#include "keygr/trie.h"
#include "keygr/vocab.h"

namespace keygr {

/// Everything the batch commands need. Loaded from an INI-style file
/// (sections [paths], [docid], [querygen], [scorer], [decoder], [run]);
/// command-line flags override individual fields afterwards.
struct PipelineConfig {
  // [paths]
  std::filesystem::path corpus;
  std::filesystem::path instructions;
  std::filesystem::path qrels;
  std::filesystem::path queries;
  std::filesystem::path out;

  // [docid]
  std::size_t docid_length = kDefaultDocidLength;
  DedupPolicy dedup = DedupPolicy::kSuffixTerm;
  std::filesystem::path external_docids;
  std::filesystem::path stopwords;

  // [querygen]
  int queries_per_doc = 8;
  std::uint64_t query_seed = 0;
  std::filesystem::path external_queries;
  std::string instruction_id;

  // [scorer]
  std::vector<double> alpha_grid = kDefaultAlphaGrid;
  std::vector<double> beta_grid = kDefaultBetaGrid;

  // [decoder]
  DecoderConfig decoder;
  std::vector<Strategy> compare = {Strategy::kGreedy, Strategy::kNucleus, Strategy::kReverseAnnealing,
                                   Strategy::kBeam};

  // [run]
  int threads = 1;
  std::string tag = "keygr";

  /// Sets both the query-generation and decoding seeds.
  void set_seed(std::uint64_t seed);
  /// Stable text form of every setting that affects index contents.
  std::string canonical_index_settings() const;
};

/// Parses INI text. Relative paths are resolved against `base_dir`.
PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

inline constexpr std::string_view kVocabularyFile = "vocabulary.txt";
inline constexpr std::string_view kDocidsFile = "docids.jsonl";
inline constexpr std::string_view kScorerFile = "scorer.jsonl";
inline constexpr std::string_view kManifestFile = "manifest.json";

struct IndexSummary {
  std::size_t documents = 0;
  double conflict_rate = 0.0;
  double avg_query_length = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double cross_entropy = 0.0;
  std::string config_hash;
};

/// Docids -> pseudo-queries -> vocabulary -> trie -> fitted scorer, written
/// to `out_dir` as vocabulary.txt, docids.jsonl, scorer.jsonl and
/// manifest.json. Byte-identical for a fixed config and seed.
IndexSummary cmd_index(const PipelineConfig& config, const std::filesystem::path& out_dir);

/// An index directory read back into memory.
struct LoadedIndex {
  Vocabulary vocab;
  DocidAssignment assignment;
  DocidTrie trie;
  LexicalScorer scorer;
  Stoplist stoplist;
  std::string default_instruction_id;
  std::map<std::string, std::string> instructions;
  std::string config_hash;
};

LoadedIndex load_index(const std::filesystem::path& dir);

struct QueryRecord {
  std::string query_id;
  std::string text;
  std::string instr_id;
};

/// JSONL {"query_id", "text", optional "instr_id"}.
std::vector<QueryRecord> load_queries(const std::filesystem::path& path);

/// Encodes queries against an index; unknown instruction ids are an IntegrityError.
std::vector<DecodeQuery> encode_queries(const LoadedIndex& index, const std::vector<QueryRecord>& records);

struct RetrieveOutput {
  std::vector<RunEntry> run;
  /// JSONL {"query_id", "rank", "doc_id", "docid", "logprob"}.
  std::string aux_jsonl;
};

/// Decodes every query with config.decoder and writes run.trec and
/// run.aux.jsonl into `out_dir`.
RetrieveOutput cmd_retrieve(const PipelineConfig& config, const std::filesystem::path& index_dir,
                            const std::filesystem::path& queries_path, const std::filesystem::path& out_dir);

/// Writes report.jsonl into `out_dir`.
MetricReport cmd_eval(const std::filesystem::path& run_path, const std::filesystem::path& qrels_path,
                      const std::filesystem::path& out_dir);

/// Writes comparison.jsonl and comparison.txt into `out_dir`.
Comparison cmd_compare(const PipelineConfig& config, const std::filesystem::path& index_dir,
                       const std::filesystem::path& queries_path, const std::filesystem::path& qrels_path,
                       const std::filesystem::path& out_dir);

}  // namespace keygr
