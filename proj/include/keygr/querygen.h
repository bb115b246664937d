// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "keygr/corpus.h"
#include "keygr/docid.h"

namespace keygr {

enum class QueryStyle { kKeyword, kQuestion, kClaim };

std::string_view query_style_name(QueryStyle style);
QueryStyle parse_query_style(std::string_view name);

struct PseudoQuery {
  std::string doc_id;
  std::string instr_id;
  std::string text;
  /// Unknown for externally generated queries that carry no style.
  std::optional<QueryStyle> style;
  int seed_index = 0;
};

struct DocQueries {
  std::string doc_id;
  std::vector<PseudoQuery> queries;
};

/// Exactly `per_doc` queries for every indexed document, in corpus order.
struct QueryBatch {
  int per_doc = 0;
  std::vector<DocQueries> docs;

  std::size_t query_count() const;
};

/// Probability of each style for one draw.
struct StyleMix {
  double keyword = 0.5;
  double question = 0.3;
  double claim = 0.2;
};

/// True if the instruction mentions code, error, table or conversation.
bool has_style_marker(const TaskInstruction& instr);
/// 0.5/0.3/0.2 by default; 0.8 keyword (rest split 3:2) for marked instructions.
StyleMix style_mix(const TaskInstruction& instr);

/// Samples B pseudo-queries for one document. Each draw j uses its own RNG
/// stream derived from (seed, doc_id, j), so output is independent of
/// document order and thread scheduling.
///
///   keyword   2-5 distinct terms sampled from the document's top-10 TF-IDF terms
///   question  one of four "what is <top> in <second>"-style templates
///   claim     the sentence with the highest TF-IDF mass, at most 24 tokens
///
/// Throws DegenerateDocumentError if the document has no content term.
std::vector<PseudoQuery> generate_queries(const Document& doc, const TaskInstruction& instr, int per_doc,
                                          std::uint64_t seed, const KeywordExtractor& extractor);

QueryBatch generate_batch(const Corpus& corpus, const TaskInstruction& instr, int per_doc,
                          std::uint64_t seed, const KeywordExtractor& extractor);

/// JSONL `{"doc_id", "instr_id", "text", "j"}` with optional "style". Every
/// corpus document needs exactly `per_doc` queries with j = 0..per_doc-1.
QueryBatch load_external_queries(const std::filesystem::path& path, const Corpus& corpus, int per_doc);

/// Same format as load_external_queries reads.
std::string serialize_batch(const QueryBatch& batch);

/// Mean token count over all queries. Throws ContractError on an empty batch.
double avg_query_length(const QueryBatch& batch);

}  // namespace keygr
