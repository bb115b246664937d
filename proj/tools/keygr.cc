// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

// keygr: build a docid index, retrieve, evaluate and compare decoders.

#include <fmt/format.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "keygr/error.h"
#include "keygr/pipeline.h"

namespace fs = std::filesystem;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out;

  // index
  std::string corpus, instructions, external_docids, external_queries, stopwords, instruction, dedup;
  std::optional<std::size_t> docid_length;
  std::optional<int> queries_per_doc;

  // retrieve / compare / eval
  std::string index_dir, queries, qrels, run, decoder, compare;
  std::optional<int> k, width;
  std::optional<double> slope, midpoint, max_temperature, top_p;
};

template <typename T, typename U>
void apply(const std::optional<T>& flag, U& field) {
  if (flag) field = *flag;
}

void apply(const std::string& flag, fs::path& field) {
  if (!flag.empty()) field = flag;
}

keygr::PipelineConfig resolve_config(const Overrides& o) {
  std::string path = o.config;
  if (path.empty()) {
    if (const char* env = std::getenv("KEYGR_CONFIG"); env != nullptr && *env != '\0') path = env;
  }
  keygr::PipelineConfig c = path.empty() ? keygr::PipelineConfig{} : keygr::load_config(path);
  if (o.seed) c.set_seed(*o.seed);
  apply(o.threads, c.threads);
  apply(o.out, c.out);
  apply(o.corpus, c.corpus);
  apply(o.instructions, c.instructions);
  apply(o.external_docids, c.external_docids);
  apply(o.external_queries, c.external_queries);
  apply(o.stopwords, c.stopwords);
  apply(o.queries, c.queries);
  apply(o.qrels, c.qrels);
  if (!o.instruction.empty()) c.instruction_id = o.instruction;
  if (!o.dedup.empty()) c.dedup = keygr::parse_dedup_policy(o.dedup);
  apply(o.docid_length, c.docid_length);
  apply(o.queries_per_doc, c.queries_per_doc);
  if (!o.decoder.empty()) c.decoder.strategy = keygr::parse_strategy(o.decoder);
  if (!o.compare.empty()) {
    c.compare.clear();
    std::size_t start = 0;
    while (start <= o.compare.size()) {
      const auto end = std::min(o.compare.find(',', start), o.compare.size());
      c.compare.push_back(keygr::parse_strategy(o.compare.substr(start, end - start)));
      start = end + 1;
    }
  }
  apply(o.k, c.decoder.k);
  apply(o.width, c.decoder.width);
  apply(o.slope, c.decoder.slope);
  apply(o.midpoint, c.decoder.midpoint);
  apply(o.max_temperature, c.decoder.max_temperature);
  apply(o.top_p, c.decoder.top_p);
  if (c.threads < 1) throw keygr::UsageError("--threads must be at least 1");
  if (c.out.empty()) c.out = "out";
  return c;
}

void add_decoder_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--decoder", o.decoder, "reverse-annealing, greedy, nucleus or beam");
  cmd->add_option("-k,--top-k", o.k, "docids per query");
  cmd->add_option("--slope", o.slope, "schedule slope");
  cmd->add_option("--midpoint", o.midpoint, "schedule midpoint in (0, 1)");
  cmd->add_option("--max-temperature", o.max_temperature, "schedule ceiling");
  cmd->add_option("--top-p", o.top_p, "nucleus mass");
  cmd->add_option("--width", o.width, "beam width");
}

int fail(keygr::ErrorKind kind, std::string_view message) {
  std::string line(message);
  for (char& ch : line) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  std::cerr << fmt::format("keygr: error[{}]: {}\n", keygr::error_kind_name(kind), line);
  return kind == keygr::ErrorKind::kUsage ? 1 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generative retrieval over keyword docids"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "INI config file (default: $KEYGR_CONFIG)");
  app.add_option("--seed", o.seed, "seed for query generation and decoding");
  app.add_option("--threads", o.threads, "worker threads");
  app.add_option("--out", o.out, "output directory");

  auto* index = app.add_subcommand("index", "build an index directory");
  index->fallthrough();
  index->add_option("--corpus", o.corpus, "corpus JSONL");
  index->add_option("--instructions", o.instructions, "instruction JSONL");
  index->add_option("--instruction", o.instruction, "instruction id used for query generation");
  index->add_option("--docid-length", o.docid_length, "maximum docid terms");
  index->add_option("--dedup", o.dedup, "error, suffix-term or suffix-ordinal");
  index->add_option("--external-docids", o.external_docids, "docid JSONL");
  index->add_option("--queries-per-doc", o.queries_per_doc, "pseudo-queries per document");
  index->add_option("--external-queries", o.external_queries, "pseudo-query JSONL");
  index->add_option("--stopwords", o.stopwords, "stopword list");

  auto* retrieve = app.add_subcommand("retrieve", "decode docids for each query");
  retrieve->fallthrough();
  retrieve->add_option("--index", o.index_dir, "index directory")->required();
  retrieve->add_option("--queries", o.queries, "query JSONL");
  add_decoder_flags(retrieve, o);

  auto* eval = app.add_subcommand("eval", "score a run against qrels");
  eval->fallthrough();
  eval->add_option("--run", o.run, "TREC run file")->required();
  eval->add_option("--qrels", o.qrels, "qrels file");

  auto* compare = app.add_subcommand("compare-decoders", "evaluate several decoders side by side");
  compare->fallthrough();
  compare->add_option("--index", o.index_dir, "index directory")->required();
  compare->add_option("--queries", o.queries, "query JSONL");
  compare->add_option("--qrels", o.qrels, "qrels file");
  compare->add_option("--decoders", o.compare, "comma-separated strategies");
  add_decoder_flags(compare, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(keygr::ErrorKind::kUsage, e.what());
  }

  try {
    const keygr::PipelineConfig c = resolve_config(o);
    if (*index) {
      const auto s = keygr::cmd_index(c, c.out);
      fmt::print("documents={} conflict_rate={:.6f} avg_query_length={:.3f} alpha={} beta={} cross_entropy={:.6f} "
                 "config_hash={}\n",
                 s.documents, s.conflict_rate, s.avg_query_length, s.alpha, s.beta, s.cross_entropy, s.config_hash);
    } else if (*retrieve) {
      if (c.queries.empty()) throw keygr::UsageError("retrieve needs --queries or paths.queries");
      const auto r = keygr::cmd_retrieve(c, o.index_dir, c.queries, c.out);
      fmt::print("rows={} run={}\n", r.run.size(), (c.out / "run.trec").string());
    } else if (*eval) {
      if (c.qrels.empty()) throw keygr::UsageError("eval needs --qrels or paths.qrels");
      const auto r = keygr::cmd_eval(o.run, c.qrels, c.out);
      fmt::print("queries={} acc@1={:.4f} ndcg@10={:.4f} recall@100={:.4f}\n", r.query_count, r.acc_at_1.mean,
                 r.ndcg_at_10.mean, r.recall_at_100.mean);
    } else if (*compare) {
      if (c.queries.empty()) throw keygr::UsageError("compare-decoders needs --queries or paths.queries");
      if (c.qrels.empty()) throw keygr::UsageError("compare-decoders needs --qrels or paths.qrels");
      const auto cmp = keygr::cmd_compare(c, o.index_dir, c.queries, c.qrels, c.out);
      fmt::print("{}", cmp.to_table());
    }
  } catch (const keygr::Error& e) {
    return fail(e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail(keygr::ErrorKind::kIo, e.what());
  }
  return 0;
}
