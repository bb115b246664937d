// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#include "keygr/pipeline.h"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <set>
#include <sstream>

#include "json.hpp"
#include "keygr/error.h"
#include "keygr/querygen.h"
#include "keygr/rng.h"

namespace keygr {

using json = nlohmann::json;
namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

const TaskInstruction kDefaultInstruction{"default", "Retrieve the document that is relevant to the query."};

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (in.fail() || !in.eof()) throw UsageError(fmt::format("config: {} = \"{}\" is not a number", key, value));
  return out;
}

std::vector<double> parse_grid(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto lo = item.find_first_not_of(" \t");
    const auto hi = item.find_last_not_of(" \t");
    if (lo == std::string::npos) continue;
    out.push_back(parse_number<double>(key, item.substr(lo, hi - lo + 1)));
  }
  if (out.empty()) throw UsageError(fmt::format("config: {} is empty", key));
  return out;
}

std::vector<Strategy> parse_strategies(const std::string& value) {
  std::vector<Strategy> out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto lo = item.find_first_not_of(" \t");
    const auto hi = item.find_last_not_of(" \t");
    if (lo == std::string::npos) continue;
    out.push_back(parse_strategy(item.substr(lo, hi - lo + 1)));
  }
  if (out.empty()) throw UsageError("config: decoder.compare is empty");
  return out;
}

std::string hex64(std::uint64_t h) { return fmt::format("{:016x}", h); }

void require_file(const fs::path& path, std::string_view what) {
  if (path.empty()) throw UsageError(fmt::format("no {} path configured", what));
  if (!fs::exists(path)) throw IoError(fmt::format("{} not found: {}", what, path.string()));
}

std::string read_optional(const fs::path& path) { return path.empty() ? std::string() : read_file(path); }

json grid_json(const std::vector<double>& grid) { return json(grid); }

}  // namespace

void PipelineConfig::set_seed(std::uint64_t seed) {
  query_seed = seed;
  decoder.seed = seed;
}

std::string PipelineConfig::canonical_index_settings() const {
  json j = {{"docid_length", docid_length},
            {"dedup", std::string(dedup_policy_name(dedup))},
            {"external_docids", !external_docids.empty()},
            {"stopwords", stopwords.empty() ? "builtin" : "file"},
            {"queries_per_doc", queries_per_doc},
            {"query_seed", query_seed},
            {"external_queries", !external_queries.empty()},
            {"instruction_id", instruction_id},
            {"alpha_grid", grid_json(alpha_grid)},
            {"beta_grid", grid_json(beta_grid)}};
  return j.dump();
}

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError("config", e.line(), e.message());
  }
  PipelineConfig c;
  const auto resolve = [&](const std::string& v) {
    fs::path p(v);
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) throw UsageError(fmt::format("config: key \"{}\" outside a section", section));
    for (const auto& [key, node] : body) {
      const std::string v = node.data();
      const std::string name = section + "." + key;
      if (name == "paths.corpus") c.corpus = resolve(v);
      else if (name == "paths.instructions") c.instructions = resolve(v);
      else if (name == "paths.qrels") c.qrels = resolve(v);
      else if (name == "paths.queries") c.queries = resolve(v);
      else if (name == "paths.out") c.out = resolve(v);
      else if (name == "docid.length") c.docid_length = parse_number<std::size_t>(name, v);
      else if (name == "docid.dedup") c.dedup = parse_dedup_policy(v);
      else if (name == "docid.external") c.external_docids = resolve(v);
      else if (name == "docid.stopwords") c.stopwords = resolve(v);
      else if (name == "querygen.per_doc") c.queries_per_doc = parse_number<int>(name, v);
      else if (name == "querygen.seed") c.query_seed = parse_number<std::uint64_t>(name, v);
      else if (name == "querygen.external") c.external_queries = resolve(v);
      else if (name == "querygen.instruction") c.instruction_id = v;
      else if (name == "scorer.alpha_grid") c.alpha_grid = parse_grid(name, v);
      else if (name == "scorer.beta_grid") c.beta_grid = parse_grid(name, v);
      else if (name == "decoder.strategy") c.decoder.strategy = parse_strategy(v);
      else if (name == "decoder.k") c.decoder.k = parse_number<int>(name, v);
      else if (name == "decoder.slope") c.decoder.slope = parse_number<double>(name, v);
      else if (name == "decoder.midpoint") c.decoder.midpoint = parse_number<double>(name, v);
      else if (name == "decoder.max_temperature") c.decoder.max_temperature = parse_number<double>(name, v);
      else if (name == "decoder.top_p") c.decoder.top_p = parse_number<double>(name, v);
      else if (name == "decoder.width") c.decoder.width = parse_number<int>(name, v);
      else if (name == "decoder.seed") c.decoder.seed = parse_number<std::uint64_t>(name, v);
      else if (name == "decoder.compare") c.compare = parse_strategies(v);
      else if (name == "run.threads") c.threads = parse_number<int>(name, v);
      else if (name == "run.tag") c.tag = v;
      else if (name == "run.seed") c.set_seed(parse_number<std::uint64_t>(name, v));
      else throw UsageError(fmt::format("config: unknown key \"{}\"", name));
    }
  }
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw IoError(fmt::format("config not found: {}", path.string()));
  return parse_config(read_file(path), path.parent_path());
}

IndexSummary cmd_index(const PipelineConfig& config, const fs::path& out_dir) {
  require_file(config.corpus, "corpus");
  if (!config.instructions.empty()) require_file(config.instructions, "instructions");
  if (!config.external_docids.empty()) require_file(config.external_docids, "external docids");
  if (!config.external_queries.empty()) require_file(config.external_queries, "external queries");
  if (!config.stopwords.empty()) require_file(config.stopwords, "stopwords");
  if (config.docid_length < 1) throw UsageError("docid length must be at least 1");
  if (config.queries_per_doc < 1) throw UsageError("queries per document must be at least 1");

  const Corpus corpus = load_corpus(config.corpus);
  const Stoplist stoplist = config.stopwords.empty() ? Stoplist::builtin() : Stoplist::load(config.stopwords);

  std::vector<TaskInstruction> instructions;
  if (!config.instructions.empty()) instructions = load_instructions(config.instructions);
  TaskInstruction instr = kDefaultInstruction;
  if (!config.instruction_id.empty()) {
    auto it = std::find_if(instructions.begin(), instructions.end(),
                           [&](const TaskInstruction& t) { return t.instr_id == config.instruction_id; });
    if (it == instructions.end()) {
      throw IntegrityError(fmt::format("instruction \"{}\" not found", config.instruction_id));
    }
    instr = *it;
  } else if (!instructions.empty()) {
    instr = instructions.front();
  }
  if (instructions.empty()) instructions.push_back(instr);

  // Docids.
  const KeywordExtractor extractor(corpus, stoplist);
  std::size_t truncated = 0;
  DocidAssignment assignment;
  if (!config.external_docids.empty()) {
    const auto external = load_external_docids(config.external_docids, corpus, config.docid_length);
    truncated = external.truncated;
    assignment = assign_docids(corpus, external_docid_source(external), config.dedup);
  } else {
    assignment = assign_docids(corpus, extractive_docid_source(extractor, config.docid_length), config.dedup);
  }

  // Pseudo-queries.
  const QueryBatch batch = config.external_queries.empty()
                               ? generate_batch(corpus, instr, config.queries_per_doc, config.query_seed, extractor)
                               : load_external_queries(config.external_queries, corpus, config.queries_per_doc);

  // Vocabulary: docid tokens first, then query tokens.
  std::vector<std::vector<std::string>> docid_tokens;
  for (const auto& e : assignment.entries()) docid_tokens.push_back(e.terms);
  std::vector<std::vector<std::string>> query_tokens;
  for (const auto& d : batch.docs) {
    for (const auto& q : d.queries) query_tokens.push_back(tokenize(q.text));
  }
  const Vocabulary vocab = build_vocabulary(docid_tokens, query_tokens);
  const DocidTrie trie = DocidTrie::build(assignment, vocab);

  // Scorer fit; the last query of every document is held out.
  std::map<std::string, TokenSeq> instr_tokens;
  for (const auto& t : instructions) instr_tokens[t.instr_id] = encode_instruction(t.text, vocab, stoplist);
  std::vector<TrainingPair> train, heldout;
  for (const auto& d : batch.docs) {
    const auto* assigned = assignment.find(d.doc_id);
    TokenSeq docid = vocab.encode(assigned->terms);
    for (const auto& q : d.queries) {
      auto it = instr_tokens.find(q.instr_id);
      TrainingPair pair{it == instr_tokens.end() ? encode_instruction(instr.text, vocab, stoplist) : it->second,
                        vocab.encode(tokenize(q.text)), docid};
      const bool hold = config.queries_per_doc > 1 && q.seed_index == config.queries_per_doc - 1;
      (hold ? heldout : train).push_back(std::move(pair));
    }
  }
  const FitResult fit = fit_lexical_scorer(train, heldout, config.alpha_grid, config.beta_grid, trie);

  // Config hash covers settings and the bytes of every input.
  std::uint64_t h = fnv1a64(config.canonical_index_settings());
  for (const auto& p : {config.corpus, config.instructions, config.external_docids, config.external_queries,
                        config.stopwords}) {
    h = mix64(h ^ fnv1a64(read_optional(p)));
  }

  IndexSummary summary;
  summary.documents = corpus.size();
  summary.conflict_rate = conflict_rate(assignment);
  summary.avg_query_length = batch.docs.empty() ? 0.0 : avg_query_length(batch);
  summary.alpha = fit.scorer.alpha();
  summary.beta = fit.scorer.beta();
  summary.cross_entropy = fit.cross_entropy;
  summary.config_hash = hex64(h);

  json grid = json::array();
  for (const auto& g : fit.grid) grid.push_back({{"alpha", g.alpha}, {"beta", g.beta}, {"cross_entropy", g.cross_entropy}});
  json instr_map = json::object();
  for (const auto& t : instructions) instr_map[t.instr_id] = t.text;
  std::size_t deduped = 0;
  for (const auto& e : assignment.entries()) deduped += e.deduped ? 1 : 0;

  json manifest = {
      {"format", "keygr-index/1"},
      {"config_hash", summary.config_hash},
      {"documents", summary.documents},
      {"docid", {{"length", config.docid_length},
                 {"dedup", std::string(dedup_policy_name(config.dedup))},
                 {"source", config.external_docids.empty() ? "extractive" : "external"},
                 {"conflict_rate", summary.conflict_rate},
                 {"deduped", deduped},
                 {"truncated", truncated}}},
      {"queries", {{"per_doc", config.queries_per_doc},
                   {"seed", config.query_seed},
                   {"source", config.external_queries.empty() ? "generated" : "external"},
                   {"count", batch.query_count()},
                   {"avg_length", summary.avg_query_length}}},
      {"instruction", instr.instr_id},
      {"instructions", instr_map},
      {"stopwords", config.stopwords.empty() ? std::string("builtin") : fs::absolute(config.stopwords).string()},
      {"scorer", {{"alpha", fit.scorer.alpha()},
                  {"beta", fit.scorer.beta()},
                  {"cross_entropy", fit.cross_entropy},
                  {"used_training_ce", fit.used_training_ce},
                  {"train_pairs", train.size()},
                  {"heldout_pairs", heldout.size()},
                  {"grid", grid}}},
      {"vocabulary_size", vocab.size()},
      {"files", {kVocabularyFile, kDocidsFile, kScorerFile, kManifestFile}}};

  fs::create_directories(out_dir);
  vocab.save(out_dir / kVocabularyFile);
  write_file(out_dir / kDocidsFile, assignment.serialize());
  write_file(out_dir / kScorerFile, fit.scorer.serialize(vocab));
  write_file(out_dir / kManifestFile, manifest.dump(2) + "\n");
  return summary;
}

LoadedIndex load_index(const fs::path& dir) {
  for (auto name : {kVocabularyFile, kDocidsFile, kScorerFile, kManifestFile}) {
    require_file(dir / name, fmt::format("index file {}", name));
  }
  json manifest;
  try {
    manifest = json::parse(read_file(dir / kManifestFile));
  } catch (const json::exception& e) {
    throw ParseError((dir / kManifestFile).string(), 0, e.what());
  }
  Vocabulary vocab = Vocabulary::load(dir / kVocabularyFile);
  try {
    DocidAssignment assignment =
        DocidAssignment::parse(read_file(dir / kDocidsFile), manifest.at("docid").at("conflict_rate").get<double>());
    DocidTrie trie = DocidTrie::build(assignment, vocab);
    LexicalScorer scorer = LexicalScorer::parse(read_file(dir / kScorerFile), vocab);
    const auto stop_src = manifest.at("stopwords").get<std::string>();
    Stoplist stoplist = stop_src == "builtin" ? Stoplist::builtin() : Stoplist::load(stop_src);
    std::map<std::string, std::string> instructions;
    for (const auto& [id, text] : manifest.at("instructions").items()) instructions[id] = text.get<std::string>();
    return LoadedIndex{std::move(vocab),
                       std::move(assignment),
                       std::move(trie),
                       std::move(scorer),
                       std::move(stoplist),
                       manifest.at("instruction").get<std::string>(),
                       std::move(instructions),
                       manifest.at("config_hash").get<std::string>()};
  } catch (const json::exception& e) {
    throw ParseError((dir / kManifestFile).string(), 0, e.what());
  }
}

std::vector<QueryRecord> load_queries(const fs::path& path) {
  require_file(path, "queries");
  std::vector<QueryRecord> out;
  std::set<std::string> seen;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    QueryRecord r;
    try {
      auto obj = json::parse(line);
      r.query_id = obj.at("query_id").get<std::string>();
      r.text = obj.at("text").get<std::string>();
      r.instr_id = obj.value("instr_id", "");
    } catch (const json::exception& e) {
      throw ParseError(path.string(), lineno, e.what());
    }
    if (r.query_id.empty() || r.query_id.find_first_of(" \t") != std::string::npos) {
      throw ParseError(path.string(), lineno, "query_id must be non-empty without whitespace");
    }
    if (!seen.insert(r.query_id).second) {
      throw IntegrityError(fmt::format("{}:{}: duplicate query_id \"{}\"", path.string(), lineno, r.query_id));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<DecodeQuery> encode_queries(const LoadedIndex& index, const std::vector<QueryRecord>& records) {
  std::vector<DecodeQuery> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const std::string& instr_id = r.instr_id.empty() ? index.default_instruction_id : r.instr_id;
    auto it = index.instructions.find(instr_id);
    if (it == index.instructions.end()) {
      throw IntegrityError(fmt::format("query {}: unknown instruction \"{}\"", r.query_id, instr_id));
    }
    out.push_back({r.query_id, encode_instruction(it->second, index.vocab, index.stoplist),
                   index.vocab.encode(tokenize(r.text))});
  }
  return out;
}

RetrieveOutput cmd_retrieve(const PipelineConfig& config, const fs::path& index_dir, const fs::path& queries_path,
                            const fs::path& out_dir) {
  const LoadedIndex index = load_index(index_dir);
  const auto queries = encode_queries(index, load_queries(queries_path));
  const auto retrievals = decode_all(config.decoder, index.scorer, index.trie, queries, config.threads);

  RetrieveOutput out;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    auto rows = to_run_entries(queries[i].query_id, retrievals[i], config.decoder.k, config.tag);
    out.run.insert(out.run.end(), rows.begin(), rows.end());
    for (const auto& e : retrievals[i].emissions) {
      out.aux_jsonl += json{{"query_id", queries[i].query_id},
                            {"rank", e.index},
                            {"doc_id", e.doc_id},
                            {"docid", fmt::format("{}", fmt::join(index.vocab.decode(e.path), " "))},
                            {"logprob", e.logprob}}
                           .dump();
      out.aux_jsonl += '\n';
    }
  }
  fs::create_directories(out_dir);
  write_run(out.run, out_dir / "run.trec");
  write_file(out_dir / "run.aux.jsonl", out.aux_jsonl);
  return out;
}

MetricReport cmd_eval(const fs::path& run_path, const fs::path& qrels_path, const fs::path& out_dir) {
  require_file(run_path, "run");
  require_file(qrels_path, "qrels");
  const auto report = evaluate(to_ranked_lists(load_run(run_path)), load_qrels(qrels_path));
  fs::create_directories(out_dir);
  write_file(out_dir / "report.jsonl", report.to_jsonl());
  return report;
}

Comparison cmd_compare(const PipelineConfig& config, const fs::path& index_dir, const fs::path& queries_path,
                       const fs::path& qrels_path, const fs::path& out_dir) {
  require_file(qrels_path, "qrels");
  const LoadedIndex index = load_index(index_dir);
  const auto queries = encode_queries(index, load_queries(queries_path));
  const Qrels qrels = load_qrels(qrels_path);
  std::vector<DecoderConfig> configs;
  for (Strategy s : config.compare) {
    DecoderConfig c = config.decoder;
    c.strategy = s;
    configs.push_back(c);
  }
  Comparison cmp = compare_decoders(index.scorer, index.trie, queries, qrels, configs, config.threads);
  fs::create_directories(out_dir);
  write_file(out_dir / "comparison.jsonl", cmp.to_jsonl());
  write_file(out_dir / "comparison.txt", cmp.to_table());
  return cmp;
}

}  // namespace keygr
