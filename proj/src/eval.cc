// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#include "keygr/eval.h"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "json.hpp"
#include "keygr/error.h"

namespace keygr {

using json = nlohmann::json;

namespace {

std::size_t positives(const std::map<std::string, int>& judged) {
  return static_cast<std::size_t>(
      std::count_if(judged.begin(), judged.end(), [](const auto& kv) { return kv.second > 0; }));
}

int relevance(const std::map<std::string, int>& judged, const std::string& doc) {
  auto it = judged.find(doc);
  return it == judged.end() ? 0 : it->second;
}

void finish(MetricValue& v) {
  v.evaluated = v.per_query.size();
  double sum = 0.0;
  for (const auto& [q, x] : v.per_query) sum += x;
  v.mean = v.evaluated == 0 ? 0.0 : sum / static_cast<double>(v.evaluated);
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

MetricValue acc_at_1(const std::vector<RankedList>& run, const Qrels& qrels) {
  MetricValue v;
  for (const auto& list : run) {
    const auto* judged = qrels.judgments(list.query_id);
    if (!judged) {
      ++v.skipped;
      continue;
    }
    const bool hit = !list.doc_ids.empty() && relevance(*judged, list.doc_ids.front()) >= 1;
    v.per_query.emplace_back(list.query_id, hit ? 1.0 : 0.0);
  }
  finish(v);
  return v;
}

MetricValue ndcg_at(const std::vector<RankedList>& run, const Qrels& qrels, std::size_t cutoff) {
  MetricValue v;
  for (const auto& list : run) {
    const auto* judged = qrels.judgments(list.query_id);
    if (!judged || positives(*judged) == 0) {
      ++v.skipped;
      continue;
    }
    double dcg = 0.0;
    for (std::size_t i = 0; i < std::min(cutoff, list.doc_ids.size()); ++i) {
      const int rel = relevance(*judged, list.doc_ids[i]);
      dcg += (std::exp2(rel) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
    }
    std::vector<int> ideal;
    for (const auto& [doc, rel] : *judged) ideal.push_back(rel);
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    double idcg = 0.0;
    for (std::size_t i = 0; i < std::min(cutoff, ideal.size()); ++i) {
      idcg += (std::exp2(ideal[i]) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
    }
    v.per_query.emplace_back(list.query_id, idcg > 0.0 ? dcg / idcg : 0.0);
  }
  finish(v);
  return v;
}

MetricValue recall_at(const std::vector<RankedList>& run, const Qrels& qrels, std::size_t cutoff) {
  MetricValue v;
  for (const auto& list : run) {
    const auto* judged = qrels.judgments(list.query_id);
    const std::size_t relevant = judged ? positives(*judged) : 0;
    if (relevant == 0) {
      ++v.skipped;
      continue;
    }
    std::set<std::string> found;
    for (std::size_t i = 0; i < std::min(cutoff, list.doc_ids.size()); ++i) {
      if (relevance(*judged, list.doc_ids[i]) > 0) found.insert(list.doc_ids[i]);
    }
    v.per_query.emplace_back(list.query_id, static_cast<double>(found.size()) / static_cast<double>(relevant));
  }
  finish(v);
  return v;
}

MetricReport evaluate(const std::vector<RankedList>& run, const Qrels& qrels) {
  MetricReport r;
  r.acc_at_1 = acc_at_1(run, qrels);
  r.ndcg_at_10 = ndcg_at_10(run, qrels);
  r.recall_at_100 = recall_at_100(run, qrels);
  r.query_count = run.size();
  std::map<std::string, QueryMetrics> rows;
  for (const auto& list : run) rows[list.query_id].query_id = list.query_id;
  for (const auto& [q, x] : r.acc_at_1.per_query) rows[q].acc_at_1 = x;
  for (const auto& [q, x] : r.ndcg_at_10.per_query) rows[q].ndcg_at_10 = x;
  for (const auto& [q, x] : r.recall_at_100.per_query) rows[q].recall_at_100 = x;
  for (const auto& list : run) r.per_query.push_back(rows[list.query_id]);
  return r;
}

std::string MetricReport::to_jsonl() const {
  std::string out;
  for (const auto& q : per_query) {
    out += json{{"query_id", q.query_id},
                {"acc_at_1", optional_number(q.acc_at_1)},
                {"ndcg_at_10", optional_number(q.ndcg_at_10)},
                {"recall_at_100", optional_number(q.recall_at_100)}}
               .dump();
    out += '\n';
  }
  out += json{{"query_id", "all"},
              {"acc_at_1", acc_at_1.mean},
              {"ndcg_at_10", ndcg_at_10.mean},
              {"recall_at_100", recall_at_100.mean},
              {"queries", query_count},
              {"skipped", {{"acc_at_1", acc_at_1.skipped},
                           {"ndcg_at_10", ndcg_at_10.skipped},
                           {"recall_at_100", recall_at_100.skipped}}}}
             .dump();
  out += '\n';
  return out;
}

std::vector<Retrieval> decode_all(const DecoderConfig& config, const Scorer& scorer, const DocidTrie& trie,
                                  const std::vector<DecodeQuery>& queries, int threads) {
  config.validate();
  std::vector<Retrieval> out(queries.size());
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || queries.size() < 2) {
    for (std::size_t i = 0; i < queries.size(); ++i) out[i] = decode(config, scorer, trie, queries[i]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, queries.size()); ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < queries.size(); i = next++) {
          try {
            out[i] = decode(config, scorer, trie, queries[i]);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<RankedList> ranked_lists(const std::vector<DecodeQuery>& queries,
                                     const std::vector<Retrieval>& retrievals) {
  std::vector<RankedList> out;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    RankedList list{queries[i].query_id, {}};
    for (const auto& e : retrievals[i].emissions) list.doc_ids.push_back(e.doc_id);
    out.push_back(std::move(list));
  }
  return out;
}

Comparison compare_decoders(const Scorer& scorer, const DocidTrie& trie, const std::vector<DecodeQuery>& queries,
                            const Qrels& qrels, const std::vector<DecoderConfig>& configs, int threads) {
  Comparison cmp;
  for (const auto& config : configs) {
    const auto retrievals = decode_all(config, scorer, trie, queries, threads);
    cmp.rows.push_back({config, evaluate(ranked_lists(queries, retrievals), qrels)});
  }
  return cmp;
}

std::string Comparison::to_jsonl() const {
  std::string out;
  for (const auto& row : rows) {
    out += json{{"decoder", std::string(strategy_name(row.config.strategy))},
                {"label", row.config.label()},
                {"k", row.config.k},
                {"seed", row.config.seed},
                {"acc_at_1", row.report.acc_at_1.mean},
                {"ndcg_at_10", row.report.ndcg_at_10.mean},
                {"recall_at_100", row.report.recall_at_100.mean},
                {"queries", row.report.query_count}}
               .dump();
    out += '\n';
  }
  return out;
}

std::string Comparison::to_table() const {
  std::size_t width = std::string_view("decoder").size();
  for (const auto& row : rows) width = std::max(width, row.config.label().size());
  std::string out = fmt::format("{:<{}}  {:>8}  {:>10}  {:>13}\n", "decoder", width, "Acc@1", "nDCG@10", "Recall@100");
  for (const auto& row : rows) {
    out += fmt::format("{:<{}}  {:>8.4f}  {:>10.4f}  {:>13.4f}\n", row.config.label(), width,
                       row.report.acc_at_1.mean, row.report.ndcg_at_10.mean, row.report.recall_at_100.mean);
  }
  return out;
}

}  // namespace keygr
