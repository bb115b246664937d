// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#include "keygr/trie.h"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>

#include "keygr/error.h"

namespace keygr {

namespace {

std::string describe(std::span<const TokenId> path) { return fmt::format("[{}]", fmt::join(path, " ")); }

}  // namespace

DocidTrie::DocidTrie() : nodes_(1), leaves_under_(1, 0) {}

DocidTrie DocidTrie::build(const DocidAssignment& assignment, const Vocabulary& vocab) {
  std::vector<std::pair<TokenSeq, std::string>> paths;
  paths.reserve(assignment.size());
  for (const auto& e : assignment.entries()) {
    TokenSeq seq;
    for (const auto& term : e.terms) {
      if (!vocab.contains(term)) {
        throw IntegrityError(fmt::format("docid term \"{}\" of \"{}\" is not in the vocabulary", term, e.doc_id));
      }
      seq.push_back(vocab.id(term));
    }
    paths.emplace_back(std::move(seq), e.doc_id);
  }
  return from_paths(paths);
}

DocidTrie DocidTrie::from_paths(const std::vector<std::pair<TokenSeq, std::string>>& docids) {
  DocidTrie trie;
  auto& nodes = trie.nodes_;
  const auto descend = [&](NodeId at, TokenId tok) -> NodeId {
    auto& kids = nodes[at].children;
    auto it = std::lower_bound(kids.begin(), kids.end(), tok,
                               [](const Edge& e, TokenId t) { return e.token < t; });
    if (it != kids.end() && it->token == tok) return it->node;
    const auto fresh = static_cast<NodeId>(nodes.size());
    kids.insert(it, Edge{tok, fresh});
    Node n;
    n.token = tok;
    n.parent = at;
    nodes.push_back(std::move(n));
    return fresh;
  };

  for (const auto& [path, doc_id] : docids) {
    if (path.empty()) throw IntegrityError(fmt::format("empty docid path for \"{}\"", doc_id));
    NodeId at = kRoot;
    for (TokenId tok : path) {
      if (tok == kEos || tok == kBos) {
        throw IntegrityError(fmt::format("docid path of \"{}\" contains a control token", doc_id));
      }
      at = descend(at, tok);
    }
    if (trie.child(at, kEos)) {
      throw IntegrityError(fmt::format("docid path {} shared by \"{}\" and \"{}\"", describe(path),
                                       trie.leaf_docs_[trie.nodes_[*trie.child(at, kEos)].leaf], doc_id));
    }
    const NodeId leaf = descend(at, kEos);
    nodes[leaf].leaf = static_cast<std::int64_t>(trie.leaf_docs_.size());
    trie.leaf_docs_.push_back(doc_id);
    trie.leaf_nodes_.push_back(leaf);
  }

  trie.leaves_under_.assign(nodes.size(), 0);
  for (NodeId leaf : trie.leaf_nodes_) {
    for (NodeId at = leaf;; at = nodes[at].parent) {
      ++trie.leaves_under_[at];
      if (at == kRoot) break;
    }
  }
  return trie;
}

std::optional<DocidTrie::NodeId> DocidTrie::child(NodeId node, TokenId token) const {
  const auto& kids = nodes_[node].children;
  auto it = std::lower_bound(kids.begin(), kids.end(), token,
                             [](const Edge& e, TokenId t) { return e.token < t; });
  if (it == kids.end() || it->token != token) return std::nullopt;
  return it->node;
}

std::optional<DocidTrie::NodeId> DocidTrie::walk(std::span<const TokenId> path) const {
  NodeId at = kRoot;
  for (TokenId tok : path) {
    auto next = child(at, tok);
    if (!next) return std::nullopt;
    at = *next;
  }
  return at;
}

std::vector<TokenId> DocidTrie::valid_next(std::span<const TokenId> prefix) const {
  auto node = walk(prefix);
  if (!node || leaves_under_[*node] == 0 || is_leaf(*node)) {
    throw ContractError(fmt::format("prefix {} is not a live trie prefix", describe(prefix)));
  }
  std::vector<TokenId> out;
  for (const auto& e : nodes_[*node].children) out.push_back(e.token);
  return out;
}

DocidTrie::NodeId DocidTrie::leaf_node(std::span<const TokenId> path) const {
  std::optional<NodeId> node = walk(path);
  if (node && !is_leaf(*node)) node = child(*node, kEos);
  if (!node || !is_leaf(*node)) {
    throw ContractError(fmt::format("path {} is not a docid leaf", describe(path)));
  }
  return *node;
}

const std::string& DocidTrie::lookup_doc(std::span<const TokenId> path) const {
  return leaf_docs_[static_cast<std::size_t>(nodes_[leaf_node(path)].leaf)];
}

std::size_t DocidTrie::leaf_index(NodeId node) const {
  if (!is_leaf(node)) throw ContractError(fmt::format("node {} is not a leaf", node));
  return static_cast<std::size_t>(nodes_[node].leaf);
}

TokenSeq DocidTrie::path_to(NodeId node) const {
  TokenSeq path;
  for (NodeId at = node; at != kRoot; at = nodes_[at].parent) path.push_back(nodes_[at].token);
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<std::pair<TokenSeq, std::string>> DocidTrie::leaves() const {
  std::vector<std::pair<TokenSeq, std::string>> out;
  out.reserve(leaf_nodes_.size());
  for (std::size_t i = 0; i < leaf_nodes_.size(); ++i) out.emplace_back(path_to(leaf_nodes_[i]), leaf_docs_[i]);
  return out;
}

std::string DocidTrie::dump(const Vocabulary& vocab) const {
  std::vector<std::string> lines;
  for (const auto& [path, doc] : leaves()) {
    lines.push_back(fmt::format("{}\t{}", fmt::join(vocab.decode(path), " "), doc));
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

TrieSession::TrieSession(const DocidTrie& trie) : trie_(&trie), live_(trie.leaves_under_) {}

TrieSession::NodeId TrieSession::live_node(std::span<const TokenId> prefix) const {
  NodeId at = DocidTrie::kRoot;
  for (TokenId tok : prefix) {
    auto next = trie_->child(at, tok);
    if (!next || live_[*next] == 0) {
      throw ContractError(fmt::format("prefix {} is not a live trie prefix", describe(prefix)));
    }
    at = *next;
  }
  if (live_[at] == 0) throw ContractError(fmt::format("prefix {} is not a live trie prefix", describe(prefix)));
  return at;
}

std::vector<TokenId> TrieSession::valid_next(std::span<const TokenId> prefix) const {
  const NodeId at = live_node(prefix);
  if (trie_->is_leaf(at)) {
    throw ContractError(fmt::format("prefix {} is a complete docid", describe(prefix)));
  }
  return live_next(at);
}

std::vector<TokenId> TrieSession::live_next(NodeId node) const {
  std::vector<TokenId> out;
  for (const auto& e : trie_->children(node)) {
    if (live_[e.node] > 0) out.push_back(e.token);
  }
  return out;
}

void TrieSession::remove_leaf(std::span<const TokenId> path) {
  const NodeId leaf = trie_->leaf_node(path);
  if (live_[leaf] == 0) throw ContractError(fmt::format("leaf {} was already removed", describe(path)));
  for (NodeId at = leaf;; at = trie_->nodes_[at].parent) {
    --live_[at];
    if (at == DocidTrie::kRoot) break;
  }
}

}  // namespace keygr
