// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "keygr/docid.h"
#include "keygr/vocab.h"

namespace keygr {

/// Immutable prefix tree over encoded docids. Every root-to-leaf path spells
/// a docid followed by <eos> and carries exactly one document id.
///
/// Decoding never mutates the trie; leaf removal happens on a TrieSession.
/// Paths given to lookup_doc / TrieSession::remove_leaf may include or omit
/// the terminal <eos>.
class DocidTrie {
 public:
  using NodeId = std::uint32_t;
  static constexpr NodeId kRoot = 0;

  struct Edge {
    TokenId token;
    NodeId node;
  };

  DocidTrie();

  /// Throws IntegrityError if a docid term is missing from the vocabulary
  /// or two documents encode to the same path.
  static DocidTrie build(const DocidAssignment& assignment, const Vocabulary& vocab);
  /// Paths exclude <eos>; same errors as build().
  static DocidTrie from_paths(const std::vector<std::pair<TokenSeq, std::string>>& docids);

  std::size_t leaf_count() const { return leaf_docs_.size(); }
  std::size_t node_count() const { return nodes_.size(); }

  /// Tokens extending `prefix` toward at least one leaf. Throws
  /// ContractError for prefixes that are not in the trie.
  std::vector<TokenId> valid_next(std::span<const TokenId> prefix) const;
  /// Throws ContractError unless `path` ends at a leaf.
  const std::string& lookup_doc(std::span<const TokenId> path) const;

  std::span<const Edge> children(NodeId node) const { return nodes_[node].children; }
  std::optional<NodeId> child(NodeId node, TokenId token) const;
  /// Node reached by following `path`, ignoring liveness.
  std::optional<NodeId> walk(std::span<const TokenId> path) const;
  bool is_leaf(NodeId node) const { return nodes_[node].leaf >= 0; }
  /// Number of leaves below (or at) `node`.
  std::uint32_t leaves_under(NodeId node) const { return leaves_under_[node]; }
  /// Index into leaves() for a leaf node.
  std::size_t leaf_index(NodeId node) const;

  /// (path including <eos>, doc id) for every leaf, in insertion order.
  std::vector<std::pair<TokenSeq, std::string>> leaves() const;
  const std::string& leaf_doc(std::size_t index) const { return leaf_docs_[index]; }

  /// Sorted `docid<TAB>doc_id` lines.
  std::string dump(const Vocabulary& vocab) const;

 private:
  struct Node {
    TokenId token = kBos;
    NodeId parent = 0;
    std::vector<Edge> children;  // sorted by token
    std::int64_t leaf = -1;
  };

  NodeId leaf_node(std::span<const TokenId> path) const;
  TokenSeq path_to(NodeId node) const;

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> leaves_under_;
  std::vector<std::string> leaf_docs_;
  std::vector<NodeId> leaf_nodes_;

  friend class TrieSession;
};

/// Private mutable view of a shared DocidTrie for one decoding session.
/// Removed leaves are marked dead and every ancestor whose live count drops
/// to zero disappears from valid_next().
class TrieSession {
 public:
  using NodeId = DocidTrie::NodeId;

  explicit TrieSession(const DocidTrie& trie);

  const DocidTrie& trie() const { return *trie_; }
  std::size_t live_leaf_count() const { return live_[DocidTrie::kRoot]; }
  bool empty() const { return live_leaf_count() == 0; }
  bool is_live(NodeId node) const { return live_[node] > 0; }

  /// Live node reached by `prefix`; throws ContractError if dead or unknown.
  NodeId live_node(std::span<const TokenId> prefix) const;
  /// Live continuations of `prefix`, never empty. Throws ContractError for
  /// dead or unknown prefixes.
  std::vector<TokenId> valid_next(std::span<const TokenId> prefix) const;
  /// Live continuations of `node`, possibly empty.
  std::vector<TokenId> live_next(NodeId node) const;

  /// Throws ContractError unless `path` is a live leaf.
  void remove_leaf(std::span<const TokenId> path);

 private:
  const DocidTrie* trie_;
  std::vector<std::uint32_t> live_;
};

}  // namespace keygr
