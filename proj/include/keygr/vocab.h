// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace keygr {

using TokenId = std::uint32_t;
using TokenSeq = std::vector<TokenId>;

inline constexpr TokenId kBos = 0;
inline constexpr TokenId kEos = 1;
inline constexpr TokenId kUnk = 2;

inline constexpr std::string_view kBosToken = "<bos>";
inline constexpr std::string_view kEosToken = "<eos>";
inline constexpr std::string_view kUnkToken = "<unk>";

/// Lowercases ASCII, splits on Unicode whitespace and strips leading and
/// trailing ASCII punctuation from each piece. Interior punctuation survives,
/// so "PD3.1," becomes "pd3.1".
std::vector<std::string> tokenize(std::string_view text);

/// Word-level vocabulary with the reserved ids <bos>=0, <eos>=1, <unk>=2.
class Vocabulary {
 public:
  /// Reserved tokens only.
  Vocabulary();

  /// `tokens` must start with the three reserved tokens in order.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(TokenId id) const;
  /// Id of `token`, or kUnk.
  TokenId id(std::string_view token) const;
  bool contains(std::string_view token) const;

  TokenSeq encode(std::span<const std::string> tokens) const;
  /// Drops <eos>. Throws IntegrityError on out-of-range ids and on <bos>.
  std::vector<std::string> decode(std::span<const TokenId> seq) const;

  /// One token per line, reserved tokens first.
  std::string serialize() const;
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;

  friend Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>&,
                                     const std::vector<std::vector<std::string>>&);
};

/// Reserved tokens, then every distinct docid token, then every distinct
/// query token, each in order of first occurrence.
Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docids,
                            const std::vector<std::vector<std::string>>& queries);

}  // namespace keygr
