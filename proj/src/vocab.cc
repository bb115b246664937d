// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#include "keygr/vocab.h"

#include <fmt/format.h>

#include <cctype>
#include <sstream>

#include "keygr/corpus.h"
#include "keygr/error.h"

namespace keygr {

namespace {

bool is_reserved(std::string_view t) {
  return t == kBosToken || t == kEosToken || t == kUnkToken;
}

// Length in bytes of a Unicode whitespace code point starting at `i`, or 0.
std::size_t whitespace_at(std::string_view s, std::size_t i) {
  const auto b = [&](std::size_t k) -> unsigned {
    return k < s.size() ? static_cast<unsigned char>(s[k]) : 0u;
  };
  const unsigned c0 = b(i);
  if (c0 < 0x80) return std::isspace(static_cast<int>(c0)) ? 1 : 0;
  if (c0 == 0xC2 && (b(i + 1) == 0x85 || b(i + 1) == 0xA0)) return 2;
  if (c0 == 0xE1 && b(i + 1) == 0x9A && b(i + 2) == 0x80) return 3;  // U+1680
  if (c0 == 0xE2 && b(i + 1) == 0x80) {
    const unsigned c2 = b(i + 2);
    // U+2000..U+200A, U+2028, U+2029, U+202F
    if ((c2 >= 0x80 && c2 <= 0x8A) || c2 == 0xA8 || c2 == 0xA9 || c2 == 0xAF) return 3;
  }
  if (c0 == 0xE2 && b(i + 1) == 0x81 && b(i + 2) == 0x9F) return 3;  // U+205F
  if (c0 == 0xE3 && b(i + 1) == 0x80 && b(i + 2) == 0x80) return 3;  // U+3000
  return 0;
}

bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u);
}

void flush(std::string& piece, std::vector<std::string>& out) {
  std::size_t lo = 0, hi = piece.size();
  while (lo < hi && is_ascii_punct(piece[lo])) ++lo;
  while (hi > lo && is_ascii_punct(piece[hi - 1])) --hi;
  if (hi > lo) out.push_back(piece.substr(lo, hi - lo));
  piece.clear();
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string piece;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::size_t w = whitespace_at(text, i)) {
      flush(piece, out);
      i += w;
      continue;
    }
    const auto c = static_cast<unsigned char>(text[i]);
    piece.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : text[i]);
    ++i;
  }
  flush(piece, out);
  return out;
}

Vocabulary::Vocabulary() {
  add(std::string(kBosToken));
  add(std::string(kEosToken));
  add(std::string(kUnkToken));
}

void Vocabulary::add(std::string token) {
  if (ids_.count(token)) return;
  ids_.emplace(token, static_cast<TokenId>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 3 || tokens[kBos] != kBosToken || tokens[kEos] != kEosToken ||
      tokens[kUnk] != kUnkToken) {
    throw IntegrityError("vocabulary must start with <bos>, <eos>, <unk>");
  }
  Vocabulary v;
  for (std::size_t i = 3; i < tokens.size(); ++i) {
    if (tokens[i].empty() || is_reserved(tokens[i]) || v.contains(tokens[i])) {
      throw IntegrityError(fmt::format("vocabulary line {}: empty, reserved or duplicate token", i + 1));
    }
    v.add(std::move(tokens[i]));
  }
  return v;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= tokens_.size()) {
    throw IntegrityError(fmt::format("token id {} out of range (|V|={})", id, tokens_.size()));
  }
  return tokens_[id];
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return ids_.count(std::string(token)) > 0;
}

TokenSeq Vocabulary::encode(std::span<const std::string> tokens) const {
  TokenSeq seq;
  seq.reserve(tokens.size());
  for (const auto& t : tokens) seq.push_back(id(t));
  return seq;
}

std::vector<std::string> Vocabulary::decode(std::span<const TokenId> seq) const {
  std::vector<std::string> out;
  out.reserve(seq.size());
  for (TokenId id : seq) {
    if (id == kEos) continue;
    if (id == kBos) throw IntegrityError("token sequence contains <bos>");
    out.push_back(token(id));
  }
  return out;
}

std::string Vocabulary::serialize() const {
  std::string out;
  for (const auto& t : tokens_) {
    out += t;
    out += '\n';
  }
  return out;
}

void Vocabulary::save(const std::filesystem::path& path) const { write_file(path, serialize()); }

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return from_tokens(std::move(tokens));
}

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docids,
                            const std::vector<std::vector<std::string>>& queries) {
  Vocabulary v;
  for (const auto* group : {&docids, &queries}) {
    for (const auto& seq : *group) {
      for (const auto& t : seq) {
        if (t.empty()) continue;
        if (is_reserved(t)) throw IntegrityError(fmt::format("reserved token \"{}\" in input", t));
        v.add(t);
      }
    }
  }
  return v;
}

}  // namespace keygr
