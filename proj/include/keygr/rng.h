// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace keygr {

/// 64-bit FNV-1a. Used to fold string identifiers into RNG streams.
std::uint64_t fnv1a64(std::string_view bytes);

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Portable seeded generator.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Distributions are implemented here rather than taken from
/// <random> because the standard distributions are not reproducible across
/// library implementations:
///   uniform()  = (next() >> 11) * 2^-53
///   below(n)   = rejection sampling on next() over the largest multiple of n
/// Independent streams are derived with derive(), which chains mix64 over
/// the seed and each key.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng derive(std::uint64_t seed, std::uint64_t key);
  static Rng derive(std::uint64_t seed, std::uint64_t key1, std::uint64_t key2);

  std::uint64_t next() { return engine_(); }
  /// Uniform double in [0, 1).
  double uniform();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace keygr
