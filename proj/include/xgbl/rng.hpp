// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "xgbl/tensor.hpp"

namespace xgbl {

// SplitMix64. The whole generator state is one 64-bit word, so it can be
// checkpointed and restored exactly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept;
  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  // Standard normal via Box-Muller; consumes two uniforms, keeps no cache.
  double gaussian() noexcept;
  // Unbiased integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  // Independent child stream keyed by `key`. Does not advance this stream.
  Rng split(std::uint64_t key) const noexcept;

  std::uint64_t state() const noexcept { return state_; }
  void set_state(std::uint64_t s) noexcept { state_ = s; }

 private:
  std::uint64_t state_;
};

Tensor prng_uniform(Rng& rng, const Shape& shape);
Tensor prng_gaussian(Rng& rng, const Shape& shape, double stddev = 1.0);

}  // namespace xgbl
