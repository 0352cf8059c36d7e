// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "xgbl/rng.hpp"

#include <cmath>
#include <numbers>

namespace xgbl {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t Rng::next_u64() noexcept {
  state_ += kGolden;
  return mix64(state_);
}

double Rng::uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::gaussian() noexcept {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
  require(n > 0, "Rng::below requires n > 0");
  // Rejection keeps the result unbiased for any n.
  const std::uint64_t limit = (~std::uint64_t{0} / n) * n;
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % n;
}

Rng Rng::split(std::uint64_t key) const noexcept {
  return Rng(mix64(state_ ^ mix64((key + 1) * kGolden)));
}

Tensor prng_uniform(Rng& rng, const Shape& shape) {
  Tensor t(shape);
  for (auto& v : t.data()) v = rng.uniform();
  return t;
}

Tensor prng_gaussian(Rng& rng, const Shape& shape, double stddev) {
  Tensor t(shape);
  for (auto& v : t.data()) v = stddev * rng.gaussian();
  return t;
}

}  // namespace xgbl
