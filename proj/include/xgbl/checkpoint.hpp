// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xgbl/boosting.hpp"

namespace xgbl {

class CheckpointError : public Error {
 public:
  using Error::Error;
};
class BadMagicError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class VersionMismatchError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class TruncatedError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

inline constexpr std::uint16_t kCheckpointVersion = 1;

// Layout (little-endian): "XGBL", u16 version, u8 precision, u8 reserved,
// u64 body length, then the body: config text, model block, optional live
// and origin adapter sets, trainer counters and extra rng states. Weights
// and adapters are f64 or f32 per the precision byte.
struct Checkpoint {
  Precision precision = Precision::F64;
  std::string config_text;
  ModelSpec model;
  TrainerState state;
  std::vector<std::uint64_t> rng_states;

  bool operator==(const Checkpoint&) const;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck);
// Throws BadMagicError, VersionMismatchError or TruncatedError; never
// returns a partial checkpoint.
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace xgbl
