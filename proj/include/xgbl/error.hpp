// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace xgbl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched dimensions between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A precondition of an operation was violated.
class ContractError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf produced or consumed at an op boundary.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration; `field()` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error("config field '" + field + "': " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractError(what);
}

}  // namespace xgbl
