// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "xgbl/log.hpp"

#include <iostream>

namespace xgbl {

namespace {

WarningHandler& handler() {
  static WarningHandler h = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
  return h;
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler h) {
  WarningHandler old = std::move(handler());
  handler() = std::move(h);
  return old;
}

void warn(std::string_view message) {
  if (handler()) handler()(message);
}

}  // namespace xgbl
