// Copyright (c) 2026 MPCC Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace mpcc {

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct BadDimensions : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct BadArgs : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct MissingBasis : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DegenerateCovariance : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RankDeficient : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TooLarge : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NotPrime : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct CorruptRecord : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BindFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BadImage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct KeyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DatasetMissing : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mpcc
