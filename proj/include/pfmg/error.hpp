// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PFMG_ERROR_HPP
#define PFMG_ERROR_HPP

#include <stdexcept>
#include <string>

namespace pfmg {

/// Base of every error the library throws. Catch this to handle them all.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes of operands are incompatible.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A setting is invalid (even kernel size, zero counts, unknown toggle).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An API precondition was violated (non-scalar loss, reused tape, T < 2).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A file does not follow the binary or JSON layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A file is well formed but disagrees with its manifest or index.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Payload values are unusable (NaN, Inf).
class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A label lies outside its valid range or violates the label invariants.
class LabelError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace pfmg

#endif  // PFMG_ERROR_HPP
