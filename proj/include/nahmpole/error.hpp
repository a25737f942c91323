// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace nahmpole {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad configuration, malformed data, inconsistent domain.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A checked invariant (monotonicity, bracketing, positivity) was violated.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace nahmpole
