#pragma once

#include <stdexcept>
#include <string>

namespace crows {

inline constexpr const char* kVersion = "crows 0.1.0";

/// Base class for all errors raised by this library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller supplied an out-of-domain parameter (bad n/k/c, bad flag value,
/// violated precondition). CLI maps this to exit code 2.
class param_error : public error {
 public:
  using error::error;
};

/// Input data is malformed or inconsistent (bad CSV, invalid design entries,
/// mismatched lengths read from files). CLI maps this to exit code 3.
class data_error : public error {
 public:
  using error::error;
};

}  // namespace crows
