#pragma once

#include <stdexcept>
#include <string>

namespace dgqmc {

/// Invalid input, configuration, or model-assumption violation (exit code 1).
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: factorization breakdown, residual blow-up,
/// nonpositive coefficient sample (exit code 2).
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// File-system or parse failure (exit code 3).
class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dgqmc
