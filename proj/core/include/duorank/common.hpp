#pragma once

#include <stdexcept>
#include <string>

namespace duorank {

/// Bad input: malformed files, broken invariants, rejected configs.
/// The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Runtime failure (I/O, non-finite values, aborted stages). Exit code 1.
class RuntimeError : public std::runtime_error {
 public:
  explicit RuntimeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace duorank
