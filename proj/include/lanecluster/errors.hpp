#pragma once

#include <stdexcept>
#include <string>

namespace lanecluster {

/// Malformed input: bad file schema, inconsistent shapes, out-of-range values.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure at runtime: divergent descent, impossible responsibility row.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lanecluster
