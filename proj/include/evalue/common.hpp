#pragma once

#include <stdexcept>
#include <string>

namespace evalue {

// Base for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input: bad pedigree structure, dimension mismatch, file parse
// failures, out-of-domain values.
struct ValidationError : Error {
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Numerical failure: rank deficiency, non-convergence treated as fatal,
// degenerate bootstrap reference.
struct NumericalError : Error {
  explicit NumericalError(const std::string& msg) : Error(msg) {}
};

}  // namespace evalue
