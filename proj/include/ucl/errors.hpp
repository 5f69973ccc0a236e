#pragma once

#include <stdexcept>
#include <string>

namespace ucl {

/// Invalid or inconsistent experiment configuration (bad JSON, unknown keys,
/// out-of-range parameters, mismatched prior/policy combinations).
struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure inside the inference machinery (lost positive
/// definiteness, covariance/precision disagreement past tolerance).
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ucl
