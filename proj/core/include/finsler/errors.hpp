#pragma once

#include <stdexcept>
#include <string>

namespace finsler {

/// A primitive or a metric was evaluated outside of its domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A derivative was requested beyond the truncation order of a jet.
class OrderExceeded : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// A matrix that must be inverted is numerically singular.
class SingularMatrix : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace finsler
