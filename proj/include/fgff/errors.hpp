#pragma once

#include <stdexcept>
#include <string>

namespace fgff {

struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// naive engine / enumeration budget exceeded
struct CapacityError : std::length_error {
  using std::length_error::length_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RangeError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// a computed value violated a probabilistic or algebraic consistency bound
struct ConsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fgff
