#pragma once

#include <stdexcept>
#include <string>

namespace boxpolicy {

// Malformed input data (CSV contents, misaligned vectors, bad labels).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated a documented precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A solver ran out of its budget before producing any usable answer.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace boxpolicy
