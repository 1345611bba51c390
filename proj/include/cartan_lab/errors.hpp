#pragma once

#include <stdexcept>
#include <string>

namespace cartan_lab {

/// Malformed input: bad tables, unparsable strings, wrong JSON shape.
class input_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An operation's stated precondition does not hold for the given input.
class precondition_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An enumeration would exceed its configured size guard.
class guard_exceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coefficients or elements from different rings / contexts were combined.
class context_mismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An internal consistency assertion failed. Always a bug or a falsified
/// mathematical claim, never bad input.
class consistency_failure : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace cartan_lab
