#pragma once

#include <stdexcept>
#include <string>

namespace latticelab {

/// Rejected input: malformed files, violated preconditions, bad parameters.
/// The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A stored certificate, witness or internal cross-check did not hold.
/// The CLI maps this to exit code 3.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace latticelab
