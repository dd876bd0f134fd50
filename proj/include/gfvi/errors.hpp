#pragma once

#include <stdexcept>
#include <string>

namespace gfvi {

/// A caller broke an operation's precondition (bad index, mismatched ground
/// sets, undefined rate).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation was refused because it would exceed a hard size cap
/// (partition enumeration, exact generator enumeration, rejection budget).
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gfvi
