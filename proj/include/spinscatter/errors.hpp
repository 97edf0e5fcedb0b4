#pragma once

#include <stdexcept>
#include <string>

namespace spinscatter {

// Caller-supplied data violates a precondition (bad dimension, k <= 0, ...).
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// An internal invariant failed (singular system for a Hermitian potential,
// probability leak beyond tolerance, ...). Indicates a bug, not bad input.
class InternalFault : public std::logic_error {
 public:
  explicit InternalFault(const std::string& what) : std::logic_error(what) {}
};

}  // namespace spinscatter
