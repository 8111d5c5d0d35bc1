#pragma once

#include <stdexcept>
#include <string>

namespace vifuse {

// Unreadable/unwritable files and unsupported formats.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// A loss or gradient evaluation produced a non-finite value.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Contract violations (dimension mismatch, parameter out of range) are
// reported as std::invalid_argument.

}  // namespace vifuse
