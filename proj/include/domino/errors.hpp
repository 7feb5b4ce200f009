#pragma once

#include <stdexcept>
#include <string>

namespace domino {

// A caller violated a documented precondition (bad shape, odd width, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File was readable but is not a supported image layout.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No perfect matching exists over the permitted entries.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite value.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested problem size is beyond what an exact routine supports.
class SizeLimitError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace domino
