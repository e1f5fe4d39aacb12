#pragma once

#include <stdexcept>
#include <string>

namespace romfbk {

/// Raised when an iterative solver (CG, SVD) does not reach its tolerance.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised on malformed or inconsistent artifact files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace romfbk
