#pragma once

#include <stdexcept>
#include <string>

namespace csemb {

/// Caller supplied something outside an operation's domain.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A file or text stream could not be read or did not follow its format.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown, e.g. the Legendre recursion overflowing because the
/// spectrum was not scaled into [-1, 1].
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense oracle asked to handle a matrix larger than its configured cap.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace csemb
