#pragma once

#include <stdexcept>
#include <string>

namespace dualarm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed document. `locus` names the offending line or field path.
class ParseError : public Error {
 public:
  ParseError(const std::string& locus, const std::string& what)
      : Error(locus.empty() ? what : locus + ": " + what), locus_(locus) {}
  const std::string& locus() const noexcept { return locus_; }

 private:
  std::string locus_;
};

/// A domain invariant does not hold; the message names the failing field.
class InvariantError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace dualarm
