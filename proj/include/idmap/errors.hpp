#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace idmap {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid domain object or argument; the message names the offending field.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; the message carries "path:line:" when known.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what) {}
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what) {}
};

/// Intensity is undefined because the record (or band) carries no energy.
class QuiescentError : public Error {
 public:
  using Error::Error;
};

/// Requested frequency band is not covered by the spectrum grid.
class CoverageError : public Error {
 public:
  using Error::Error;
};

}  // namespace idmap
