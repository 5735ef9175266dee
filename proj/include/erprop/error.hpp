#pragma once

#include <stdexcept>
#include <string>

namespace erprop {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input files: bad rows, duplicate ids, empty files.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A value or object that violates a documented precondition or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The external embedding service failed or returned something unusable.
class EmbeddingProviderError : public Error {
 public:
  using Error::Error;
};

/// Oracle transport failed after all retries.
class OracleTransportError : public Error {
 public:
  using Error::Error;
};

/// Oracle reply did not follow the "<number>" / "NONE" contract.
class ResponseParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace erprop
