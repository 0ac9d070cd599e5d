#pragma once

#include <stdexcept>
#include <string>

namespace annotator {

// Base for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input files (ragged CoNLL lines, bad binary records, bad CSV).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a domain invariant (bad BIO, dim mismatch).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Bad run configuration (fractions out of range, m > x, unknown provider).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Remote endpoint failed after bounded retries.
class ProviderError : public Error {
 public:
  ProviderError(const std::string& msg, int attempts)
      : Error(msg), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_ = 0;
};

// A provider returned data that contradicts its own contract (wrong dim,
// empty body, fingerprint mismatch).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Predicted/gold corpora that cannot be compared (id or length mismatch).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

}  // namespace annotator
