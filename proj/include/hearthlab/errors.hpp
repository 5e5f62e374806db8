#pragma once

#include <stdexcept>
#include <string>

namespace hearth {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedActionError : public Error {
 public:
  using Error::Error;
};

class GroundingError : public Error {
 public:
  using Error::Error;
};

class RenderError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ProviderError : public Error {
 public:
  using Error::Error;
};

// Activity-file problems: malformed JSON, unknown kinds, failed validation.
class LoadError : public Error {
 public:
  using Error::Error;
};

// Bad command line, config file or environment value.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace hearth
