#pragma once

#include <stdexcept>
#include <string>

namespace concise {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (e.g. a zero-word answer).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A file could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration; raised before any provider call is made.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace concise
