#pragma once

#include <stdexcept>
#include <string>

namespace certclose {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed model: undeclared ids, invalid sets, wrong constraint class.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// A configured size cap (realisations, grid points, ...) was exceeded.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

/// Unreadable or syntactically invalid input document.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace certclose
