#pragma once

#include <stdexcept>
#include <string>

namespace densewarp {

/// Base class for every anticipated failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two rasters that must share a shape do not.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A file or in-memory document does not match its declared format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a path failed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A parameter block violates its invariants.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::string shape_string(int w, int h) {
  return std::to_string(w) + "x" + std::to_string(h);
}

template <class A, class B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw DimensionError(std::string(what) + ": shape mismatch " +
                         shape_string(a.width(), a.height()) + " vs " +
                         shape_string(b.width(), b.height()));
  }
}

}  // namespace detail
}  // namespace densewarp
