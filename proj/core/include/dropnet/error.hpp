#pragma once

#include <stdexcept>

namespace dropnet {

/// Base class of every exception thrown by dropnet.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix dimensions that do not fit together.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A scalar argument outside its admissible range.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Exact enumeration requested for more droppable nodes than the cap allows.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Training loss exceeded the divergence guard.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Malformed serialized network, distribution or config.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A file that could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dropnet
