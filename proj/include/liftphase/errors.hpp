#pragma once

#include <stdexcept>
#include <string>

namespace liftphase {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative routine (quadrature, power iteration) missed its tolerance.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// A dense factorization did not converge.
class DecompositionFailure : public Error {
 public:
  using Error::Error;
};

/// Operand shapes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// The synchronization matrix has no usable spectral gap.
class DegenerateSpectrum : public Error {
 public:
  using Error::Error;
};

/// A frequency or shift grid violates a structural requirement.
class GridError : public Error {
 public:
  using Error::Error;
};

/// Reference signal is identically zero on the evaluation grid.
class ZeroSignal : public Error {
 public:
  using Error::Error;
};

/// A serialized document does not match its schema or invariants.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Bad user configuration (unknown names, invalid parameters).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace liftphase
