// Exception hierarchy shared by all modules. Every failure mode that callers
// are expected to handle gets its own type; anything else is a plain Error.

#pragma once

#include <stdexcept>
#include <string>

namespace vem {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid or degenerate geometry (zero-length edge, self-intersection, ...)
struct GeometryError : Error {
  using Error::Error;
};

/// Mesh-level consistency failure (non-conforming edges, orientation, ...)
struct MeshError : Error {
  using Error::Error;
};

/// Gram/mass matrix too ill-conditioned to orthonormalize reliably
struct ConditioningError : Error {
  using Error::Error;
};

/// Linear solver breakdown or residual above tolerance
struct SolveError : Error {
  using Error::Error;
};

/// File format / parsing problems
struct IoError : Error {
  using Error::Error;
};

} // namespace vem
