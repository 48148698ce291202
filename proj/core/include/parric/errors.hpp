#pragma once

#include <stdexcept>
#include <string>

namespace parric {

/// Base class for every error thrown by this library.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs whose shapes do not line up (matrix blocks, trajectory lengths, ...).
class DimensionMismatch : public SolverError {
 public:
  using SolverError::SolverError;
};

/// A matrix that has to be symmetric positive definite is not (prior or noise
/// covariance, joint noise weight, filter innovation covariance).
class NotPositiveDefinite : public SolverError {
 public:
  using SolverError::SolverError;
};

/// The input-block Riccati matrix G_{t+1} lost positive definiteness.  The
/// strict factorization path refuses to regularize; the stage index says where.
class IndefiniteG : public SolverError {
 public:
  IndefiniteG(int stage, const std::string& what) : SolverError(what), stage(stage) {}
  int stage;
};

/// The assembled saddle-point system is numerically singular.
class SingularKkt : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Smoothing requested on a model with cross-correlated process and
/// measurement noise, which the filter/smoother factorization cannot express.
class UnsupportedCrossCovariance : public SolverError {
 public:
  using SolverError::SolverError;
};

/// A reduced-level pseudo-solve met a right-hand side with a component outside
/// the numerical range of the (singular, positive semidefinite) matrix.
class InconsistentReducedSystem : public SolverError {
 public:
  using SolverError::SolverError;
};

/// A subproblem's final state drifted away from the boundary state its parent
/// handed down.
class BoundaryMismatch : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Problem/solution file could not be parsed or fails the schema.
class ParseError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace parric
