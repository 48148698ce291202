#pragma once

#include <vector>

#include "parric/problem.hpp"

namespace parric {

/// Reference solver: assembles the full first-order optimality system over
/// (x, w, lambda) as one dense symmetric matrix and solves it with a general
/// direct factorization.  No stage structure is exploited on purpose, so the
/// result is an independent cross-check for the structured solvers.  Intended
/// for small horizons (the system is quadratic in N); throws SingularKkt when
/// the assembled matrix is numerically singular.
Solution dense_kkt_solve(const UftocProblem& p);

/// Fixed-interval smoother for the estimation model: forward Kalman filter
/// with Joseph-form covariance updates, then a backward pass rolling the
/// smoothed mean.  Returns the smoothed states x_hat[0..N_mhe].  Requires
/// uncorrelated process and measurement noise (Q_wv == 0 exactly), otherwise
/// UnsupportedCrossCovariance; covariance factorization failures raise
/// NotPositiveDefinite.
std::vector<VectorXd> rts_smooth(const MheProblem& m);

}  // namespace parric
