#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "parric/problem.hpp"

namespace parric {

/// How the input-block systems G_{t+1} X = R are solved.
///  - cholesky: strict LLT, throws IndefiniteG when G is not positive
///    definite.  Used on original-level problems, where losing definiteness
///    means the model violates its convexity assumption.
///  - eigen_psd: symmetric eigendecomposition pseudo-solve with relative
///    cutoff 1e-12 * lambda_max.  Used on reduced-level problems, whose G can
///    be singular positive semidefinite by construction.  A right-hand side
///    with a component outside the numerical range (relative norm > 1e-8)
///    raises InconsistentReducedSystem.
enum class GSolveMode { cholesky, eigen_psd };

class GFactor {
 public:
  GFactor() = default;
  /// Factorizes G (symmetrized first); stage is only used in error messages.
  static GFactor factor(const MatrixXd& g, GSolveMode mode, int stage);

  MatrixXd solve(const MatrixXd& rhs) const;
  VectorXd solve(const VectorXd& rhs) const;
  const MatrixXd& matrix() const { return g_; }

 private:
  GSolveMode mode_ = GSolveMode::cholesky;
  MatrixXd g_;
  Eigen::LLT<MatrixXd> llt_;
  MatrixXd vecs_;
  VectorXd inv_vals_;  // pseudo-inverted eigenvalues, zeros below the cutoff
};

/// Stage-loop counters, one increment per stage processed.  Each pass keeps
/// its own field so complexity tests can pin exact counts.
struct OpCounts {
  std::int64_t factorize_stages = 0;
  std::int64_t backward_stages = 0;
  std::int64_t forward_stages = 0;
  std::int64_t reduce_stages = 0;
};

/// Cost-to-go factorization: P[t] for t = 0..N, and per stage t the blocks
/// F[t] = F_{t+1}, H[t] = H_{t+1}, factored G[t] = G_{t+1}, gain K[t] = K_{t+1}.
struct Factorization {
  std::vector<MatrixXd> P;
  std::vector<MatrixXd> F;
  std::vector<MatrixXd> H;
  std::vector<GFactor> G;
  std::vector<MatrixXd> K;
};

/// Backward solution of the linear part: psi[t], cbar[t] for t = 0..N and the
/// feedforward k[t] = k_{t+1} per stage.
struct BackwardPass {
  std::vector<VectorXd> psi;
  std::vector<VectorXd> k;
  std::vector<double> cbar;
};

struct BackwardSeed {
  VectorXd psi;
  double cbar = 0.0;
};

/// Backward factorization sweep.  terminal_P overrides Q_{x,N} as the seed
/// P_N; subproblem solves inject their parent's cost-to-go through it.
Factorization factorize(const UftocProblem& p, GSolveMode mode = GSolveMode::cholesky,
                        const std::optional<MatrixXd>& terminal_P = std::nullopt,
                        OpCounts* counts = nullptr);

/// Backward linear sweep; seed overrides (Psi_N, cbar_N) = (-l_N, c_N).
BackwardPass backward(const UftocProblem& p, const Factorization& f,
                      const std::optional<BackwardSeed>& seed = std::nullopt,
                      OpCounts* counts = nullptr);

/// Forward rollout from x0bar under w_t = k_{t+1} + K_{t+1} x_t, including the
/// multiplier recovery lambda_t = P_t x_t - Psi_t.  The returned cost is the
/// value-function identity 1/2 x0bar'P_0 x0bar - Psi_0'x0bar + cbar_0.
Solution forward(const UftocProblem& p, const Factorization& f, const BackwardPass& b,
                 const VectorXd& x0bar, OpCounts* counts = nullptr);

/// factorize + backward + forward from p.x0.
Solution solve_serial(const UftocProblem& p, GSolveMode mode = GSolveMode::cholesky,
                      OpCounts* counts = nullptr);

}  // namespace parric
