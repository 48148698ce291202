#pragma once

#include <optional>
#include <utility>

#include "parric/riccati.hpp"

namespace parric {

/// A consecutive run of stages condensed to a single stage.  The condensed
/// input is the state-sized response to whatever cost-to-go the parent later
/// attaches, so B_hat and Q_w_hat coincide and may be singular (they are the
/// same positive semidefinite matrix).
struct ReducedStage {
  MatrixXd A_hat;    // n_x x n_x, closed-loop transition under the preliminary gains
  MatrixXd B_hat;    // n_x x n_x, equals Q_w_hat
  VectorXd a_hat;    // n_x
  MatrixXd Q_x_hat;  // n_x x n_x
  MatrixXd Q_w_hat;  // n_x x n_x
  VectorXd l_x_hat;  // n_x
  double c_hat = 0.0;
};

/// Everything needed to solve the batch again once the parent's boundary data
/// arrives: the stage slice (with the batch's own terminal share), the
/// preliminary sweep run with zero parent cost-to-go, and the coupling gains
/// L[t] that let the cached sweep be reused instead of re-factorized.
struct BatchCache {
  UftocProblem local;          // slice; local.terminal is this batch's own share
  GSolveMode mode = GSolveMode::cholesky;
  std::vector<MatrixXd> P0;    // L+1 preliminary cost-to-go matrices
  std::vector<VectorXd> psi0;  // L+1
  std::vector<double> cbar0;   // L+1
  std::vector<GFactor> G0;     // per stage
  std::vector<MatrixXd> K0;    // per stage
  std::vector<VectorXd> k0;    // per stage
  std::vector<MatrixXd> L0;    // per stage, n_w(t) x n_x
  ReducedStage reduced;
};

/// Condenses stages [begin, end) of p into one ReducedStage via a single
/// backward sweep that simultaneously runs the preliminary factorization
/// (parent cost-to-go seeded to zero, or to `terminal` for the batch that owns
/// the problem's terminal cost) and accumulates the condensed dynamics and
/// input weight.  The outputs satisfy
///   Q_x_hat = P0[0],  l_x_hat = -psi0[0],  c_hat = cbar0[0],
///   A_hat   = product over the slice of (A_t + B_t K0[t]),
///   B_hat   = Q_w_hat = sum over the slice of the G-weighted couplings.
std::pair<ReducedStage, BatchCache> reduce_subproblem(
    const UftocProblem& p, int begin, int end, GSolveMode mode = GSolveMode::cholesky,
    const std::optional<TerminalCost>& terminal = std::nullopt, OpCounts* counts = nullptr);

struct ExpandResult {
  Solution sol;  // local trajectory over the slice; cost includes the parent terminal term
  // Value-function arrays of the re-run path; absent on the cached fast path.
  std::optional<Factorization> f;
  std::optional<BackwardPass> b;
};

/// Solves the batch given the parent's boundary state x_hat and cost-to-go
/// (P_hat, Psi_hat, c_hat) attached at the batch's final state.  By default
/// the slice is re-factorized with the combined terminal data.  use_cache
/// switches to the cached preliminary sweep: only the state-sized condensed
/// input is solved for, the stage inputs follow from the stored gains, and
/// multipliers come from a back-substitution of the stationarity equations.
ExpandResult expand_subproblem(const BatchCache& cache, const VectorXd& x_hat,
                               const MatrixXd& P_hat, const VectorXd& Psi_hat, double c_hat,
                               bool use_cache = false, OpCounts* counts = nullptr);

}  // namespace parric
