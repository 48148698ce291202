#pragma once

#include <vector>

#include "parric/problem.hpp"

namespace parric {

/// Blocks of the inverse of the joint noise weight [Q_w Q_wv; Q_wv' Q_v]:
/// [W S; S' V] with W (n_w x n_w), S (n_w x n_y), V (n_y x n_y).
struct NoiseWeightInverse {
  MatrixXd W;
  MatrixXd S;
  MatrixXd V;
};

/// Inverts the joint weight through one Cholesky factorization; throws
/// NotPositiveDefinite when the joint block is not SPD.
NoiseWeightInverse invert_noise_weight(const MatrixXd& Q_w, const MatrixXd& Q_wv,
                                       const MatrixXd& Q_v);

/// Rewrites the estimation problem as an equality-constrained LQ problem over
/// N = N_mhe + 2 stages by eliminating the measurement noise v_k and turning
/// the prior into stage 0, whose input is the state-sized prior mismatch
/// (hence that stage is wider than the others when n_w != n_x).  The LQ
/// minimizer maps stage-by-stage onto the estimation minimizer, with matching
/// objective values.
UftocProblem mhe_to_uftoc(const MheProblem& m);

struct MheEstimate {
  std::vector<VectorXd> x_hat;  // k = 0..N_mhe+1 (last entry is the one-step prediction)
  std::vector<VectorXd> w_hat;  // k = 0..N_mhe
  std::vector<VectorXd> v_hat;  // k = 0..N_mhe, recovered as y_k - C_k x_hat_k - d_k
  VectorXd prior_mismatch;      // x_hat[0] - x0_prior
};

/// Maps an LQ solution of mhe_to_uftoc(m) back onto estimation variables.
MheEstimate extract_mhe_solution(const Solution& s, const MheProblem& m);

/// Original-form objective value at an estimate (prior term plus the jointly
/// weighted noise deviations).
double eval_mhe_objective(const MheProblem& m, const MheEstimate& e);

}  // namespace parric
