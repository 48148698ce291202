#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "parric/numeric.hpp"

namespace parric {

/// One stage of the equality-constrained LQ problem
///
///   minimize  sum_t  1/2 [x_t; w_t]' [Q_x  Q_xw; Q_xw' Q_w] [x_t; w_t]
///                    + l_x' x_t + l_w' w_t + c_t
///             + 1/2 x_N' Qterm x_N + lterm' x_N + cterm
///   subject to x_0 = x0,  x_{t+1} = A_t x_t + B_t w_t + a_t.
struct UftocStage {
  MatrixXd Q_x;   // n_x x n_x
  MatrixXd Q_xw;  // n_x x n_w
  MatrixXd Q_w;   // n_w x n_w
  VectorXd l_x;   // n_x
  VectorXd l_w;   // n_w
  double c = 0.0;
  MatrixXd A;  // n_x x n_x
  MatrixXd B;  // n_x x n_w
  VectorXd a;  // n_x
};

struct TerminalCost {
  MatrixXd Q_x;  // n_x x n_x
  VectorXd l;    // n_x
  double c = 0.0;

  static TerminalCost zero(int n_x) {
    return {MatrixXd::Zero(n_x, n_x), VectorXd::Zero(n_x), 0.0};
  }
};

struct UftocProblem {
  int n_x = 0;
  // Widest stage input.  Problems read from files are uniform; the estimation
  // transform produces one wider prior stage, so per-stage widths follow
  // B.cols() and n_w is their maximum.
  int n_w = 0;
  VectorXd x0;
  std::vector<UftocStage> stages;  // size N
  TerminalCost terminal;

  int horizon() const { return static_cast<int>(stages.size()); }
  int input_dim(int t) const { return static_cast<int>(stages[t].B.cols()); }
};

/// One stage of the estimation model
///   x_{k+1} = A_k x_k + B_k w_k + a_k
///   y_k     = C_k x_k + v_k + d_k
/// with nominal noise (w_nom, v_nom) and joint weight
/// [Q_w Q_wv; Q_wv' Q_v] whose inverse penalizes the deviations.
struct MheStage {
  MatrixXd A;      // n_x x n_x
  MatrixXd B;      // n_x x n_w
  MatrixXd C;      // n_y x n_x
  VectorXd a;      // n_x
  VectorXd d;      // n_y
  VectorXd y;      // n_y, measured output
  VectorXd w_nom;  // n_w
  VectorXd v_nom;  // n_y
  MatrixXd Q_w;    // n_w x n_w
  MatrixXd Q_wv;   // n_w x n_y
  MatrixXd Q_v;    // n_y x n_y
};

struct MheProblem {
  int n_x = 0;
  int n_w = 0;
  int n_y = 0;
  VectorXd x0_prior;   // prior mean
  MatrixXd P0_prior;   // prior covariance, SPD
  std::vector<MheStage> stages;  // size N_mhe + 1, indices k = 0..N_mhe

  int n_mhe() const { return static_cast<int>(stages.size()) - 1; }
};

/// Primal/dual trajectory of an LQ solve.  lambda_t multiplies the dynamics
/// constraint reaching x_t; produced by the Riccati passes as
/// lambda_t = P_t x_t - Psi_t.
struct Solution {
  std::vector<VectorXd> x;       // N + 1
  std::vector<VectorXd> w;       // N
  std::vector<VectorXd> lambda;  // N + 1
  double cost = 0.0;
};

enum class Severity { warning, error };

struct Issue {
  Severity severity;
  std::string message;
};

struct ValidationReport {
  bool ok = true;  // true iff no issue with severity == error
  std::vector<Issue> issues;

  void add(Severity sev, std::string msg) {
    if (sev == Severity::error) ok = false;
    issues.push_back({sev, std::move(msg)});
  }
};

/// Shape checks, symmetry beyond 1e-10 relative (warning), and positive
/// semidefiniteness of every stage weight block and the terminal weight
/// (smallest eigenvalue below -1e-10 * ||Q||_F is an error).
ValidationReport validate_uftoc(const UftocProblem& p);

/// Objective value at an arbitrary trajectory; throws DimensionMismatch.
double eval_objective(const UftocProblem& p, const std::vector<VectorXd>& x,
                      const std::vector<VectorXd>& w);

struct KktResidual {
  double stationarity_norm = 0.0;  // inf-norm over all gradient blocks
  double primal_norm = 0.0;        // inf-norm over constraint residuals
};

/// First-order optimality residuals of (x, w, lambda).  The multipliers enter
/// the Lagrangian as
///   L = J + lambda_0'(x0 - x_0)
///         + sum_t lambda_{t+1}'(A_t x_t + B_t w_t + a_t - x_{t+1})
/// which is the convention the Riccati recovery lambda_t = P_t x_t - Psi_t
/// satisfies.
KktResidual kkt_residual(const UftocProblem& p, const Solution& s);

}  // namespace parric
