#include "parric/mhe.hpp"

#include <Eigen/Dense>

#include "parric/errors.hpp"

namespace parric {

NoiseWeightInverse invert_noise_weight(const MatrixXd& Q_w, const MatrixXd& Q_wv,
                                       const MatrixXd& Q_v) {
  const int nw = static_cast<int>(Q_w.rows());
  const int ny = static_cast<int>(Q_v.rows());
  if (Q_w.cols() != nw || Q_v.cols() != ny || Q_wv.rows() != nw || Q_wv.cols() != ny) {
    throw DimensionMismatch("invert_noise_weight: inconsistent block shapes");
  }
  MatrixXd joint(nw + ny, nw + ny);
  joint << Q_w, Q_wv, Q_wv.transpose(), Q_v;
  Eigen::LLT<MatrixXd> llt(symmetrized(joint));
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("joint noise weight is not positive definite");
  }
  MatrixXd inv = llt.solve(MatrixXd::Identity(nw + ny, nw + ny));
  NoiseWeightInverse out;
  out.W = symmetrized(inv.topLeftCorner(nw, nw));
  out.S = inv.topRightCorner(nw, ny);
  out.V = symmetrized(inv.bottomRightCorner(ny, ny));
  return out;
}

UftocProblem mhe_to_uftoc(const MheProblem& m) {
  const int nx = m.n_x;
  const int n = m.n_mhe();
  if (n < 0) throw DimensionMismatch("estimation problem needs at least one stage");

  Eigen::LLT<MatrixXd> prior_llt(symmetrized(m.P0_prior));
  if (prior_llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("prior covariance is not positive definite");
  }

  UftocProblem p;
  p.n_x = nx;
  p.n_w = std::max(nx, m.n_w);
  p.x0 = m.x0_prior;
  p.stages.resize(n + 2);

  // Stage 0 carries the prior: its input is the mismatch x_hat_0 - x0_prior,
  // pushed through identity dynamics and weighted by the inverse prior
  // covariance.
  UftocStage& s0 = p.stages[0];
  s0.Q_x = MatrixXd::Zero(nx, nx);
  s0.Q_xw = MatrixXd::Zero(nx, nx);
  s0.Q_w = symmetrized(prior_llt.solve(MatrixXd::Identity(nx, nx)));
  s0.l_x = VectorXd::Zero(nx);
  s0.l_w = VectorXd::Zero(nx);
  s0.A = MatrixXd::Identity(nx, nx);
  s0.B = MatrixXd::Identity(nx, nx);
  s0.a = VectorXd::Zero(nx);

  for (int k = 0; k <= n; ++k) {
    const MheStage& ms = m.stages[k];
    NoiseWeightInverse inv = invert_noise_weight(ms.Q_w, ms.Q_wv, ms.Q_v);
    VectorXd ytil = ms.y - ms.d - ms.v_nom;

    UftocStage& st = p.stages[k + 1];
    st.Q_x = symmetrized(ms.C.transpose() * inv.V * ms.C);
    st.Q_xw = -ms.C.transpose() * inv.S.transpose();
    st.Q_w = inv.W;
    st.l_x = ms.C.transpose() * (inv.S.transpose() * ms.w_nom - inv.V * ytil);
    st.l_w = inv.S * ytil - inv.W * ms.w_nom;
    st.c = 0.5 * ms.w_nom.dot(inv.W * ms.w_nom) - ms.w_nom.dot(inv.S * ytil) +
           0.5 * ytil.dot(inv.V * ytil);
    st.A = ms.A;
    st.B = ms.B;
    st.a = ms.a;
  }
  p.terminal = TerminalCost::zero(nx);
  return p;
}

MheEstimate extract_mhe_solution(const Solution& s, const MheProblem& m) {
  const int n = m.n_mhe();
  if (static_cast<int>(s.x.size()) != n + 3 || static_cast<int>(s.w.size()) != n + 2) {
    throw DimensionMismatch("extract_mhe_solution: trajectory does not match N_mhe + 2 stages");
  }
  MheEstimate e;
  e.x_hat.resize(n + 2);
  e.w_hat.resize(n + 1);
  e.v_hat.resize(n + 1);
  for (int k = 0; k <= n + 1; ++k) e.x_hat[k] = s.x[k + 1];
  for (int k = 0; k <= n; ++k) {
    e.w_hat[k] = s.w[k + 1];
    e.v_hat[k] = m.stages[k].y - m.stages[k].C * e.x_hat[k] - m.stages[k].d;
  }
  e.prior_mismatch = s.w[0];
  return e;
}

double eval_mhe_objective(const MheProblem& m, const MheEstimate& e) {
  Eigen::LLT<MatrixXd> prior_llt(symmetrized(m.P0_prior));
  if (prior_llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("prior covariance is not positive definite");
  }
  VectorXd dx = e.x_hat[0] - m.x0_prior;
  double j = 0.5 * dx.dot(prior_llt.solve(dx));
  for (int k = 0; k <= m.n_mhe(); ++k) {
    const MheStage& st = m.stages[k];
    VectorXd r(st.Q_w.rows() + st.Q_v.rows());
    r << e.w_hat[k] - st.w_nom, e.v_hat[k] - st.v_nom;
    MatrixXd joint(r.size(), r.size());
    joint << st.Q_w, st.Q_wv, st.Q_wv.transpose(), st.Q_v;
    Eigen::LLT<MatrixXd> llt(symmetrized(joint));
    if (llt.info() != Eigen::Success) {
      throw NotPositiveDefinite("joint noise weight is not positive definite at k=" +
                                std::to_string(k));
    }
    j += 0.5 * r.dot(llt.solve(r));
  }
  return j;
}

}  // namespace parric
