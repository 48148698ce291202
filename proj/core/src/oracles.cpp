#include "parric/oracles.hpp"

#include <Eigen/Dense>

#include "parric/errors.hpp"

namespace parric {

Solution dense_kkt_solve(const UftocProblem& p) {
  const int n = p.horizon();
  const int nx = p.n_x;
  const int n_states = (n + 1) * nx;
  std::vector<int> woff(n + 1, 0);
  for (int t = 0; t < n; ++t) woff[t + 1] = woff[t] + p.input_dim(t);
  const int n_inputs = woff[n];
  const int dim = 2 * n_states + n_inputs;

  // Variable layout: x_0..x_N, w_0..w_{N-1}, lambda_0..lambda_N.
  auto xi = [&](int t) { return t * nx; };
  auto wi = [&](int t) { return n_states + woff[t]; };
  auto li = [&](int t) { return n_states + n_inputs + t * nx; };

  MatrixXd kkt = MatrixXd::Zero(dim, dim);
  VectorXd rhs = VectorXd::Zero(dim);

  for (int t = 0; t < n; ++t) {
    const UftocStage& s = p.stages[t];
    const int nw = p.input_dim(t);
    kkt.block(xi(t), xi(t), nx, nx) += s.Q_x;
    kkt.block(xi(t), wi(t), nx, nw) += s.Q_xw;
    kkt.block(wi(t), xi(t), nw, nx) += s.Q_xw.transpose();
    kkt.block(wi(t), wi(t), nw, nw) += s.Q_w;
    rhs.segment(xi(t), nx) -= s.l_x;
    rhs.segment(wi(t), nw) -= s.l_w;
    // Constraint A_t x_t + B_t w_t - x_{t+1} = -a_t, multiplied by lambda_{t+1}.
    kkt.block(li(t + 1), xi(t), nx, nx) = s.A;
    kkt.block(li(t + 1), wi(t), nx, nw) = s.B;
    kkt.block(li(t + 1), xi(t + 1), nx, nx) = -MatrixXd::Identity(nx, nx);
    kkt.block(xi(t), li(t + 1), nx, nx) = s.A.transpose();
    kkt.block(wi(t), li(t + 1), nw, nx) = s.B.transpose();
    kkt.block(xi(t + 1), li(t + 1), nx, nx) = -MatrixXd::Identity(nx, nx);
    rhs.segment(li(t + 1), nx) = -s.a;
  }
  kkt.block(xi(n), xi(n), nx, nx) += p.terminal.Q_x;
  rhs.segment(xi(n), nx) -= p.terminal.l;
  // Initial-state constraint -x_0 = -x0, multiplied by lambda_0.
  kkt.block(li(0), xi(0), nx, nx) = -MatrixXd::Identity(nx, nx);
  kkt.block(xi(0), li(0), nx, nx) = -MatrixXd::Identity(nx, nx);
  rhs.segment(li(0), nx) = -p.x0;

  Eigen::FullPivLU<MatrixXd> lu(kkt);
  if (!lu.isInvertible()) {
    throw SingularKkt("assembled optimality system is numerically singular (dim " +
                      std::to_string(dim) + ")");
  }
  VectorXd z = lu.solve(rhs);

  Solution s;
  s.x.resize(n + 1);
  s.w.resize(n);
  s.lambda.resize(n + 1);
  for (int t = 0; t <= n; ++t) {
    s.x[t] = z.segment(xi(t), nx);
    s.lambda[t] = z.segment(li(t), nx);
  }
  for (int t = 0; t < n; ++t) s.w[t] = z.segment(wi(t), p.input_dim(t));
  s.cost = eval_objective(p, s.x, s.w);
  return s;
}

std::vector<VectorXd> rts_smooth(const MheProblem& m) {
  const int n = m.n_mhe();
  const int nx = m.n_x;
  for (int k = 0; k <= n; ++k) {
    if (!m.stages[k].Q_wv.isZero(0.0)) {
      throw UnsupportedCrossCovariance(
          "smoother requires uncorrelated process and measurement noise (Q_wv != 0 at k=" +
          std::to_string(k) + ")");
    }
  }

  auto spd_solve = [](const MatrixXd& mat, const MatrixXd& rhs, const char* what) {
    Eigen::LLT<MatrixXd> llt(symmetrized(mat));
    if (llt.info() != Eigen::Success) {
      throw NotPositiveDefinite(std::string(what) + " covariance not positive definite");
    }
    return MatrixXd(llt.solve(rhs));
  };

  std::vector<VectorXd> x_pred(n + 1), x_filt(n + 1);
  std::vector<MatrixXd> p_pred(n + 1), p_filt(n + 1);
  x_pred[0] = m.x0_prior;
  p_pred[0] = symmetrized(m.P0_prior);

  for (int k = 0; k <= n; ++k) {
    const MheStage& st = m.stages[k];
    VectorXd innov = st.y - st.C * x_pred[k] - st.v_nom - st.d;
    MatrixXd s = st.C * p_pred[k] * st.C.transpose() + st.Q_v;
    // Gain K = P C' S^{-1}, computed as (S^{-1} C P)'.
    MatrixXd gain = spd_solve(s, MatrixXd(st.C * p_pred[k]), "innovation").transpose();
    x_filt[k] = x_pred[k] + gain * innov;
    MatrixXd ikc = MatrixXd::Identity(nx, nx) - gain * st.C;
    p_filt[k] = symmetrized(ikc * p_pred[k] * ikc.transpose() +
                            gain * st.Q_v * gain.transpose());
    if (k < n) {
      x_pred[k + 1] = st.A * x_filt[k] + st.B * st.w_nom + st.a;
      p_pred[k + 1] = symmetrized(st.A * p_filt[k] * st.A.transpose() +
                                  st.B * st.Q_w * st.B.transpose());
    }
  }

  std::vector<VectorXd> x_smooth(n + 1);
  x_smooth[n] = x_filt[n];
  for (int k = n - 1; k >= 0; --k) {
    const MheStage& st = m.stages[k];
    // Smoother gain P_k A_k' Ppred_{k+1}^{-1}.
    MatrixXd gain =
        spd_solve(p_pred[k + 1], MatrixXd(st.A * p_filt[k].transpose()), "prediction")
            .transpose();
    x_smooth[k] = x_filt[k] + gain * (x_smooth[k + 1] - x_pred[k + 1]);
  }
  return x_smooth;
}

}  // namespace parric
