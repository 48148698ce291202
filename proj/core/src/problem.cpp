#include "parric/problem.hpp"

#include <Eigen/Eigenvalues>

#include "parric/errors.hpp"

namespace parric {

namespace {

constexpr double kAsymmetryTol = 1e-10;
constexpr double kPsdTol = 1e-10;

void check_shape(ValidationReport& r, const MatrixXd& m, int rows, int cols,
                 const char* name, int t) {
  if (m.rows() != rows || m.cols() != cols) {
    r.add(Severity::error, "dimension mismatch at t=" + std::to_string(t) + ": " + name +
                               " is " + std::to_string(m.rows()) + "x" +
                               std::to_string(m.cols()) + ", expected " +
                               std::to_string(rows) + "x" + std::to_string(cols));
  }
}

void check_shape(ValidationReport& r, const VectorXd& v, int rows, const char* name, int t) {
  if (v.size() != rows) {
    r.add(Severity::error, "dimension mismatch at t=" + std::to_string(t) + ": " + name +
                               " has length " + std::to_string(v.size()) + ", expected " +
                               std::to_string(rows));
  }
}

void check_symmetry(ValidationReport& r, const MatrixXd& m, const char* name, int t) {
  if (m.rows() == m.cols() && asymmetry(m) > kAsymmetryTol) {
    r.add(Severity::warning,
          std::string(name) + " at t=" + std::to_string(t) + " asymmetric beyond 1e-10 relative");
  }
}

void check_psd(ValidationReport& r, const MatrixXd& q, const std::string& what, int t) {
  if (q.size() == 0) return;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrized(q), Eigen::EigenvaluesOnly);
  double mineig = es.eigenvalues().minCoeff();
  if (mineig < -kPsdTol * q.norm()) {
    r.add(Severity::error, "non-PSD " + what + " at t=" + std::to_string(t) +
                               " (min eigenvalue " + std::to_string(mineig) + ")");
  }
}

}  // namespace

ValidationReport validate_uftoc(const UftocProblem& p) {
  ValidationReport r;
  const int n_x = p.n_x;
  const int n_w = p.n_w;
  if (n_x <= 0) r.add(Severity::error, "n_x must be positive");
  if (n_w <= 0) r.add(Severity::error, "n_w must be positive");
  if (p.stages.empty()) r.add(Severity::error, "horizon must be at least 1");
  if (!r.ok) return r;

  check_shape(r, p.x0, n_x, "x0", 0);
  int max_width = 0;
  for (int t = 0; t < p.horizon(); ++t) {
    const UftocStage& s = p.stages[t];
    // Input widths may vary per stage; each stage must be internally
    // consistent with its own B.cols(), and the widest must match n_w.
    const int wt = static_cast<int>(s.B.cols());
    max_width = std::max(max_width, wt);
    check_shape(r, s.Q_x, n_x, n_x, "Q_x", t);
    check_shape(r, s.Q_xw, n_x, wt, "Q_xw", t);
    check_shape(r, s.Q_w, wt, wt, "Q_w", t);
    check_shape(r, s.l_x, n_x, "l_x", t);
    check_shape(r, s.l_w, wt, "l_w", t);
    check_shape(r, s.A, n_x, n_x, "A", t);
    if (s.B.rows() != n_x) check_shape(r, s.B, n_x, wt, "B", t);
    check_shape(r, s.a, n_x, "a", t);
  }
  if (max_width != n_w) {
    r.add(Severity::error, "declared n_w=" + std::to_string(n_w) +
                               " does not match the widest stage input (" +
                               std::to_string(max_width) + ")");
  }
  check_shape(r, p.terminal.Q_x, n_x, n_x, "terminal Q_x", p.horizon());
  check_shape(r, p.terminal.l, n_x, "terminal l", p.horizon());
  if (!r.ok) return r;

  for (int t = 0; t < p.horizon(); ++t) {
    const UftocStage& s = p.stages[t];
    const int wt = static_cast<int>(s.B.cols());
    check_symmetry(r, s.Q_x, "Q_x", t);
    check_symmetry(r, s.Q_w, "Q_w", t);
    // PSD is required of the joint stage block, not of Q_x and Q_w separately.
    MatrixXd joint(n_x + wt, n_x + wt);
    joint << s.Q_x, s.Q_xw, s.Q_xw.transpose(), s.Q_w;
    check_psd(r, joint, "stage weight", t);
  }
  check_symmetry(r, p.terminal.Q_x, "terminal Q_x", p.horizon());
  check_psd(r, p.terminal.Q_x, "terminal weight", p.horizon());
  return r;
}

double eval_objective(const UftocProblem& p, const std::vector<VectorXd>& x,
                      const std::vector<VectorXd>& w) {
  const int n = p.horizon();
  if (static_cast<int>(x.size()) != n + 1 || static_cast<int>(w.size()) != n) {
    throw DimensionMismatch("eval_objective: expected " + std::to_string(n + 1) +
                            " states and " + std::to_string(n) + " inputs, got " +
                            std::to_string(x.size()) + " and " + std::to_string(w.size()));
  }
  double j = 0.0;
  for (int t = 0; t < n; ++t) {
    const UftocStage& s = p.stages[t];
    if (x[t].size() != p.n_x || w[t].size() != s.B.cols()) {
      throw DimensionMismatch("eval_objective: bad vector length at t=" + std::to_string(t));
    }
    j += 0.5 * x[t].dot(s.Q_x * x[t]) + x[t].dot(s.Q_xw * w[t]) + 0.5 * w[t].dot(s.Q_w * w[t]);
    j += s.l_x.dot(x[t]) + s.l_w.dot(w[t]) + s.c;
  }
  if (x[n].size() != p.n_x) throw DimensionMismatch("eval_objective: bad terminal state length");
  j += 0.5 * x[n].dot(p.terminal.Q_x * x[n]) + p.terminal.l.dot(x[n]) + p.terminal.c;
  return j;
}

KktResidual kkt_residual(const UftocProblem& p, const Solution& s) {
  const int n = p.horizon();
  if (static_cast<int>(s.x.size()) != n + 1 || static_cast<int>(s.w.size()) != n ||
      static_cast<int>(s.lambda.size()) != n + 1) {
    throw DimensionMismatch("kkt_residual: trajectory lengths do not match the horizon");
  }
  KktResidual r;
  auto track = [](double& acc, const VectorXd& v) {
    acc = std::max(acc, v.lpNorm<Eigen::Infinity>());
  };

  track(r.primal_norm, s.x[0] - p.x0);
  for (int t = 0; t < n; ++t) {
    const UftocStage& st = p.stages[t];
    track(r.primal_norm, s.x[t + 1] - st.A * s.x[t] - st.B * s.w[t] - st.a);
    // d/dx_t and d/dw_t of the Lagrangian; lambda_t carries a minus sign from
    // the (x0 - x_0) and (... - x_{t+1}) constraint orientation.
    VectorXd gx = st.Q_x * s.x[t] + st.Q_xw * s.w[t] + st.l_x - s.lambda[t] +
                  st.A.transpose() * s.lambda[t + 1];
    VectorXd gw = st.Q_xw.transpose() * s.x[t] + st.Q_w * s.w[t] + st.l_w +
                  st.B.transpose() * s.lambda[t + 1];
    track(r.stationarity_norm, gx);
    track(r.stationarity_norm, gw);
  }
  VectorXd gN = p.terminal.Q_x * s.x[n] + p.terminal.l - s.lambda[n];
  track(r.stationarity_norm, gN);
  return r;
}

}  // namespace parric
