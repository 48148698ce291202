#include "parric/riccati.hpp"

#include <Eigen/Eigenvalues>

#include "parric/errors.hpp"

namespace parric {

namespace {
constexpr double kPsdCutoffRel = 1e-12;
constexpr double kRangeTolRel = 1e-8;
}  // namespace

GFactor GFactor::factor(const MatrixXd& g, GSolveMode mode, int stage) {
  GFactor f;
  f.mode_ = mode;
  f.g_ = symmetrized(g);
  if (mode == GSolveMode::cholesky) {
    f.llt_.compute(f.g_);
    if (f.llt_.info() != Eigen::Success) {
      throw IndefiniteG(stage, "input-block matrix G not positive definite at t=" +
                                   std::to_string(stage));
    }
  } else {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(f.g_);
    if (es.info() != Eigen::Success) {
      throw SolverError("eigendecomposition failed at t=" + std::to_string(stage));
    }
    f.vecs_ = es.eigenvectors();
    const VectorXd& vals = es.eigenvalues();
    double cutoff = kPsdCutoffRel * std::max(vals.size() ? vals.maxCoeff() : 0.0, 0.0);
    f.inv_vals_ = VectorXd::Zero(vals.size());
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
      if (vals[i] > cutoff && vals[i] > 0.0) f.inv_vals_[i] = 1.0 / vals[i];
    }
  }
  return f;
}

MatrixXd GFactor::solve(const MatrixXd& rhs) const {
  if (mode_ == GSolveMode::cholesky) return llt_.solve(rhs);
  MatrixXd x = vecs_ * (inv_vals_.asDiagonal() * (vecs_.transpose() * rhs));
  // Components of rhs outside the numerical range are lost by the
  // pseudo-inverse; refuse to continue silently.
  double res = (g_ * x - rhs).norm();
  if (res > kRangeTolRel * (1.0 + rhs.norm())) {
    throw InconsistentReducedSystem(
        "right-hand side outside the range of a singular reduced-level matrix "
        "(relative residual " +
        std::to_string(res / (1.0 + rhs.norm())) + ")");
  }
  return x;
}

VectorXd GFactor::solve(const VectorXd& rhs) const {
  return VectorXd(solve(MatrixXd(rhs)));
}

Factorization factorize(const UftocProblem& p, GSolveMode mode,
                        const std::optional<MatrixXd>& terminal_P, OpCounts* counts) {
  const int n = p.horizon();
  Factorization f;
  f.P.resize(n + 1);
  f.F.resize(n);
  f.H.resize(n);
  f.G.resize(n);
  f.K.resize(n);
  f.P[n] = symmetrized(terminal_P ? *terminal_P : p.terminal.Q_x);
  for (int t = n - 1; t >= 0; --t) {
    const UftocStage& s = p.stages[t];
    const MatrixXd& pn = f.P[t + 1];
    f.F[t] = s.Q_x + s.A.transpose() * pn * s.A;
    f.G[t] = GFactor::factor(s.Q_w + s.B.transpose() * pn * s.B, mode, t);
    f.H[t] = s.Q_xw + s.A.transpose() * pn * s.B;
    f.K[t] = f.G[t].solve(MatrixXd(-f.H[t].transpose()));
    f.P[t] = symmetrized(f.F[t] - f.K[t].transpose() * f.G[t].matrix() * f.K[t]);
    if (counts) ++counts->factorize_stages;
  }
  return f;
}

BackwardPass backward(const UftocProblem& p, const Factorization& f,
                      const std::optional<BackwardSeed>& seed, OpCounts* counts) {
  const int n = p.horizon();
  BackwardPass b;
  b.psi.resize(n + 1);
  b.k.resize(n);
  b.cbar.resize(n + 1);
  b.psi[n] = seed ? seed->psi : VectorXd(-p.terminal.l);
  b.cbar[n] = seed ? seed->cbar : p.terminal.c;
  for (int t = n - 1; t >= 0; --t) {
    const UftocStage& s = p.stages[t];
    const MatrixXd& pn = f.P[t + 1];
    b.k[t] = f.G[t].solve(
        VectorXd(s.B.transpose() * b.psi[t + 1] - s.l_w - s.B.transpose() * (pn * s.a)));
    b.psi[t] = s.A.transpose() * b.psi[t + 1] - f.H[t] * b.k[t] - s.l_x -
               s.A.transpose() * (pn * s.a);
    b.cbar[t] = b.cbar[t + 1] + 0.5 * s.a.dot(pn * s.a) - b.psi[t + 1].dot(s.a) -
                0.5 * b.k[t].dot(f.G[t].matrix() * b.k[t]) + s.c;
    if (counts) ++counts->backward_stages;
  }
  return b;
}

Solution forward(const UftocProblem& p, const Factorization& f, const BackwardPass& b,
                 const VectorXd& x0bar, OpCounts* counts) {
  const int n = p.horizon();
  Solution s;
  s.x.resize(n + 1);
  s.w.resize(n);
  s.lambda.resize(n + 1);
  s.x[0] = x0bar;
  for (int t = 0; t < n; ++t) {
    const UftocStage& st = p.stages[t];
    s.w[t] = b.k[t] + f.K[t] * s.x[t];
    s.x[t + 1] = st.A * s.x[t] + st.B * s.w[t] + st.a;
    s.lambda[t] = f.P[t] * s.x[t] - b.psi[t];
    if (counts) ++counts->forward_stages;
  }
  s.lambda[n] = f.P[n] * s.x[n] - b.psi[n];
  s.cost = 0.5 * x0bar.dot(f.P[0] * x0bar) - b.psi[0].dot(x0bar) + b.cbar[0];
  return s;
}

Solution solve_serial(const UftocProblem& p, GSolveMode mode, OpCounts* counts) {
  Factorization f = factorize(p, mode, std::nullopt, counts);
  BackwardPass b = backward(p, f, std::nullopt, counts);
  return forward(p, f, b, p.x0, counts);
}

}  // namespace parric
