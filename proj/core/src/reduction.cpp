#include "parric/reduction.hpp"

#include "parric/errors.hpp"

namespace parric {

std::pair<ReducedStage, BatchCache> reduce_subproblem(const UftocProblem& p, int begin, int end,
                                                      GSolveMode mode,
                                                      const std::optional<TerminalCost>& terminal,
                                                      OpCounts* counts) {
  if (begin < 0 || end > p.horizon() || begin >= end) {
    throw DimensionMismatch("reduce_subproblem: bad stage range [" + std::to_string(begin) +
                            ", " + std::to_string(end) + ")");
  }
  const int nx = p.n_x;
  const int len = end - begin;

  BatchCache cache;
  cache.mode = mode;
  cache.local.n_x = nx;
  cache.local.x0 = VectorXd::Zero(nx);
  cache.local.stages.assign(p.stages.begin() + begin, p.stages.begin() + end);
  cache.local.terminal = terminal ? *terminal : TerminalCost::zero(nx);
  int widest = 0;
  for (const UftocStage& s : cache.local.stages) widest = std::max(widest, int(s.B.cols()));
  cache.local.n_w = widest;

  cache.P0.resize(len + 1);
  cache.psi0.resize(len + 1);
  cache.cbar0.resize(len + 1);
  cache.G0.resize(len);
  cache.K0.resize(len);
  cache.k0.resize(len);
  cache.L0.resize(len);

  cache.P0[len] = symmetrized(cache.local.terminal.Q_x);
  cache.psi0[len] = -cache.local.terminal.l;
  cache.cbar0[len] = cache.local.terminal.c;

  MatrixXd vbar = MatrixXd::Identity(nx, nx);  // V at t+1 entering iteration t
  VectorXd vvec = VectorXd::Zero(nx);
  MatrixXd qw_hat = MatrixXd::Zero(nx, nx);

  for (int t = len - 1; t >= 0; --t) {
    const UftocStage& s = cache.local.stages[t];
    const MatrixXd& pn = cache.P0[t + 1];
    MatrixXd f = s.Q_x + s.A.transpose() * pn * s.A;
    cache.G0[t] = GFactor::factor(s.Q_w + s.B.transpose() * pn * s.B, mode, begin + t);
    MatrixXd h = s.Q_xw + s.A.transpose() * pn * s.B;
    cache.K0[t] = cache.G0[t].solve(MatrixXd(-h.transpose()));
    cache.k0[t] = cache.G0[t].solve(
        VectorXd(s.B.transpose() * cache.psi0[t + 1] - s.l_w - s.B.transpose() * (pn * s.a)));
    cache.psi0[t] = s.A.transpose() * cache.psi0[t + 1] - h * cache.k0[t] - s.l_x -
                    s.A.transpose() * (pn * s.a);
    cache.cbar0[t] = cache.cbar0[t + 1] + 0.5 * s.a.dot(pn * s.a) -
                     cache.psi0[t + 1].dot(s.a) -
                     0.5 * cache.k0[t].dot(cache.G0[t].matrix() * cache.k0[t]) + s.c;
    cache.P0[t] =
        symmetrized(f - cache.K0[t].transpose() * cache.G0[t].matrix() * cache.K0[t]);
    // Condensation terms: vbar tracks the transposed closed-loop transition
    // down to the batch start, L couples each stage input to the condensed one.
    cache.L0[t] = cache.G0[t].solve(MatrixXd(-s.B.transpose() * vbar));
    vvec += vbar.transpose() * (s.a + s.B * cache.k0[t]);
    qw_hat += cache.L0[t].transpose() * cache.G0[t].matrix() * cache.L0[t];
    vbar = (s.A.transpose() + cache.K0[t].transpose() * s.B.transpose()) * vbar;
    if (counts) ++counts->reduce_stages;
  }

  ReducedStage out;
  out.A_hat = vbar.transpose();
  out.B_hat = symmetrized(qw_hat);
  out.a_hat = vvec;
  out.Q_x_hat = cache.P0[0];
  out.Q_w_hat = out.B_hat;
  out.l_x_hat = -cache.psi0[0];
  out.c_hat = cache.cbar0[0];
  cache.reduced = out;
  return {out, std::move(cache)};
}

ExpandResult expand_subproblem(const BatchCache& cache, const VectorXd& x_hat,
                               const MatrixXd& P_hat, const VectorXd& Psi_hat, double c_hat,
                               bool use_cache, OpCounts* counts) {
  const UftocProblem& local = cache.local;
  const int len = local.horizon();
  // The batch's own terminal share and the parent's cost-to-go add up.
  MatrixXd p_n = symmetrized(local.terminal.Q_x + P_hat);
  VectorXd psi_n = Psi_hat - local.terminal.l;
  double cbar_n = local.terminal.c + c_hat;

  ExpandResult r;
  if (!use_cache) {
    r.f = factorize(local, cache.mode, p_n, counts);
    r.b = backward(local, *r.f, BackwardSeed{psi_n, cbar_n}, counts);
    r.sol = forward(local, *r.f, *r.b, x_hat, counts);
    return r;
  }

  // Cached path: solve only the one-stage condensed problem for the
  // state-sized input w_hat, then replay the stored gains.
  const ReducedStage& rs = cache.reduced;
  MatrixXd g_hat = rs.Q_w_hat + rs.B_hat.transpose() * P_hat * rs.B_hat;
  GFactor gf = GFactor::factor(g_hat, GSolveMode::eigen_psd, 0);
  MatrixXd h_hat = rs.A_hat.transpose() * P_hat * rs.B_hat;
  MatrixXd k_gain = gf.solve(MatrixXd(-h_hat.transpose()));
  VectorXd k_ff = gf.solve(VectorXd(rs.B_hat.transpose() * (Psi_hat - P_hat * rs.a_hat)));
  VectorXd w_hat = k_ff + k_gain * x_hat;

  Solution& s = r.sol;
  s.x.resize(len + 1);
  s.w.resize(len);
  s.lambda.resize(len + 1);
  s.x[0] = x_hat;
  for (int t = 0; t < len; ++t) {
    const UftocStage& st = local.stages[t];
    s.w[t] = cache.k0[t] + cache.K0[t] * s.x[t] - cache.L0[t] * w_hat;
    s.x[t + 1] = st.A * s.x[t] + st.B * s.w[t] + st.a;
    if (counts) ++counts->forward_stages;
  }
  // Multipliers by back-substituting the stationarity equations.
  s.lambda[len] = p_n * s.x[len] - psi_n;
  for (int t = len - 1; t >= 0; --t) {
    const UftocStage& st = local.stages[t];
    s.lambda[t] =
        st.Q_x * s.x[t] + st.Q_xw * s.w[t] + st.l_x + st.A.transpose() * s.lambda[t + 1];
  }
  s.cost = eval_objective(local, s.x, s.w) + 0.5 * s.x[len].dot(P_hat * s.x[len]) -
           Psi_hat.dot(s.x[len]) + c_hat;
  return r;
}

}  // namespace parric
