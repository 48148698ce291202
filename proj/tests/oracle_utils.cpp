#include "oracle_utils.hpp"

#include <Eigen/Dense>
#include <random>
#include <stdexcept>

#include <parric/numeric.hpp>
#include <parric/oracles.hpp>

namespace parric::testing {

StackedQp assemble_qp(const UftocProblem& p) {
  const int n = p.horizon();
  const int nx = p.n_x;
  StackedQp qp;
  qp.x_off.resize(n + 1);
  qp.w_off.resize(n);
  int off = 0;
  for (int t = 0; t <= n; ++t) {
    qp.x_off[t] = off;
    off += nx;
  }
  for (int t = 0; t < n; ++t) {
    qp.w_off[t] = off;
    off += static_cast<int>(p.stages[t].B.cols());
  }
  qp.n_var = off;
  qp.n_con = (n + 1) * nx;
  qp.H = MatrixXd::Zero(off, off);
  qp.g = VectorXd::Zero(off);
  qp.E = MatrixXd::Zero(qp.n_con, off);
  qp.b = VectorXd::Zero(qp.n_con);

  for (int t = 0; t < n; ++t) {
    const UftocStage& s = p.stages[t];
    const int nw = static_cast<int>(s.B.cols());
    const int xo = qp.x_off[t];
    const int wo = qp.w_off[t];
    qp.H.block(xo, xo, nx, nx) += s.Q_x;
    qp.H.block(xo, wo, nx, nw) += s.Q_xw;
    qp.H.block(wo, xo, nw, nx) += s.Q_xw.transpose();
    qp.H.block(wo, wo, nw, nw) += s.Q_w;
    qp.g.segment(xo, nx) += s.l_x;
    qp.g.segment(wo, nw) += s.l_w;
    qp.constant += s.c;
  }
  const int xn = qp.x_off[n];
  qp.H.block(xn, xn, nx, nx) += p.terminal.Q_x;
  qp.g.segment(xn, nx) += p.terminal.l;
  qp.constant += p.terminal.c;

  qp.E.block(0, qp.x_off[0], nx, nx) = MatrixXd::Identity(nx, nx);
  qp.b.segment(0, nx) = p.x0;
  for (int t = 0; t < n; ++t) {
    const UftocStage& s = p.stages[t];
    const int nw = static_cast<int>(s.B.cols());
    const int row = (t + 1) * nx;
    qp.E.block(row, qp.x_off[t], nx, nx) = -s.A;
    qp.E.block(row, qp.w_off[t], nx, nw) = -s.B;
    qp.E.block(row, qp.x_off[t + 1], nx, nx) = MatrixXd::Identity(nx, nx);
    qp.b.segment(row, nx) = s.a;
  }
  return qp;
}

VectorXd stack_primal(const StackedQp& qp, const std::vector<VectorXd>& x,
                      const std::vector<VectorXd>& w) {
  VectorXd z = VectorXd::Zero(qp.n_var);
  for (size_t t = 0; t < x.size(); ++t) z.segment(qp.x_off[t], x[t].size()) = x[t];
  for (size_t t = 0; t < w.size(); ++t) z.segment(qp.w_off[t], w[t].size()) = w[t];
  return z;
}

VectorXd stack_duals(const std::vector<VectorXd>& lambda) {
  int total = 0;
  for (const auto& l : lambda) total += static_cast<int>(l.size());
  VectorXd out(total);
  int off = 0;
  for (const auto& l : lambda) {
    out.segment(off, l.size()) = l;
    off += static_cast<int>(l.size());
  }
  return out;
}

double eval_stacked(const StackedQp& qp, const VectorXd& z) {
  return 0.5 * z.dot(qp.H * z) + qp.g.dot(z) + qp.constant;
}

KktApply kkt_apply(const StackedQp& qp, const VectorXd& z, const VectorXd& lambda) {
  KktApply r;
  r.stationarity = qp.H * z + qp.g - qp.E.transpose() * lambda;
  r.primal = qp.E * z - qp.b;
  return r;
}

BruteReduction brute_reduce(const UftocProblem& p, int begin, int end,
                            const std::optional<TerminalCost>& seed) {
  const int nx = p.n_x;
  const int len = end - begin;
  UftocProblem slice;
  slice.n_x = nx;
  slice.x0 = VectorXd::Zero(nx);
  int widest = 0;
  for (int t = begin; t < end; ++t) {
    slice.stages.push_back(p.stages[t]);
    widest = std::max(widest, static_cast<int>(p.stages[t].B.cols()));
  }
  slice.n_w = widest;
  slice.terminal = seed ? *seed : TerminalCost::zero(nx);

  Factorization f = factorize(slice, GSolveMode::cholesky);
  BackwardPass bw = backward(slice, f);

  BruteReduction br;
  // Tail products Phi[j] = (A_{L-1}+B K) ... (A_j+B K), Phi[L] = I.
  std::vector<MatrixXd> phi(len + 1);
  phi[len] = MatrixXd::Identity(nx, nx);
  for (int j = len - 1; j >= 0; --j) {
    const UftocStage& s = slice.stages[j];
    phi[j] = phi[j + 1] * (s.A + s.B * f.K[j]);
  }
  br.A_hat = phi[0];

  int wtotal = 0;
  for (int j = 0; j < len; ++j) wtotal += static_cast<int>(slice.stages[j].B.cols());
  br.S = MatrixXd::Zero(nx, wtotal);
  br.Qbar = MatrixXd::Zero(wtotal, wtotal);
  br.a_hat = VectorXd::Zero(nx);
  int col = 0;
  for (int j = 0; j < len; ++j) {
    const UftocStage& s = slice.stages[j];
    const int nw = static_cast<int>(s.B.cols());
    br.S.block(0, col, nx, nw) = phi[j + 1] * s.B;
    br.Qbar.block(col, col, nw, nw) = f.G[j].matrix();
    br.a_hat += phi[j + 1] * (s.a + s.B * bw.k[j]);
    col += nw;
  }
  br.B_hat = br.S * Eigen::LLT<MatrixXd>(br.Qbar).solve(br.S.transpose());
  br.Q_x_hat = f.P[0];
  br.l_x_hat = -bw.psi[0];
  br.c_hat = bw.cbar[0];
  return br;
}

U1Reduction u1_reduce(const BruteReduction& br) {
  // Orthonormal range basis of S' via SVD.
  Eigen::BDCSVD<MatrixXd> svd(br.S.transpose(), Eigen::ComputeThinU);
  const double cutoff = 1e-12 * (svd.singularValues().size() ? svd.singularValues()(0) : 0.0);
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > cutoff) ++r;
  U1Reduction u;
  u.rank = r;
  u.U1 = svd.matrixU().leftCols(r);
  MatrixXd qbar_inv_u1 = Eigen::LLT<MatrixXd>(br.Qbar).solve(u.U1);
  u.Q_w_hat = u.U1.transpose() * qbar_inv_u1;
  u.B_hat = br.S * qbar_inv_u1;
  return u;
}

UftocProblem condensed_one_stage(const MatrixXd& Q_x, const VectorXd& l_x, double c,
                                 const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q_w,
                                 const VectorXd& a, const TerminalCost& terminal,
                                 const VectorXd& x0) {
  UftocProblem p;
  p.n_x = static_cast<int>(Q_x.rows());
  p.n_w = static_cast<int>(B.cols());
  p.x0 = x0;
  UftocStage st;
  st.Q_x = Q_x;
  st.Q_xw = MatrixXd::Zero(p.n_x, p.n_w);
  st.Q_w = Q_w;
  st.l_x = l_x;
  st.l_w = VectorXd::Zero(p.n_w);
  st.c = c;
  st.A = A;
  st.B = B;
  st.a = a;
  p.stages.push_back(st);
  p.terminal = terminal;
  return p;
}

MheDense mhe_dense_solve(const MheProblem& m) {
  const int nmhe = m.n_mhe();
  const int nx = m.n_x;
  const int n_states = nmhe + 2;
  std::vector<int> woff(nmhe + 1);
  int off = n_states * nx;
  for (int k = 0; k <= nmhe; ++k) {
    woff[k] = off;
    off += static_cast<int>(m.stages[k].B.cols());
  }
  const int nv = off;
  const int nc = (nmhe + 1) * nx;

  MatrixXd H = MatrixXd::Zero(nv, nv);
  VectorXd g = VectorXd::Zero(nv);
  double constant = 0.0;

  // Prior pull on x_0.
  MatrixXd p0inv = m.P0_prior.inverse();
  H.block(0, 0, nx, nx) += p0inv;
  g.segment(0, nx) -= p0inv * m.x0_prior;
  constant += 0.5 * m.x0_prior.dot(p0inv * m.x0_prior);

  for (int k = 0; k <= nmhe; ++k) {
    const MheStage& s = m.stages[k];
    const int nw = static_cast<int>(s.B.cols());
    const int ny = static_cast<int>(s.C.rows());
    MatrixXd joint(nw + ny, nw + ny);
    joint << s.Q_w, s.Q_wv, s.Q_wv.transpose(), s.Q_v;
    MatrixXd Minv = joint.inverse();

    // Residual r = J u + r0 with u = [x_k; w_k]:
    //   r1 = w - w_nom, r2 = (y - d - v_nom) - C x.
    MatrixXd J = MatrixXd::Zero(nw + ny, nx + nw);
    J.block(0, nx, nw, nw) = MatrixXd::Identity(nw, nw);
    J.block(nw, 0, ny, nx) = -s.C;
    VectorXd r0(nw + ny);
    r0.segment(0, nw) = -s.w_nom;
    r0.segment(nw, ny) = s.y - s.d - s.v_nom;

    MatrixXd Hs = J.transpose() * Minv * J;
    VectorXd gs = J.transpose() * Minv * r0;
    constant += 0.5 * r0.dot(Minv * r0);

    const int xo = k * nx;
    const int wo = woff[k];
    H.block(xo, xo, nx, nx) += Hs.block(0, 0, nx, nx);
    H.block(xo, wo, nx, nw) += Hs.block(0, nx, nx, nw);
    H.block(wo, xo, nw, nx) += Hs.block(nx, 0, nw, nx);
    H.block(wo, wo, nw, nw) += Hs.block(nx, nx, nw, nw);
    g.segment(xo, nx) += gs.segment(0, nx);
    g.segment(wo, nw) += gs.segment(nx, nw);
  }

  MatrixXd E = MatrixXd::Zero(nc, nv);
  VectorXd b = VectorXd::Zero(nc);
  for (int k = 0; k <= nmhe; ++k) {
    const MheStage& s = m.stages[k];
    const int nw = static_cast<int>(s.B.cols());
    E.block(k * nx, k * nx, nx, nx) = -s.A;
    E.block(k * nx, woff[k], nx, nw) = -s.B;
    E.block(k * nx, (k + 1) * nx, nx, nx) = MatrixXd::Identity(nx, nx);
    b.segment(k * nx, nx) = s.a;
  }

  MatrixXd kkt = MatrixXd::Zero(nv + nc, nv + nc);
  kkt.topLeftCorner(nv, nv) = H;
  kkt.topRightCorner(nv, nc) = E.transpose();
  kkt.bottomLeftCorner(nc, nv) = E;
  VectorXd rhs(nv + nc);
  rhs.segment(0, nv) = -g;
  rhs.segment(nv, nc) = b;
  Eigen::FullPivLU<MatrixXd> lu(kkt);
  if (!lu.isInvertible()) throw std::runtime_error("estimation KKT oracle: singular system");
  VectorXd sol = lu.solve(rhs);

  MheDense out;
  out.x.resize(n_states);
  for (int k = 0; k < n_states; ++k) out.x[k] = sol.segment(k * nx, nx);
  out.w.resize(nmhe + 1);
  out.v.resize(nmhe + 1);
  for (int k = 0; k <= nmhe; ++k) {
    const MheStage& s = m.stages[k];
    out.w[k] = sol.segment(woff[k], s.B.cols());
    out.v[k] = s.y - s.C * out.x[k] - s.d;
  }
  VectorXd z = sol.segment(0, nv);
  out.objective = 0.5 * z.dot(H * z) + g.dot(z) + constant;
  return out;
}

double max_vec_deviation(const std::vector<VectorXd>& a, const std::vector<VectorXd>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, rel_deviation(a[i], b[i]));
  return worst;
}

double solution_deviation(const Solution& a, const Solution& b) {
  double worst = primal_deviation(a, b);
  worst = std::max(worst, max_vec_deviation(a.lambda, b.lambda));
  return worst;
}

double primal_deviation(const Solution& a, const Solution& b) {
  double worst = max_vec_deviation(a.x, b.x);
  worst = std::max(worst, max_vec_deviation(a.w, b.w));
  worst = std::max(worst, rel_deviation(a.cost, b.cost));
  return worst;
}

TerminalCost random_terminal(int n_x, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  MatrixXd M(n_x, n_x);
  for (int i = 0; i < n_x; ++i)
    for (int j = 0; j < n_x; ++j) M(i, j) = dist(rng);
  TerminalCost t;
  t.Q_x = M * M.transpose() + 0.05 * MatrixXd::Identity(n_x, n_x);
  t.l = VectorXd(n_x);
  for (int i = 0; i < n_x; ++i) t.l(i) = dist(rng);
  t.c = dist(rng);
  return t;
}

}  // namespace parric::testing
