#include "parric/generator.hpp"

#include <Eigen/Eigenvalues>
#include <random>

#include "parric/errors.hpp"

namespace parric {

namespace {

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  double normal() { return dist_(rng_); }

  VectorXd vec(int n, double scale = 1.0) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = scale * normal();
    return v;
  }

  MatrixXd mat(int rows, int cols, double scale = 1.0) {
    MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = scale * normal();
    return m;
  }

  MatrixXd spd(int n) {
    MatrixXd m = mat(n, n);
    return m * m.transpose() + 0.1 * MatrixXd::Identity(n, n);
  }

  MatrixXd stable(int n, double radius) {
    MatrixXd a = mat(n, n);
    double rho = Eigen::EigenSolver<MatrixXd>(a, false).eigenvalues().cwiseAbs().maxCoeff();
    if (rho > 1e-12) a *= radius / rho;
    return a;
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace

UftocProblem generate_uftoc(const GenSpec& spec) {
  if (spec.n_x < 1 || spec.n_w < 1 || spec.horizon < 1) {
    throw DimensionMismatch("generate_uftoc: n_x, n_w and the horizon must be positive");
  }
  Draw d(spec.seed);
  const int nx = spec.n_x, nw = spec.n_w;
  UftocProblem p;
  p.n_x = nx;
  p.n_w = nw;
  p.x0 = d.vec(nx);
  p.stages.resize(spec.horizon);
  for (UftocStage& s : p.stages) {
    MatrixXd joint = d.spd(nx + nw);
    s.Q_x = joint.topLeftCorner(nx, nx);
    s.Q_xw = joint.topRightCorner(nx, nw);
    s.Q_w = joint.bottomRightCorner(nw, nw);
    s.l_x = d.vec(nx, 0.5);
    s.l_w = d.vec(nw, 0.5);
    s.c = 0.1 * d.normal();
    s.A = d.stable(nx, spec.spectral_radius);
    s.B = d.mat(nx, nw);
    s.a = d.vec(nx, 0.1);
  }
  p.terminal.Q_x = d.spd(nx);
  p.terminal.l = d.vec(nx, 0.5);
  p.terminal.c = 0.1 * d.normal();
  return p;
}

MheProblem generate_mhe(const GenSpec& spec) {
  if (spec.n_x < 1 || spec.n_w < 1 || spec.n_y < 1 || spec.horizon < 0) {
    throw DimensionMismatch("generate_mhe: n_x, n_w, n_y must be positive, N_mhe >= 0");
  }
  Draw d(spec.seed);
  const int nx = spec.n_x, nw = spec.n_w, ny = spec.n_y;
  MheProblem m;
  m.n_x = nx;
  m.n_w = nw;
  m.n_y = ny;
  m.x0_prior = d.vec(nx);
  m.P0_prior = d.spd(nx);
  m.stages.resize(spec.horizon + 1);
  for (MheStage& s : m.stages) {
    s.A = d.stable(nx, spec.spectral_radius);
    s.B = d.mat(nx, nw);
    s.C = d.mat(ny, nx);
    s.a = d.vec(nx, 0.1);
    s.d = d.vec(ny, 0.1);
    s.w_nom = d.vec(nw, 0.1);
    s.v_nom = d.vec(ny, 0.1);
    if (spec.cross_correlated) {
      MatrixXd joint = d.spd(nw + ny);
      s.Q_w = joint.topLeftCorner(nw, nw);
      s.Q_wv = joint.topRightCorner(nw, ny);
      s.Q_v = joint.bottomRightCorner(ny, ny);
    } else {
      s.Q_w = d.spd(nw);
      s.Q_wv = MatrixXd::Zero(nw, ny);
      s.Q_v = d.spd(ny);
    }
  }

  // Measurements from a noisy rollout: the true trajectory draws its process
  // and measurement noise jointly from the stage weight.
  VectorXd x = m.x0_prior + m.P0_prior.llt().matrixL() * d.vec(nx);
  for (MheStage& s : m.stages) {
    MatrixXd joint(nw + ny, nw + ny);
    joint << s.Q_w, s.Q_wv, s.Q_wv.transpose(), s.Q_v;
    VectorXd noise = MatrixXd(joint.llt().matrixL()) * d.vec(nw + ny);
    VectorXd w = s.w_nom + noise.head(nw);
    VectorXd v = s.v_nom + noise.tail(ny);
    s.y = s.C * x + v + s.d;
    x = s.A * x + s.B * w + s.a;
  }
  return m;
}

AnyProblem generate_problem(const GenSpec& spec) {
  if (spec.kind == "uftoc") return generate_uftoc(spec);
  if (spec.kind == "mhe") return generate_mhe(spec);
  throw ParseError("generate_problem: unknown kind '" + spec.kind + "'");
}

}  // namespace parric
