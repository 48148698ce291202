#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <parric/errors.hpp>
#include <parric/generator.hpp>
#include <parric/numeric.hpp>
#include <parric/oracles.hpp>
#include <parric/problem.hpp>
#include <parric/problem_io.hpp>
#include <parric/riccati.hpp>

#include "doctest.h"
#include "oracle_utils.hpp"

using namespace parric;
using namespace parric::testing;

namespace {

UftocProblem scalar_chain(double a0 = 0.0, double x0 = 0.0) {
  UftocProblem p;
  p.n_x = 1;
  p.n_w = 1;
  p.x0 = VectorXd::Constant(1, x0);
  UftocStage s;
  s.Q_x = MatrixXd::Constant(1, 1, 1.0);
  s.Q_xw = MatrixXd::Zero(1, 1);
  s.Q_w = MatrixXd::Constant(1, 1, 1.0);
  s.l_x = VectorXd::Zero(1);
  s.l_w = VectorXd::Zero(1);
  s.c = 0.0;
  s.A = MatrixXd::Constant(1, 1, 1.0);
  s.B = MatrixXd::Constant(1, 1, 1.0);
  s.a = VectorXd::Constant(1, a0);
  p.stages.push_back(s);
  p.terminal.Q_x = MatrixXd::Constant(1, 1, 1.0);
  p.terminal.l = VectorXd::Zero(1);
  p.terminal.c = 0.0;
  return p;
}

std::string temp_path(const std::string& stem) {
  static std::mt19937_64 rng(std::random_device{}());
  return (std::filesystem::temp_directory_path() /
          (stem + "-" + std::to_string(rng()) + ".json"))
      .string();
}

struct FileGuard {
  std::string path;
  ~FileGuard() { std::remove(path.c_str()); }
};

bool exact_eq(const MatrixXd& a, const MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

bool exact_eq(const VectorXd& a, const VectorXd& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

}  // namespace

TEST_CASE("validate accepts the well posed scalar identity problem") {
  UftocProblem p = scalar_chain();
  ValidationReport r = validate_uftoc(p);
  CHECK(r.ok);
  CHECK(r.issues.empty());
}

TEST_CASE("validate flags a negative input weight") {
  UftocProblem p = scalar_chain();
  p.stages[0].Q_w(0, 0) = -1.0;
  ValidationReport r = validate_uftoc(p);
  CHECK_FALSE(r.ok);
  bool found = false;
  for (const Issue& is : r.issues)
    if (is.message.find("non-PSD stage weight at t=0") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("validate flags a transition matrix of the wrong shape") {
  UftocProblem p = scalar_chain();
  p.n_x = 3;
  p.x0 = VectorXd::Zero(3);
  ValidationReport r = validate_uftoc(p);
  CHECK_FALSE(r.ok);
  bool found = false;
  for (const Issue& is : r.issues)
    if (is.message.find("dimension mismatch at t=0") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("objective of the zero trajectory with zero data is zero") {
  UftocProblem p = scalar_chain();
  p.terminal.Q_x.setZero();
  std::vector<VectorXd> x{VectorXd::Zero(1), VectorXd::Zero(1)};
  std::vector<VectorXd> w{VectorXd::Zero(1)};
  CHECK(eval_objective(p, x, w) == 0.0);
}

TEST_CASE("objective matches a hand computed quadratic") {
  UftocProblem p = scalar_chain();
  p.terminal.Q_x.setZero();
  std::vector<VectorXd> x{VectorXd::Constant(1, 1.0), VectorXd::Constant(1, 3.0)};
  std::vector<VectorXd> w{VectorXd::Constant(1, 2.0)};
  CHECK(eval_objective(p, x, w) == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("objective equals the stacked quadratic form on random instances") {
  for (unsigned seed = 1; seed <= 10; ++seed) {
    GenSpec gs;
    gs.kind = "uftoc";
    gs.n_x = 3;
    gs.n_w = 2;
    gs.horizon = 7;
    gs.seed = seed;
    UftocProblem p = generate_uftoc(gs);
    StackedQp qp = assemble_qp(p);

    std::mt19937_64 rng(seed * 71u);
    std::normal_distribution<double> dist;
    std::vector<VectorXd> x(p.horizon() + 1), w(p.horizon());
    for (auto& v : x) {
      v = VectorXd(p.n_x);
      for (int i = 0; i < p.n_x; ++i) v[i] = dist(rng);
    }
    for (int t = 0; t < p.horizon(); ++t) {
      w[t] = VectorXd(p.input_dim(t));
      for (int i = 0; i < p.input_dim(t); ++i) w[t][i] = dist(rng);
    }
    const double lib = eval_objective(p, x, w);
    const double oracle = eval_stacked(qp, stack_primal(qp, x, w));
    CHECK(rel_deviation(lib, oracle) < 1e-12);
  }
}

TEST_CASE("objective rejects mismatched trajectory shapes") {
  UftocProblem p = scalar_chain();
  std::vector<VectorXd> x{VectorXd::Zero(1), VectorXd::Zero(1)};
  std::vector<VectorXd> w{VectorXd::Zero(2)};
  CHECK_THROWS_AS(eval_objective(p, x, w), DimensionMismatch);
  std::vector<VectorXd> short_x{VectorXd::Zero(1)};
  CHECK_THROWS_AS(eval_objective(p, short_x, {VectorXd::Zero(1)}), DimensionMismatch);
}

TEST_CASE("kkt residual vanishes at the dense optimum") {
  for (unsigned seed = 1; seed <= 5; ++seed) {
    GenSpec gs;
    gs.kind = "uftoc";
    gs.n_x = 3;
    gs.n_w = 2;
    gs.horizon = 6;
    gs.seed = seed;
    UftocProblem p = generate_uftoc(gs);
    Solution s = dense_kkt_solve(p);
    KktResidual r = kkt_residual(p, s);
    double data_scale = 1.0 + p.x0.lpNorm<Eigen::Infinity>();
    for (const auto& st : p.stages)
      data_scale += st.l_x.lpNorm<Eigen::Infinity>() + st.a.lpNorm<Eigen::Infinity>();
    CHECK(r.primal_norm <= 1e-10 * data_scale);
    CHECK(r.stationarity_norm <= 1e-10 * data_scale);
  }
}

TEST_CASE("kkt residual equals the assembled system applied to arbitrary points") {
  GenSpec gs;
  gs.kind = "uftoc";
  gs.n_x = 2;
  gs.n_w = 2;
  gs.horizon = 5;
  gs.seed = 9;
  UftocProblem p = generate_uftoc(gs);
  StackedQp qp = assemble_qp(p);
  std::mt19937_64 rng(123);
  std::normal_distribution<double> dist;
  for (int rep = 0; rep < 5; ++rep) {
    Solution s;
    s.x.resize(p.horizon() + 1);
    s.w.resize(p.horizon());
    s.lambda.resize(p.horizon() + 1);
    for (auto& v : s.x) {
      v = VectorXd(p.n_x);
      for (int i = 0; i < p.n_x; ++i) v[i] = dist(rng);
    }
    for (int t = 0; t < p.horizon(); ++t) {
      s.w[t] = VectorXd(p.input_dim(t));
      for (int i = 0; i < p.input_dim(t); ++i) s.w[t][i] = dist(rng);
    }
    for (auto& v : s.lambda) {
      v = VectorXd(p.n_x);
      for (int i = 0; i < p.n_x; ++i) v[i] = dist(rng);
    }
    KktResidual r = kkt_residual(p, s);
    KktApply oracle = kkt_apply(qp, stack_primal(qp, s.x, s.w), stack_duals(s.lambda));
    CHECK(rel_deviation(r.stationarity_norm,
                        oracle.stationarity.lpNorm<Eigen::Infinity>()) < 1e-12);
    CHECK(rel_deviation(r.primal_norm, oracle.primal.lpNorm<Eigen::Infinity>()) < 1e-12);
  }
}

TEST_CASE("perturbing the first input raises the stationarity residual by G") {
  // Scalar chain: G_1 = Q_w + B'P_1 B = 2.  Shift w_0 by one, roll the states
  // forward again, and recover multipliers from the cost-to-go; the only
  // nonzero stationarity row is the first input gradient G_1 * 1.
  UftocProblem p = scalar_chain(1.0, 0.7);
  Factorization f = factorize(p);
  BackwardPass bw = backward(p, f);
  Solution s = forward(p, f, bw, p.x0);

  Solution pert = s;
  pert.w[0][0] += 1.0;
  pert.x[1] = p.stages[0].A * pert.x[0] + p.stages[0].B * pert.w[0] + p.stages[0].a;
  for (size_t t = 0; t < pert.x.size(); ++t)
    pert.lambda[t] = f.P[t] * pert.x[t] - bw.psi[t];
  KktResidual r = kkt_residual(p, pert);
  CHECK(r.stationarity_norm == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.stationarity_norm >= 2.0 - 1e-12);
}

TEST_CASE("perturbing the first input on a random instance is bounded below by G's spectrum") {
  GenSpec gs;
  gs.kind = "uftoc";
  gs.n_x = 4;
  gs.n_w = 3;
  gs.horizon = 6;
  gs.seed = 21;
  UftocProblem p = generate_uftoc(gs);
  Factorization f = factorize(p);
  BackwardPass bw = backward(p, f);
  Solution s = forward(p, f, bw, p.x0);

  Solution pert = s;
  pert.w[0] = s.w[0] + VectorXd::Ones(p.input_dim(0));
  for (int t = 0; t < p.horizon(); ++t) {
    if (t > 0) pert.w[t] = bw.k[t] + f.K[t] * pert.x[t];
    pert.x[t + 1] = p.stages[t].A * pert.x[t] + p.stages[t].B * pert.w[t] + p.stages[t].a;
  }
  for (size_t t = 0; t < pert.x.size(); ++t)
    pert.lambda[t] = f.P[t] * pert.x[t] - bw.psi[t];

  Eigen::SelfAdjointEigenSolver<MatrixXd> es(f.G[0].matrix());
  const double lam_min = es.eigenvalues().minCoeff();
  REQUIRE(lam_min > 0.0);
  KktResidual r = kkt_residual(p, pert);
  // |G d|_inf >= |G d|_2 / sqrt(n) >= lam_min |d|_2 / sqrt(n) = lam_min for d = ones.
  CHECK(r.stationarity_norm >= lam_min * (1.0 - 1e-12));
}

TEST_CASE("riccati solutions satisfy the residual contract") {
  for (unsigned seed = 30; seed < 36; ++seed) {
    GenSpec gs;
    gs.kind = "uftoc";
    gs.n_x = 4;
    gs.n_w = 2;
    gs.horizon = 12;
    gs.seed = seed;
    UftocProblem p = generate_uftoc(gs);
    Solution s = solve_serial(p);
    KktResidual r = kkt_residual(p, s);
    double a_scale = 0.0, l_scale = 0.0;
    for (const auto& st : p.stages) {
      a_scale = std::max(a_scale, st.a.lpNorm<Eigen::Infinity>());
      l_scale = std::max({l_scale, st.l_x.lpNorm<Eigen::Infinity>(),
                          st.l_w.lpNorm<Eigen::Infinity>()});
    }
    CHECK(r.primal_norm <= 1e-8 * (1.0 + p.x0.lpNorm<Eigen::Infinity>() + a_scale));
    CHECK(r.stationarity_norm <= 1e-8 * (1.0 + l_scale));
  }
}

TEST_CASE("uftoc files round trip exactly") {
  GenSpec gs;
  gs.kind = "uftoc";
  gs.n_x = 3;
  gs.n_w = 2;
  gs.horizon = 4;
  gs.seed = 77;
  UftocProblem p = generate_uftoc(gs);
  FileGuard fg{temp_path("uftoc")};
  save_problem(p, fg.path);
  AnyProblem loaded = load_problem(fg.path);
  REQUIRE(std::holds_alternative<UftocProblem>(loaded));
  const UftocProblem& q = std::get<UftocProblem>(loaded);
  CHECK(q.n_x == p.n_x);
  CHECK(q.n_w == p.n_w);
  CHECK(exact_eq(q.x0, p.x0));
  REQUIRE(q.horizon() == p.horizon());
  for (int t = 0; t < p.horizon(); ++t) {
    CHECK(exact_eq(q.stages[t].Q_x, p.stages[t].Q_x));
    CHECK(exact_eq(q.stages[t].Q_xw, p.stages[t].Q_xw));
    CHECK(exact_eq(q.stages[t].Q_w, p.stages[t].Q_w));
    CHECK(exact_eq(q.stages[t].l_x, p.stages[t].l_x));
    CHECK(exact_eq(q.stages[t].l_w, p.stages[t].l_w));
    CHECK(q.stages[t].c == p.stages[t].c);
    CHECK(exact_eq(q.stages[t].A, p.stages[t].A));
    CHECK(exact_eq(q.stages[t].B, p.stages[t].B));
    CHECK(exact_eq(q.stages[t].a, p.stages[t].a));
  }
  CHECK(exact_eq(q.terminal.Q_x, p.terminal.Q_x));
  CHECK(exact_eq(q.terminal.l, p.terminal.l));
  CHECK(q.terminal.c == p.terminal.c);
}

TEST_CASE("mhe files round trip exactly and load as the right kind") {
  GenSpec gs;
  gs.kind = "mhe";
  gs.n_x = 3;
  gs.n_w = 2;
  gs.n_y = 2;
  gs.horizon = 5;
  gs.seed = 78;
  MheProblem m = generate_mhe(gs);
  FileGuard fg{temp_path("mhe")};
  save_problem(m, fg.path);
  AnyProblem loaded = load_problem(fg.path);
  REQUIRE(std::holds_alternative<MheProblem>(loaded));
  const MheProblem& q = std::get<MheProblem>(loaded);
  CHECK(q.n_mhe() == m.n_mhe());
  CHECK(exact_eq(q.x0_prior, m.x0_prior));
  CHECK(exact_eq(q.P0_prior, m.P0_prior));
  for (int k = 0; k <= m.n_mhe(); ++k) {
    CHECK(exact_eq(q.stages[k].A, m.stages[k].A));
    CHECK(exact_eq(q.stages[k].C, m.stages[k].C));
    CHECK(exact_eq(q.stages[k].y, m.stages[k].y));
    CHECK(exact_eq(q.stages[k].Q_w, m.stages[k].Q_w));
    CHECK(exact_eq(q.stages[k].Q_wv, m.stages[k].Q_wv));
    CHECK(exact_eq(q.stages[k].Q_v, m.stages[k].Q_v));
  }
}

TEST_CASE("solutions round trip exactly") {
  GenSpec gs;
  gs.kind = "uftoc";
  gs.n_x = 2;
  gs.n_w = 2;
  gs.horizon = 6;
  gs.seed = 79;
  UftocProblem p = generate_uftoc(gs);
  Solution s = solve_serial(p);
  FileGuard fg{temp_path("sol")};
  save_solution(s, fg.path);
  Solution t = load_solution(fg.path);
  CHECK(t.cost == s.cost);
  REQUIRE(t.x.size() == s.x.size());
  for (size_t i = 0; i < s.x.size(); ++i) CHECK(exact_eq(t.x[i], s.x[i]));
  for (size_t i = 0; i < s.w.size(); ++i) CHECK(exact_eq(t.w[i], s.w[i]));
  for (size_t i = 0; i < s.lambda.size(); ++i) CHECK(exact_eq(t.lambda[i], s.lambda[i]));
}

TEST_CASE("missing keys are reported by name") {
  FileGuard fg{temp_path("broken")};
  {
    std::ofstream out(fg.path);
    out << R"({"kind": "uftoc", "version": 1, "dims": {"n_x": 1, "n_w": 1}, "N": 1,
               "x0": [0.0]})";
  }
  try {
    load_problem(fg.path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("stages") != std::string::npos);
  }
}

TEST_CASE("schema version mismatches are rejected") {
  FileGuard fg{temp_path("version")};
  {
    std::ofstream out(fg.path);
    out << R"({"kind": "uftoc", "version": 2})";
  }
  try {
    load_problem(fg.path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }
}

TEST_CASE("asymmetric weight matrices are symmetrized at load") {
  FileGuard fg{temp_path("asym")};
  {
    std::ofstream out(fg.path);
    out << R"({"kind": "uftoc", "version": 1, "dims": {"n_x": 2, "n_w": 1}, "N": 1,
      "x0": [0.0, 0.0],
      "stages": [{
        "Q_x": [[1.0, 0.3], [0.1, 1.0]],
        "Q_xw": [[0.0], [0.0]],
        "Q_w": [[1.0]],
        "l_x": [0.0, 0.0], "l_w": [0.0], "c": 0.0,
        "A": [[1.0, 0.0], [0.0, 1.0]],
        "B": [[1.0], [0.0]],
        "a": [0.0, 0.0]}],
      "terminal": {"Q_x": [[0.0, 0.0], [0.0, 0.0]], "l": [0.0, 0.0], "c": 0.0}})";
  }
  AnyProblem loaded = load_problem(fg.path);
  const UftocProblem& p = std::get<UftocProblem>(loaded);
  CHECK(p.stages[0].Q_x(0, 1) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(exact_eq(p.stages[0].Q_x, MatrixXd(p.stages[0].Q_x.transpose())));
}

TEST_CASE("non uniform stage widths are rejected by the file writer") {
  UftocProblem p = scalar_chain();
  UftocStage wide = p.stages[0];
  wide.B = MatrixXd::Ones(1, 2);
  wide.Q_w = MatrixXd::Identity(2, 2);
  wide.Q_xw = MatrixXd::Zero(1, 2);
  wide.l_w = VectorXd::Zero(2);
  p.stages.insert(p.stages.begin(), wide);
  p.n_w = 2;
  FileGuard fg{temp_path("ragged")};
  CHECK_THROWS_AS(save_problem(p, fg.path), ParseError);
}
