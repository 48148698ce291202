#include "parric/problem_io.hpp"

#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "parric/errors.hpp"

namespace parric {

using nlohmann::json;

namespace {

json to_json(const VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

const json& req(const json& j, const char* key, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError("missing '" + std::string(key) + "' in " + ctx);
  return *it;
}

VectorXd parse_vector(const json& j, const std::string& ctx) {
  if (!j.is_array()) throw ParseError(ctx + " must be an array of numbers");
  VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError(ctx + " must be an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

MatrixXd parse_matrix(const json& j, const std::string& ctx) {
  if (!j.is_array()) throw ParseError(ctx + " must be a nested row-major array");
  const std::size_t rows = j.size();
  if (rows == 0) return MatrixXd(0, 0);
  if (!j[0].is_array()) throw ParseError(ctx + " must be a nested row-major array");
  const std::size_t cols = j[0].size();
  MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw ParseError(ctx + " has ragged rows");
    }
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) throw ParseError(ctx + " must contain numbers");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
    }
  }
  return m;
}

MatrixXd parse_symmetric(const json& j, const std::string& ctx) {
  MatrixXd m = parse_matrix(j, ctx);
  if (m.rows() == m.cols() && asymmetry(m) > 1e-10) {
    std::cerr << "warning: " << ctx << " asymmetric beyond 1e-10 relative, symmetrizing\n";
  }
  return m.rows() == m.cols() ? symmetrized(m) : m;
}

json load_root(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError("parse failure in '" + path + "': " + e.what());
  }
  return j;
}

void check_header(const json& j, const std::string& path) {
  int version = req(j, "version", path).get<int>();
  if (version != 1) {
    throw ParseError("schema version mismatch in '" + path + "': got " +
                     std::to_string(version) + ", expected 1");
  }
}

UftocProblem parse_uftoc(const json& j, const std::string& path) {
  UftocProblem p;
  const json& dims = req(j, "dims", path);
  p.n_x = req(dims, "n_x", "dims").get<int>();
  p.n_w = req(dims, "n_w", "dims").get<int>();
  const int n = req(j, "N", path).get<int>();
  p.x0 = parse_vector(req(j, "x0", path), "x0");
  const json& stages = req(j, "stages", path);
  if (static_cast<int>(stages.size()) != n) {
    throw ParseError("'stages' holds " + std::to_string(stages.size()) +
                     " entries, 'N' says " + std::to_string(n));
  }
  p.stages.resize(n);
  for (int t = 0; t < n; ++t) {
    const json& s = stages[t];
    const std::string ctx = "stages[" + std::to_string(t) + "]";
    UftocStage& st = p.stages[t];
    st.Q_x = parse_symmetric(req(s, "Q_x", ctx), ctx + ".Q_x");
    st.Q_xw = parse_matrix(req(s, "Q_xw", ctx), ctx + ".Q_xw");
    st.Q_w = parse_symmetric(req(s, "Q_w", ctx), ctx + ".Q_w");
    st.l_x = parse_vector(req(s, "l_x", ctx), ctx + ".l_x");
    st.l_w = parse_vector(req(s, "l_w", ctx), ctx + ".l_w");
    st.c = req(s, "c", ctx).get<double>();
    st.A = parse_matrix(req(s, "A", ctx), ctx + ".A");
    st.B = parse_matrix(req(s, "B", ctx), ctx + ".B");
    st.a = parse_vector(req(s, "a", ctx), ctx + ".a");
  }
  const json& term = req(j, "terminal", path);
  p.terminal.Q_x = parse_symmetric(req(term, "Q_x", "terminal"), "terminal.Q_x");
  p.terminal.l = parse_vector(req(term, "l", "terminal"), "terminal.l");
  p.terminal.c = req(term, "c", "terminal").get<double>();
  return p;
}

MheProblem parse_mhe(const json& j, const std::string& path) {
  MheProblem m;
  const json& dims = req(j, "dims", path);
  m.n_x = req(dims, "n_x", "dims").get<int>();
  m.n_w = req(dims, "n_w", "dims").get<int>();
  m.n_y = req(dims, "n_y", "dims").get<int>();
  const int n_mhe = req(j, "N_mhe", path).get<int>();
  m.x0_prior = parse_vector(req(j, "x0_prior", path), "x0_prior");
  m.P0_prior = parse_symmetric(req(j, "P0_prior", path), "P0_prior");
  const json& stages = req(j, "stages", path);
  if (static_cast<int>(stages.size()) != n_mhe + 1) {
    throw ParseError("'stages' holds " + std::to_string(stages.size()) +
                     " entries, expected N_mhe + 1 = " + std::to_string(n_mhe + 1));
  }
  m.stages.resize(n_mhe + 1);
  for (int k = 0; k <= n_mhe; ++k) {
    const json& s = stages[k];
    const std::string ctx = "stages[" + std::to_string(k) + "]";
    MheStage& st = m.stages[k];
    st.A = parse_matrix(req(s, "A", ctx), ctx + ".A");
    st.B = parse_matrix(req(s, "B", ctx), ctx + ".B");
    st.C = parse_matrix(req(s, "C", ctx), ctx + ".C");
    st.a = parse_vector(req(s, "a", ctx), ctx + ".a");
    st.d = parse_vector(req(s, "d", ctx), ctx + ".d");
    st.y = parse_vector(req(s, "y", ctx), ctx + ".y");
    st.w_nom = parse_vector(req(s, "w_nom", ctx), ctx + ".w_nom");
    st.v_nom = parse_vector(req(s, "v_nom", ctx), ctx + ".v_nom");
    st.Q_w = parse_symmetric(req(s, "Q_w", ctx), ctx + ".Q_w");
    st.Q_wv = parse_matrix(req(s, "Q_wv", ctx), ctx + ".Q_wv");
    st.Q_v = parse_symmetric(req(s, "Q_v", ctx), ctx + ".Q_v");
  }
  return m;
}

void write_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << j.dump(1) << '\n';
}

}  // namespace

AnyProblem load_problem(const std::string& path) {
  json j = load_root(path);
  check_header(j, path);
  std::string kind = req(j, "kind", path).get<std::string>();
  if (kind == "uftoc") return parse_uftoc(j, path);
  if (kind == "mhe") return parse_mhe(j, path);
  throw ParseError("unknown problem kind '" + kind + "' in '" + path + "'");
}

void save_problem(const UftocProblem& p, const std::string& path) {
  for (int t = 0; t < p.horizon(); ++t) {
    if (p.input_dim(t) != p.n_w) {
      throw ParseError("schema v1 stores a uniform input width; stage " + std::to_string(t) +
                       " differs from n_w");
    }
  }
  json j;
  j["kind"] = "uftoc";
  j["version"] = 1;
  j["dims"] = {{"n_x", p.n_x}, {"n_w", p.n_w}};
  j["N"] = p.horizon();
  j["x0"] = to_json(p.x0);
  json stages = json::array();
  for (const UftocStage& s : p.stages) {
    stages.push_back({{"Q_x", to_json(s.Q_x)},
                      {"Q_xw", to_json(s.Q_xw)},
                      {"Q_w", to_json(s.Q_w)},
                      {"l_x", to_json(s.l_x)},
                      {"l_w", to_json(s.l_w)},
                      {"c", s.c},
                      {"A", to_json(s.A)},
                      {"B", to_json(s.B)},
                      {"a", to_json(s.a)}});
  }
  j["stages"] = std::move(stages);
  j["terminal"] = {{"Q_x", to_json(p.terminal.Q_x)},
                   {"l", to_json(p.terminal.l)},
                   {"c", p.terminal.c}};
  write_file(j, path);
}

void save_problem(const MheProblem& m, const std::string& path) {
  json j;
  j["kind"] = "mhe";
  j["version"] = 1;
  j["dims"] = {{"n_x", m.n_x}, {"n_w", m.n_w}, {"n_y", m.n_y}};
  j["N_mhe"] = m.n_mhe();
  j["x0_prior"] = to_json(m.x0_prior);
  j["P0_prior"] = to_json(m.P0_prior);
  json stages = json::array();
  for (const MheStage& s : m.stages) {
    stages.push_back({{"A", to_json(s.A)},
                      {"B", to_json(s.B)},
                      {"C", to_json(s.C)},
                      {"a", to_json(s.a)},
                      {"d", to_json(s.d)},
                      {"y", to_json(s.y)},
                      {"w_nom", to_json(s.w_nom)},
                      {"v_nom", to_json(s.v_nom)},
                      {"Q_w", to_json(s.Q_w)},
                      {"Q_wv", to_json(s.Q_wv)},
                      {"Q_v", to_json(s.Q_v)}});
  }
  j["stages"] = std::move(stages);
  write_file(j, path);
}

void save_solution(const Solution& s, const std::string& path) {
  json j;
  j["kind"] = "solution";
  j["version"] = 1;
  j["cost"] = s.cost;
  json x = json::array(), w = json::array(), lambda = json::array();
  for (const VectorXd& v : s.x) x.push_back(to_json(v));
  for (const VectorXd& v : s.w) w.push_back(to_json(v));
  for (const VectorXd& v : s.lambda) lambda.push_back(to_json(v));
  j["x"] = std::move(x);
  j["w"] = std::move(w);
  j["lambda"] = std::move(lambda);
  write_file(j, path);
}

Solution load_solution(const std::string& path) {
  json j = load_root(path);
  check_header(j, path);
  if (req(j, "kind", path).get<std::string>() != "solution") {
    throw ParseError("'" + path + "' is not a solution file");
  }
  Solution s;
  s.cost = req(j, "cost", path).get<double>();
  for (const json& v : req(j, "x", path)) s.x.push_back(parse_vector(v, "x"));
  for (const json& v : req(j, "w", path)) s.w.push_back(parse_vector(v, "w"));
  for (const json& v : req(j, "lambda", path)) s.lambda.push_back(parse_vector(v, "lambda"));
  return s;
}

}  // namespace parric
