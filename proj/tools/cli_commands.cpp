#include "cli_commands.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>
#include <vector>

#include <parric/errors.hpp>
#include <parric/mhe.hpp>
#include <parric/numeric.hpp>
#include <parric/oracles.hpp>
#include <parric/problem_io.hpp>
#include <parric/riccati.hpp>
#include <parric/tree.hpp>

namespace parric::cli {
namespace {

using nlohmann::json;

json vec_to_json(const VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json vecs_to_json(const std::vector<VectorXd>& vs) {
  json a = json::array();
  for (const VectorXd& v : vs) a.push_back(vec_to_json(v));
  return a;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << j.dump(1) << '\n';
}

Solution solve_uftoc(const UftocProblem& p, const std::string& method, int n_s,
                     int workers) {
  if (method == "serial") return solve_serial(p);
  if (method == "parallel") return solve_parallel(p, n_s, workers).first;
  if (method == "dense") return dense_kkt_solve(p);
  throw ParseError("unknown method '" + method + "'");
}

struct EstimateRun {
  MheEstimate e;
  double cost = 0.0;
};

EstimateRun solve_mhe(const MheProblem& m, const std::string& method, int n_s,
                      int workers) {
  UftocProblem p = mhe_to_uftoc(m);
  Solution s = solve_uftoc(p, method, n_s, workers);
  return {extract_mhe_solution(s, m), s.cost};
}

double trajectory_dev(const std::vector<VectorXd>& a, const std::vector<VectorXd>& b) {
  double d = (a.size() == b.size()) ? 0.0 : 1.0;
  for (size_t i = 0; i < std::min(a.size(), b.size()); ++i)
    d = std::max(d, rel_deviation(a[i], b[i]));
  return d;
}

double solution_dev(const Solution& a, const Solution& b) {
  double d = trajectory_dev(a.x, b.x);
  d = std::max(d, trajectory_dev(a.w, b.w));
  d = std::max(d, trajectory_dev(a.lambda, b.lambda));
  return std::max(d, rel_deviation(a.cost, b.cost));
}

double estimate_dev(const EstimateRun& a, const EstimateRun& b) {
  double d = trajectory_dev(a.e.x_hat, b.e.x_hat);
  d = std::max(d, trajectory_dev(a.e.w_hat, b.e.w_hat));
  d = std::max(d, trajectory_dev(a.e.v_hat, b.e.v_hat));
  return std::max(d, rel_deviation(a.cost, b.cost));
}

constexpr double kValidateTol = 1e-7;

// Dense solves above this horizon are omitted from validation; the cap
// matches the benchmark runner.
constexpr int kValidateDenseCap = 200;

}  // namespace

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PARRIC_WORKERS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
    std::cerr << "warning: ignoring PARRIC_WORKERS='" << env << "'\n";
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

int run_gen(const GenArgs& args) {
  AnyProblem p = generate_problem(args.spec);
  std::visit([&](const auto& prob) { save_problem(prob, args.output); }, p);
  return 0;
}

int run_solve(const SolveArgs& args) {
  const int workers = resolve_workers(args.workers);
  AnyProblem ap = load_problem(args.input);

  if (std::holds_alternative<UftocProblem>(ap)) {
    if (args.method == "rts") {
      std::cerr << "error: method 'rts' applies to estimation problems only\n";
      return 1;
    }
    const auto& p = std::get<UftocProblem>(ap);
    save_solution(solve_uftoc(p, args.method, args.n_s, workers), args.output);
    return 0;
  }

  const auto& m = std::get<MheProblem>(ap);
  json j;
  j["kind"] = "mhe_estimate";
  j["version"] = 1;
  if (args.method == "rts") {
    j["x_hat"] = vecs_to_json(rts_smooth(m));
  } else {
    EstimateRun run = solve_mhe(m, args.method, args.n_s, workers);
    j["cost"] = run.cost;
    j["x_hat"] = vecs_to_json(run.e.x_hat);
    j["w_hat"] = vecs_to_json(run.e.w_hat);
    j["v_hat"] = vecs_to_json(run.e.v_hat);
    j["prior_mismatch"] = vec_to_json(run.e.prior_mismatch);
  }
  write_json_file(j, args.output);
  return 0;
}

int run_validate(const ValidateArgs& args, std::ostream& out) {
  const int workers = resolve_workers(args.workers);
  AnyProblem ap = load_problem(args.input);
  double max_dev = 0.0;
  auto report = [&](const std::string& label, double d) {
    out << label << ": " << d << '\n';
    max_dev = std::max(max_dev, d);
  };

  if (std::holds_alternative<UftocProblem>(ap)) {
    const auto& p = std::get<UftocProblem>(ap);
    Solution serial = solve_serial(p);
    Solution parallel = solve_parallel(p, args.n_s, workers).first;
    report("serial vs parallel", solution_dev(serial, parallel));
    if (p.horizon() <= kValidateDenseCap) {
      Solution dense = dense_kkt_solve(p);
      report("serial vs dense", solution_dev(serial, dense));
      report("parallel vs dense", solution_dev(parallel, dense));
    } else {
      out << "dense: skipped (horizon above " << kValidateDenseCap << ")\n";
    }
  } else {
    const auto& m = std::get<MheProblem>(ap);
    EstimateRun serial = solve_mhe(m, "serial", args.n_s, workers);
    EstimateRun parallel = solve_mhe(m, "parallel", args.n_s, workers);
    report("serial vs parallel", estimate_dev(serial, parallel));
    if (m.n_mhe() + 2 <= kValidateDenseCap) {
      EstimateRun dense = solve_mhe(m, "dense", args.n_s, workers);
      report("serial vs dense", estimate_dev(serial, dense));
      report("parallel vs dense", estimate_dev(parallel, dense));
    } else {
      out << "dense: skipped (horizon above " << kValidateDenseCap << ")\n";
    }
    bool cross = false;
    for (const MheStage& s : m.stages)
      if (s.Q_wv.size() > 0 && s.Q_wv.cwiseAbs().maxCoeff() > 0.0) cross = true;
    if (cross) {
      out << "rts: skipped (cross correlated noise)\n";
    } else {
      // The smoother covers k = 0..N_mhe; the pipeline estimate additionally
      // carries the one step prediction, which stays out of the comparison.
      std::vector<VectorXd> rts = rts_smooth(m);
      std::vector<VectorXd> window(serial.e.x_hat.begin(),
                                   serial.e.x_hat.begin() + rts.size());
      report("serial vs rts states", trajectory_dev(window, rts));
    }
  }

  out << "max deviation: " << max_dev << '\n';
  return max_dev <= kValidateTol ? 0 : 1;
}

}  // namespace parric::cli
