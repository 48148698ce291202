#include "bench.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <parric/errors.hpp>
#include <parric/generator.hpp>
#include <parric/mhe.hpp>
#include <parric/oracles.hpp>
#include <parric/problem_io.hpp>
#include <parric/riccati.hpp>
#include <parric/tree.hpp>

#include "cli_commands.hpp"

namespace parric::cli {
namespace {

using clock_type = std::chrono::steady_clock;

struct Row {
  std::string method;
  int n = 0;
  std::uint64_t seed = 0;
  double wall = 0.0;
  std::int64_t critical = 0;
  std::int64_t messages = 0;
  double residual = 0.0;
  std::string status = "ok";
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool residual_within_bounds(const UftocProblem& p, const KktResidual& r) {
  double a_scale = 0.0;
  double l_scale = 0.0;
  for (const UftocStage& s : p.stages) {
    a_scale = std::max(a_scale, s.a.lpNorm<Eigen::Infinity>());
    l_scale = std::max(l_scale, s.l_x.lpNorm<Eigen::Infinity>());
    if (s.l_w.size() > 0) l_scale = std::max(l_scale, s.l_w.lpNorm<Eigen::Infinity>());
  }
  if (p.terminal.l.size() > 0)
    l_scale = std::max(l_scale, p.terminal.l.lpNorm<Eigen::Infinity>());
  const bool primal_ok =
      r.primal_norm <= 1e-8 * (1.0 + p.x0.lpNorm<Eigen::Infinity>() + a_scale);
  const bool stat_ok = r.stationarity_norm <= 1e-8 * (1.0 + l_scale);
  return primal_ok && stat_ok;
}

/// Runs warm-up plus cfg.reps timed repetitions of fn, then one instrumented
/// repetition that fills the row's stats and residual.
template <class RunFn, class InstrumentFn>
void time_method(const BenchConfig& cfg, RunFn&& run, InstrumentFn&& instrument,
                 Row& row) {
  run();  // warm-up, discarded
  const int reps = std::max(cfg.reps, 3);
  std::vector<double> times;
  times.reserve(reps);
  for (int i = 0; i < reps; ++i) {
    auto t0 = clock_type::now();
    run();
    times.push_back(std::chrono::duration<double>(clock_type::now() - t0).count());
  }
  row.wall = median(times);
  instrument();
}

Row bench_one(const BenchConfig& cfg, const std::string& method, int n,
              std::uint64_t seed, int workers) {
  Row row;
  row.method = method;
  row.n = n;
  row.seed = seed;

  const bool is_mhe = cfg.kind == "mhe";
  const int solved_horizon = is_mhe ? n + 2 : n;
  if (method == "dense" && solved_horizon > kDenseHorizonCap) {
    row.status = "skipped";
    return row;
  }

  try {
    GenSpec spec;
    spec.kind = cfg.kind;
    spec.n_x = cfg.n_x;
    spec.n_w = cfg.n_w;
    spec.n_y = cfg.n_y;
    spec.horizon = n;
    spec.seed = seed;
    spec.spectral_radius = cfg.spectral_radius;
    spec.cross_correlated = cfg.cross_correlated;

    if (method == "rts") {
      if (!is_mhe) throw ParseError("method 'rts' needs an mhe problem kind");
      MheProblem m = generate_mhe(spec);
      time_method(
          cfg, [&] { rts_smooth(m); }, [] {}, row);
      return row;
    }

    UftocProblem transformed;  // the problem the residual is checked against
    Solution sol;
    if (is_mhe) {
      MheProblem m = generate_mhe(spec);
      auto run = [&] {
        UftocProblem p = mhe_to_uftoc(m);
        Solution s = (method == "serial")    ? solve_serial(p)
                     : (method == "parallel") ? solve_parallel(p, cfg.n_s, workers).first
                                              : dense_kkt_solve(p);
        extract_mhe_solution(s, m);
      };
      auto instrument = [&] {
        transformed = mhe_to_uftoc(m);
        if (method == "parallel") {
          auto [s, stats] = solve_parallel(transformed, cfg.n_s, workers);
          sol = std::move(s);
          row.critical = stats.critical_path_stages;
          row.messages = stats.messages_up + stats.messages_down;
        } else if (method == "serial") {
          OpCounts counts;
          sol = solve_serial(transformed, GSolveMode::cholesky, &counts);
          row.critical = counts.factorize_stages;
        } else {
          sol = dense_kkt_solve(transformed);
        }
      };
      time_method(cfg, run, instrument, row);
    } else {
      transformed = generate_uftoc(spec);
      auto run = [&] {
        if (method == "serial")
          solve_serial(transformed);
        else if (method == "parallel")
          solve_parallel(transformed, cfg.n_s, workers);
        else
          dense_kkt_solve(transformed);
      };
      auto instrument = [&] {
        if (method == "parallel") {
          auto [s, stats] = solve_parallel(transformed, cfg.n_s, workers);
          sol = std::move(s);
          row.critical = stats.critical_path_stages;
          row.messages = stats.messages_up + stats.messages_down;
        } else if (method == "serial") {
          OpCounts counts;
          sol = solve_serial(transformed, GSolveMode::cholesky, &counts);
          row.critical = counts.factorize_stages;
        } else {
          sol = dense_kkt_solve(transformed);
        }
      };
      time_method(cfg, run, instrument, row);
    }

    KktResidual r = kkt_residual(transformed, sol);
    row.residual = std::max(r.stationarity_norm, r.primal_norm);
    if (!residual_within_bounds(transformed, r)) row.status = "failed";
  } catch (const std::exception&) {
    row.status = "failed";
    row.wall = 0.0;
    row.critical = 0;
    row.messages = 0;
    row.residual = 0.0;
  }
  return row;
}

}  // namespace

BenchConfig load_bench_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad bench config '" + path + "': " + e.what());
  }
  if (!j.contains("N_list")) throw ParseError("missing 'N_list' in bench config");
  BenchConfig cfg;
  cfg.N_list = j.at("N_list").get<std::vector<int>>();
  cfg.kind = j.value("kind", cfg.kind);
  cfg.n_x = j.value("n_x", cfg.n_x);
  cfg.n_w = j.value("n_w", cfg.n_w);
  cfg.n_y = j.value("n_y", cfg.n_y);
  cfg.n_s = j.value("N_s", cfg.n_s);
  cfg.workers = j.value("workers", cfg.workers);
  if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("methods")) cfg.methods = j.at("methods").get<std::vector<std::string>>();
  cfg.reps = j.value("reps", cfg.reps);
  cfg.cross_correlated = j.value("cross_correlated", cfg.cross_correlated);
  cfg.spectral_radius = j.value("spectral_radius", cfg.spectral_radius);
  if (cfg.kind != "mhe" && cfg.kind != "uftoc")
    throw ParseError("unknown problem kind '" + cfg.kind + "' in bench config");
  return cfg;
}

int run_bench(const BenchConfig& cfg, const std::string& out_csv, std::ostream& log) {
  const int workers = resolve_workers(cfg.workers);
  std::ofstream csv(out_csv);
  if (!csv) {
    log << "error: cannot open '" << out_csv << "' for writing\n";
    return 1;
  }
  csv << kBenchCsvHeader << '\n';

  for (const std::string& method : cfg.methods) {
    for (int n : cfg.N_list) {
      for (std::uint64_t seed : cfg.seeds) {
        Row row = bench_one(cfg, method, n, seed, workers);
        const bool uses_tree = method == "parallel";
        char line[256];
        std::snprintf(line, sizeof(line), "%s,%d,%d,%d,%d,%d,%d,%llu,%.9e,%lld,%lld,%.3e,%s",
                      row.method.c_str(), row.n, cfg.n_x, cfg.n_w,
                      cfg.kind == "mhe" ? cfg.n_y : 0, uses_tree ? cfg.n_s : 0,
                      uses_tree ? workers : 0,
                      static_cast<unsigned long long>(row.seed), row.wall,
                      static_cast<long long>(row.critical),
                      static_cast<long long>(row.messages), row.residual,
                      row.status.c_str());
        csv << line << '\n';
        log << "bench " << row.method << " N=" << row.n << " seed=" << row.seed
            << " wall=" << row.wall << "s status=" << row.status << '\n';
      }
    }
  }
  return csv.good() ? 0 : 1;
}

}  // namespace parric::cli
