#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace parric::cli {

/// One benchmark campaign: every (method, N, seed) triple becomes one CSV
/// row.  Methods run sequentially; only the parallel solver threads
/// internally.
struct BenchConfig {
  std::string kind = "mhe";  // "mhe" or "uftoc"
  int n_x = 4;
  int n_w = 2;
  int n_y = 2;  // mhe only
  std::vector<int> N_list;
  int n_s = 2;
  int workers = 0;  // 0: resolve from environment
  std::vector<std::uint64_t> seeds = {1};
  std::vector<std::string> methods = {"serial", "parallel"};
  int reps = 3;  // timed repetitions, never below 3; one extra warm-up run
  bool cross_correlated = false;
  double spectral_radius = 0.95;
};

BenchConfig load_bench_config(const std::string& path);

inline constexpr char kBenchCsvHeader[] =
    "method,N,n_x,n_w,n_y,N_s,workers,seed,wall_time_s,critical_path,messages,"
    "max_residual,status";

/// Dense solves are skipped (status "skipped") above this horizon; their cost
/// grows with the cube of N times the state dimension.
inline constexpr int kDenseHorizonCap = 200;

/// Writes the CSV to out_csv and one progress line per row to log.  Timing
/// covers the solve only (problem generation and file output are outside the
/// clock); the first run of each row is a discarded warm-up and the reported
/// wall time is the median of the repetitions.  A method failure marks the
/// row "failed" and the campaign continues.  Returns 0 unless the CSV cannot
/// be written.
int run_bench(const BenchConfig& cfg, const std::string& out_csv, std::ostream& log);

}  // namespace parric::cli
