#include <iostream>
#include <string>

#include <parric/errors.hpp>

#include "CLI11.hpp"
#include "bench.hpp"
#include "cli_commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"parric: structured trajectory estimation solver toolkit"};
  app.require_subcommand(1);
  int rc = 0;

  parric::cli::GenArgs gen;
  CLI::App* g = app.add_subcommand("gen", "Generate a seeded random problem file");
  g->add_option("--kind", gen.spec.kind, "Problem kind")
      ->check(CLI::IsMember({"uftoc", "mhe"}))
      ->capture_default_str();
  g->add_option("--nx", gen.spec.n_x, "State dimension")->capture_default_str();
  g->add_option("--nw", gen.spec.n_w, "Input dimension")->capture_default_str();
  g->add_option("--ny", gen.spec.n_y, "Measurement dimension (mhe)")->capture_default_str();
  g->add_option("--horizon", gen.spec.horizon, "Stage count (uftoc) or window length (mhe)")
      ->capture_default_str();
  g->add_option("--seed", gen.spec.seed, "Generator seed")->capture_default_str();
  g->add_option("--spectral-radius", gen.spec.spectral_radius,
                "Spectral radius every A matrix is rescaled to")
      ->capture_default_str();
  g->add_flag("--cross,!--no-cross", gen.spec.cross_correlated,
              "Draw jointly correlated process and measurement noise (mhe)")
      ->capture_default_str();
  g->add_option("--output", gen.output, "Problem file to write")->required();
  g->callback([&] { rc = parric::cli::run_gen(gen); });

  parric::cli::SolveArgs solve;
  CLI::App* s = app.add_subcommand("solve", "Solve a problem file");
  s->add_option("--method", solve.method, "Solver to use")
      ->check(CLI::IsMember({"serial", "parallel", "dense", "rts"}))
      ->capture_default_str();
  s->add_option("--input", solve.input, "Problem file")->required();
  s->add_option("--output", solve.output, "Result file to write")->required();
  s->add_option("--ns", solve.n_s, "Batch length for the parallel solver")
      ->capture_default_str();
  s->add_option("--workers", solve.workers,
                "Worker threads (0: PARRIC_WORKERS or hardware concurrency)")
      ->capture_default_str();
  s->callback([&] { rc = parric::cli::run_solve(solve); });

  parric::cli::ValidateArgs val;
  CLI::App* v = app.add_subcommand(
      "validate", "Cross check every applicable solver on one problem file");
  v->add_option("--input", val.input, "Problem file")->required();
  v->add_option("--ns", val.n_s, "Batch length for the parallel solver")
      ->capture_default_str();
  v->add_option("--workers", val.workers,
                "Worker threads (0: PARRIC_WORKERS or hardware concurrency)")
      ->capture_default_str();
  v->callback([&] { rc = parric::cli::run_validate(val, std::cout); });

  std::string bench_config;
  std::string bench_out;
  CLI::App* b = app.add_subcommand("bench", "Run a benchmark campaign to CSV");
  b->add_option("--config", bench_config, "JSON campaign description")->required();
  b->add_option("--out", bench_out, "CSV file to write")->required();
  b->callback([&] {
    rc = parric::cli::run_bench(parric::cli::load_bench_config(bench_config), bench_out,
                                std::cout);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return rc;
}
