#pragma once

#include <iosfwd>
#include <string>

#include <parric/generator.hpp>

namespace parric::cli {

/// Picks the worker count: an explicit request wins, then the PARRIC_WORKERS
/// environment variable, then the hardware concurrency (at least 1).
int resolve_workers(int requested);

struct GenArgs {
  GenSpec spec;
  std::string output;
};

struct SolveArgs {
  std::string method = "serial";  // serial | parallel | dense | rts
  std::string input;
  std::string output;
  int n_s = 2;
  int workers = 0;  // 0: resolve from environment
};

struct ValidateArgs {
  std::string input;
  int n_s = 2;
  int workers = 0;
};

int run_gen(const GenArgs& args);
int run_solve(const SolveArgs& args);
int run_validate(const ValidateArgs& args, std::ostream& out);

}  // namespace parric::cli
