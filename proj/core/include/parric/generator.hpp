#pragma once

#include <cstdint>
#include <string>

#include "parric/problem_io.hpp"

namespace parric {

/// Knobs for the seeded test-problem generator.  The same spec always yields
/// byte-identical problems: the draw order is fixed and nothing depends on
/// the environment.
struct GenSpec {
  std::string kind = "mhe";  // "mhe" or "uftoc"
  int n_x = 4;
  int n_w = 2;
  int n_y = 2;               // mhe only
  int horizon = 10;          // N for uftoc, N_mhe for mhe
  std::uint64_t seed = 0;
  double spectral_radius = 0.95;  // every A is rescaled to this
  bool cross_correlated = true;   // mhe only: draw a joint noise weight with Q_wv != 0
};

/// Random stage weights are built as M M' + 0.1 I (SPD by construction);
/// measurements come from a noisy rollout of the generated model.
UftocProblem generate_uftoc(const GenSpec& spec);
MheProblem generate_mhe(const GenSpec& spec);
AnyProblem generate_problem(const GenSpec& spec);

}  // namespace parric
