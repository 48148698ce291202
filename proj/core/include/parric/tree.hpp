#pragma once

#include <nlohmann/json_fwd.hpp>
#include <utility>
#include <vector>

#include "parric/reduction.hpp"

namespace parric {

/// Recursive batch partition of the horizon.  Level 0 partitions the original
/// stages; each batch condenses to one stage of the next level's problem, so
/// horizons[k+1] equals the number of level-k batches.  Partitioning stops
/// once the horizon fits in n_s stages, which the final (top) level solves
/// serially.
struct TreePlan {
  int n_s = 2;
  std::vector<int> horizons;                 // per level, horizons[0] = N
  std::vector<std::vector<int>> boundaries;  // boundaries[k] partitions [0, horizons[k]]

  int reduction_levels() const { return static_cast<int>(horizons.size()) - 1; }
  int batches(int level) const { return static_cast<int>(boundaries[level].size()) - 1; }
};

/// Splits every level into floor(N_k / n_s) batches of n_s stages, the last
/// batch absorbing the remainder (length in [n_s, 2 n_s - 1]; a level shorter
/// than 2 n_s collapses into a single batch).  Requires n_s >= 2, N >= 1.
TreePlan plan_tree(int n, int n_s);

struct TreeStats {
  int reduction_levels = 0;  // m
  int depth_phases = 0;      // 2m + 1: m reductions, top solve, m expansions
  std::int64_t messages_up = 0;             // one parent-bound record per batch reduction
  std::int64_t messages_down = 0;           // one child-bound record per batch expansion
  std::int64_t critical_path_stages = 0;    // sum over phases of the largest per-task
                                            // backward-sweep stage count
  std::vector<int> max_batch_len;           // per reduction level
  std::vector<double> phase_wall_s;         // 2m + 1 entries, upward levels first
};

void to_json(nlohmann::json& j, const TreeStats& st);

struct UpwardResult {
  // masters[k] is the condensed problem one level above reduction level k;
  // its stages come from the level-k batches in order, its terminal cost is
  // zero (the original terminal is carried by the last batch of level 0).
  std::vector<UftocProblem> masters;
  std::vector<std::vector<BatchCache>> caches;  // per reduction level
};

/// Runs the batch reductions level by level (each level's batches in
/// parallel), assembling the condensed problem that feeds the next level.
UpwardResult upward_pass(const UftocProblem& p, const TreePlan& plan, int workers,
                         TreeStats* stats = nullptr);

struct TreeOptions {
  // Reuse the cached preliminary sweeps when expanding the bottom level
  // instead of re-factorizing each batch.  Inner levels always re-factorize
  // (their expansions must produce cost-to-go arrays for their children).
  bool use_cached_expansion = false;
};

/// Solves the top problem serially, then walks the levels back down, handing
/// each batch its boundary state and terminal cost-to-go and stitching the
/// level-0 trajectories together (boundary states deduplicated, the parent's
/// value kept).  Throws BoundaryMismatch if a batch's final state drifts from
/// the boundary state its parent computed.
Solution downward_pass(const UftocProblem& p, const TreePlan& plan, const UpwardResult& up,
                       int workers, const TreeOptions& opts = {}, TreeStats* stats = nullptr);

/// plan_tree + upward_pass + downward_pass.  The returned trajectory is
/// bit-identical for every worker count: batches only ever write their own
/// output slots, so scheduling cannot change any floating-point result.
std::pair<Solution, TreeStats> solve_parallel(const UftocProblem& p, int n_s, int workers,
                                              const TreeOptions& opts = {});

}  // namespace parric
