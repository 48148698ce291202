#include "parric/tree.hpp"

#include <chrono>
#include <nlohmann/json.hpp>

#include "parric/errors.hpp"
#include "parric/task_pool.hpp"

namespace parric {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

UftocProblem assemble_master(const UftocProblem& root, const std::vector<ReducedStage>& reduced) {
  UftocProblem m;
  m.n_x = root.n_x;
  m.n_w = root.n_x;
  m.x0 = root.x0;
  m.stages.resize(reduced.size());
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    const ReducedStage& r = reduced[i];
    UftocStage& s = m.stages[i];
    s.Q_x = r.Q_x_hat;
    s.Q_xw = MatrixXd::Zero(m.n_x, m.n_x);
    s.Q_w = r.Q_w_hat;
    s.l_x = r.l_x_hat;
    s.l_w = VectorXd::Zero(m.n_x);
    s.c = r.c_hat;
    s.A = r.A_hat;
    s.B = r.B_hat;
    s.a = r.a_hat;
  }
  m.terminal = TerminalCost::zero(m.n_x);
  return m;
}

}  // namespace

TreePlan plan_tree(int n, int n_s) {
  if (n < 1) throw DimensionMismatch("plan_tree: horizon must be at least 1");
  if (n_s < 2) throw DimensionMismatch("plan_tree: batch length must be at least 2");
  TreePlan plan;
  plan.n_s = n_s;
  plan.horizons.push_back(n);
  while (plan.horizons.back() > n_s) {
    const int cur = plan.horizons.back();
    const int q = cur / n_s;  // last batch absorbs cur % n_s extra stages
    std::vector<int> b(q + 1);
    for (int i = 0; i < q; ++i) b[i] = i * n_s;
    b[q] = cur;
    plan.boundaries.push_back(std::move(b));
    plan.horizons.push_back(q);
  }
  return plan;
}

void to_json(nlohmann::json& j, const TreeStats& st) {
  j = nlohmann::json{{"reduction_levels", st.reduction_levels},
                     {"depth_phases", st.depth_phases},
                     {"messages_up", st.messages_up},
                     {"messages_down", st.messages_down},
                     {"critical_path_stages", st.critical_path_stages},
                     {"max_batch_len", st.max_batch_len},
                     {"phase_wall_s", st.phase_wall_s}};
}

UpwardResult upward_pass(const UftocProblem& p, const TreePlan& plan, int workers,
                         TreeStats* stats) {
  const int m = plan.reduction_levels();
  UpwardResult up;
  up.masters.resize(m);
  up.caches.resize(m);
  for (int k = 0; k < m; ++k) {
    const UftocProblem& cur = (k == 0) ? p : up.masters[k - 1];
    const std::vector<int>& b = plan.boundaries[k];
    const int q = plan.batches(k);
    const GSolveMode mode = (k == 0) ? GSolveMode::cholesky : GSolveMode::eigen_psd;
    auto t0 = Clock::now();
    std::vector<ReducedStage> reduced(q);
    std::vector<std::int64_t> reduce_counts(q, 0);
    up.caches[k].resize(q);
    run_tasks(q, workers, [&](int j) {
      // The batch holding the end of the horizon carries the problem's own
      // terminal cost into its preliminary sweep.
      std::optional<TerminalCost> share;
      if (j == q - 1) share = cur.terminal;
      OpCounts counts;
      auto [rs, cache] = reduce_subproblem(cur, b[j], b[j + 1], mode, share, &counts);
      reduced[j] = std::move(rs);
      up.caches[k][j] = std::move(cache);
      reduce_counts[j] = counts.reduce_stages;
    });
    up.masters[k] = assemble_master(p, reduced);
    if (stats) {
      stats->messages_up += q;
      int longest = 0;
      std::int64_t max_count = 0;
      for (int j = 0; j < q; ++j) {
        longest = std::max(longest, b[j + 1] - b[j]);
        max_count = std::max(max_count, reduce_counts[j]);
      }
      stats->max_batch_len.push_back(longest);
      stats->critical_path_stages += max_count;
      stats->phase_wall_s.push_back(seconds_since(t0));
    }
  }
  return up;
}

Solution downward_pass(const UftocProblem& p, const TreePlan& plan, const UpwardResult& up,
                       int workers, const TreeOptions& opts, TreeStats* stats) {
  const int m = plan.reduction_levels();
  const UftocProblem& top = (m == 0) ? p : up.masters[m - 1];

  auto t0 = Clock::now();
  OpCounts top_counts;
  const GSolveMode top_mode = (m == 0) ? GSolveMode::cholesky : GSolveMode::eigen_psd;
  Factorization top_f = factorize(top, top_mode, std::nullopt, &top_counts);
  BackwardPass top_b = backward(top, top_f, std::nullopt, &top_counts);
  Solution top_sol = forward(top, top_f, top_b, p.x0, &top_counts);
  if (stats) {
    stats->critical_path_stages += top_counts.factorize_stages;
    stats->phase_wall_s.push_back(seconds_since(t0));
  }
  const double global_cost = top_sol.cost;
  if (m == 0) return top_sol;

  // Value-function and state arrays of the level currently acting as parent.
  std::vector<VectorXd> xs = std::move(top_sol.x);
  std::vector<MatrixXd> ps = std::move(top_f.P);
  std::vector<VectorXd> psis = std::move(top_b.psi);
  std::vector<double> cbars = std::move(top_b.cbar);
  Solution bottom;

  for (int k = m - 1; k >= 0; --k) {
    const UftocProblem& cur = (k == 0) ? p : up.masters[k - 1];
    const std::vector<int>& b = plan.boundaries[k];
    const int q = plan.batches(k);
    const int nk = plan.horizons[k];
    auto tk = Clock::now();

    std::vector<VectorXd> xs_k(nk + 1), psis_k;
    std::vector<MatrixXd> ps_k;
    std::vector<double> cbars_k;
    std::vector<VectorXd> ws_k, lambdas_k;
    if (k > 0) {
      ps_k.resize(nk + 1);
      psis_k.resize(nk + 1);
      cbars_k.resize(nk + 1);
    } else {
      ws_k.resize(nk);
      lambdas_k.resize(nk + 1);
    }
    std::vector<std::int64_t> factor_counts(q, 0);

    run_tasks(q, workers, [&](int j) {
      OpCounts counts;
      const bool cached = opts.use_cached_expansion && k == 0;
      ExpandResult er = expand_subproblem(up.caches[k][j], xs[j], ps[j + 1], psis[j + 1],
                                          cbars[j + 1], cached, &counts);
      factor_counts[j] = cached ? up.caches[k][j].local.horizon()
                                : counts.factorize_stages;
      const int len = b[j + 1] - b[j];
      double drift = (er.sol.x[len] - xs[j + 1]).norm();
      if (drift > 1e-6 * (1.0 + xs[j + 1].norm())) {
        throw BoundaryMismatch("batch " + std::to_string(j) + " at level " +
                               std::to_string(k) + " ended " + std::to_string(drift) +
                               " away from its parent boundary state");
      }
      // Boundary slots are deduplicated: the parent's state is kept, so only
      // the local indices [0, len) are written here.
      for (int t = 0; t < len; ++t) {
        xs_k[b[j] + t] = er.sol.x[t];
        if (k > 0) {
          ps_k[b[j] + t] = er.f->P[t];
          psis_k[b[j] + t] = er.b->psi[t];
          cbars_k[b[j] + t] = er.b->cbar[t];
        } else {
          ws_k[b[j] + t] = std::move(er.sol.w[t]);
          lambdas_k[b[j] + t] = std::move(er.sol.lambda[t]);
        }
      }
      if (j == q - 1) {
        xs_k[nk] = xs[q];  // parent's value, kept verbatim
        if (k > 0) {
          ps_k[nk] = er.f->P[len];
          psis_k[nk] = er.b->psi[len];
          cbars_k[nk] = er.b->cbar[len];
        } else {
          lambdas_k[nk] = std::move(er.sol.lambda[len]);
        }
      }
    });

    if (stats) {
      stats->messages_down += q;
      std::int64_t max_count = 0;
      for (int j = 0; j < q; ++j) max_count = std::max(max_count, factor_counts[j]);
      stats->critical_path_stages += max_count;
      stats->phase_wall_s.push_back(seconds_since(tk));
    }

    xs = std::move(xs_k);
    if (k > 0) {
      ps = std::move(ps_k);
      psis = std::move(psis_k);
      cbars = std::move(cbars_k);
    } else {
      bottom.x = std::move(xs);
      bottom.w = std::move(ws_k);
      bottom.lambda = std::move(lambdas_k);
    }
  }
  // The optimal value comes from the top problem's cost-to-go at x0.
  bottom.cost = global_cost;
  return bottom;
}

std::pair<Solution, TreeStats> solve_parallel(const UftocProblem& p, int n_s, int workers,
                                              const TreeOptions& opts) {
  TreePlan plan = plan_tree(p.horizon(), n_s);
  TreeStats stats;
  stats.reduction_levels = plan.reduction_levels();
  stats.depth_phases = 2 * plan.reduction_levels() + 1;
  UpwardResult up = upward_pass(p, plan, workers, &stats);
  Solution sol = downward_pass(p, plan, up, workers, opts, &stats);
  return {std::move(sol), std::move(stats)};
}

}  // namespace parric
