// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The vrsplit authors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vrsplit/lowering.hpp"
#include "vrsplit/rng.hpp"

namespace vrsplit {

struct CccpSettings {
  int max_iters = 100;
  double objective_rel_tol = 1e-6;
  int restarts = 1;
  std::uint64_t seed = 1;
  SolveOptions backend;
};

struct CccpIterate {
  int iter = 0;
  double objective = 0;
  double max_residual = 0;  // worst relative violation of the original problem
  SolveStatus backend_status = SolveStatus::Optimal;
  double step_norm = 0;
};

struct CccpTrace {
  std::vector<CccpIterate> iterates;
  bool degraded = false;
  std::string note;
};

struct CccpRun {
  DecisionVars vars;
  double objective = 0;
  CccpTrace trace;
};

inline void write_trace_csv(const CccpTrace& trace, std::ostream& out) {
  out << "iter,objective,max_residual,backend_status\n";
  out.precision(17);
  for (const auto& it : trace.iterates)
    out << it.iter << "," << it.objective << "," << it.max_residual << ","
        << to_string(it.backend_status) << "\n";
}

// First-order affine minorant g(x0) + grad * (x - x0) of a convex function,
// expressed over the given variable ids.
inline LinExpr affine_minorant(double g0, std::span<const double> grad,
                               std::span<const double> x0,
                               std::span<const int> vars) {
  if (grad.size() != x0.size() || grad.size() != vars.size())
    throw std::invalid_argument("affine_minorant: size mismatch");
  LinExpr e;
  e.constant = g0;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    e.add(vars[i], grad[i]);
    e.constant -= grad[i] * x0[i];
  }
  return e;
}

// A strictly feasible starting point: random equal-power beamformers at half
// the power budget, SINR-tight auxiliaries, and uniformly spread tile rates
// scaled to fit the implied capacities.
inline DecisionVars initial_point(const DCProblem& p, std::uint64_t seed) {
  DecisionVars v = zero_vars(p);
  const int K = p.num_users();
  const int S = p.num_streams();
  const int N = p.radio.subcarriers;
  const int M = p.radio.antennas;
  const double B = p.radio.bandwidth_hz;

  const Philox4x32 gen(seed ^ 0xA5A5A5A55A5A5A5Aull);
  const double per_beam = std::sqrt(p.radio.power_w / 2.0 / (S * N));
  std::uint64_t counter = 0;
  for (int s = 0; s < S; ++s)
    for (int n = 0; n < N; ++n) {
      Eigen::VectorXcd w(M);
      for (int m = 0; m < M; ++m) {
        const auto z = gen.normal_pair(counter++);
        w[m] = std::complex<double>(z[0], z[1]);
      }
      v.w[s][n] = per_beam * w / w.norm();
    }

  for (int n = 0; n < N; ++n) {
    for (int k = 0; k < K; ++k) {
      v.u[k][n] = 1.0 + private_sinr(p, v, k, n);
      v.e[k][n] = B * std::log2(v.u[k][n]);
    }
    if (p.rate_splitting) {
      double worst = std::numeric_limits<double>::infinity();
      for (int k = 0; k < K; ++k) worst = std::min(worst, common_sinr(p, v, k, n));
      v.u[p.common_stream()][n] = 1.0 + worst;
      v.e[p.common_stream()][n] = B * std::log2(v.u[p.common_stream()][n]);
    }
  }

  double common_budget = 0;
  if (p.rate_splitting)
    for (int n = 0; n < N; ++n) common_budget += v.e[p.common_stream()][n];
  constexpr double kMargin = 0.95;
  for (int k = 0; k < K; ++k) {
    double private_budget = 0;
    for (int n = 0; n < N; ++n) private_budget += v.e[k][n];
    if (p.rate_splitting) v.d_c[k] = kMargin * common_budget / K;
    v.d_p[k] = kMargin * private_budget;
    const double tiles = static_cast<double>(p.tile_count(k));
    const double rate = std::min((v.d_c[k] + v.d_p[k]) / tiles, p.ladder.top());
    std::fill(v.R[k].begin(), v.R[k].end(), rate);
    std::fill(v.r[k].begin(), v.r[k].end(), rate);
    rebalance_rates_down(v, k, rate * tiles);
  }

  for (int k = 0; k < K; ++k) {
    const double floor_util = p.utility.value(std::min(v.r[k][0], p.ladder.top()));
    if (p.kind == FovCase::ip) v.gamma[k] = -floor_util;
    if (p.kind == FovCase::up) v.y[k] = floor_util;
  }
  return v;
}

// The concave-convex procedure: solve the lowered subproblem, move the
// linearization point, repeat. Objectives are nondecreasing since each
// iterate stays feasible for the next surrogate.
inline CccpRun solve_cccp(const DCProblem& p, const CccpSettings& settings,
                          const DecisionVars* init = nullptr) {
  ClarabelSolver solver;
  CccpRun run;
  run.vars = init ? *init : initial_point(p, settings.seed);
  run.objective = equivalent_objective(p, run.vars);
  run.trace.iterates.push_back(
      {0, run.objective, check_feasibility(p, run.vars).max_rel_violation,
       SolveStatus::Optimal, 0.0});

  int consecutive_small = 0;
  for (int iter = 1; iter <= settings.max_iters; ++iter) {
    SubproblemLayout layout;
    const ConeProgram prog = build_subproblem(p, run.vars, layout);
    const SolveResult res = solver.solve(prog, settings.backend);
    if (!res.usable()) {
      if (iter == 1)
        throw std::runtime_error(std::string("solve_cccp: backend failed at first iteration: ") +
                                 to_string(res.status));
      run.trace.degraded = true;
      run.trace.note = to_string(res.status);
      break;
    }
    DecisionVars next = extract_point(p, layout, res.x);
    const double obj = equivalent_objective(p, next);
    if (obj < run.objective - 1e-9 * std::max(1.0, std::abs(run.objective))) {
      // CCCP cannot decrease; a lower value is backend noise at stationarity,
      // so keep the incumbent and stop.
      run.trace.note = "stopped_on_noise";
      break;
    }

    double step2 = 0;
    for (int s = 0; s < p.num_streams(); ++s)
      for (int n = 0; n < p.radio.subcarriers; ++n) {
        step2 += (next.w[s][n] - run.vars.w[s][n]).squaredNorm();
        const double du = next.u[s][n] - run.vars.u[s][n];
        step2 += du * du;
      }
    run.trace.iterates.push_back({iter, obj,
                                  check_feasibility(p, next).max_rel_violation,
                                  res.status, std::sqrt(step2)});

    const double change = std::abs(obj - run.objective);
    run.vars = std::move(next);
    run.objective = obj;
    if (change <= settings.objective_rel_tol * std::max(1.0, std::abs(obj))) {
      if (++consecutive_small >= 2) break;
    } else {
      consecutive_small = 0;
    }
  }
  return run;
}

struct MultiStartResult {
  CccpRun best;
  int best_run = 0;
  std::vector<CccpTrace> traces;
};

// Runs CCCP from `restarts` random starting points plus any supplied warm
// starts and keeps the best objective; ties break toward the lowest run
// index. Warm starts must be feasible points of the same problem.
inline MultiStartResult multi_start(const DCProblem& p, const CccpSettings& settings,
                                    const std::vector<DecisionVars>& warm_starts = {}) {
  if (settings.restarts < 1)
    throw std::invalid_argument("multi_start: restarts must be >= 1");
  MultiStartResult out;
  bool have_best = false;
  std::string failures;
  const int total = settings.restarts + static_cast<int>(warm_starts.size());
  for (int run_idx = 0; run_idx < total; ++run_idx) {
    try {
      CccpSettings s = settings;
      s.seed = settings.seed + static_cast<std::uint64_t>(run_idx);
      const DecisionVars* init =
          run_idx < settings.restarts
              ? nullptr
              : &warm_starts[static_cast<std::size_t>(run_idx - settings.restarts)];
      CccpRun run = solve_cccp(p, s, init);
      out.traces.push_back(run.trace);
      if (!have_best || run.objective > out.best.objective) {
        out.best = std::move(run);
        out.best_run = run_idx;
        have_best = true;
      }
    } catch (const std::exception& ex) {
      failures += std::string(failures.empty() ? "" : "; ") + ex.what();
      out.traces.push_back(CccpTrace{{}, true, ex.what()});
    }
  }
  if (!have_best)
    throw std::runtime_error("multi_start: all runs failed: " + failures);
  return out;
}

}  // namespace vrsplit
