// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The vrsplit authors

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vrsplit/formulation.hpp"

namespace vrsplit {

// Largest ladder level <= rate, or 0 below the lowest level. A value within
// a relative hair of a level counts as on it, so solver round-off does not
// drop a full quality step.
inline double round_down_to_ladder(double rate, const RateLadder& ladder,
                                   double rel_slack = 1e-9) {
  double out = 0.0;
  for (double level : ladder.levels)
    if (rate >= level * (1.0 - rel_slack)) out = level;
  return out;
}

struct DiscretePlan {
  DecisionVars vars;
  double objective = 0;  // Q^(case) of the discrete FoV rates
  FeasibilityReport cert;
};

// Builds a feasible point of the original discrete problem from a relaxed
// plan: FoV rates are rounded down onto the ladder, tile rates rebuilt by the
// max rule, the smoothness band repaired by stepping offending FoV rates
// down, and message rates rebalanced to the smaller tile-rate sums (private
// first). Beamformers are untouched; the rate inequalities only loosen.
inline DiscretePlan discretize(const DCProblem& p, const StreamingPlan& plan,
                               const RateLadder& ladder) {
  DiscretePlan out;
  out.vars = plan.vars;
  auto& r = out.vars.r;
  for (int k = 0; k < p.num_users(); ++k)
    for (double& v : r[k]) v = round_down_to_ladder(v, ladder);

  // Smoothness repair: rounding can stretch the spread of FoV rates sharing
  // a tile past delta; lower the high side one ladder step until the band
  // holds. Terminates because every step strictly decreases some r.
  auto step_down = [&](double v) {
    double below = 0.0;
    for (double level : ladder.levels)
      if (level < v * (1.0 - 1e-12)) below = level;
    return below;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (int k = 0; k < p.num_users() && !changed; ++k)
      for (std::size_t t = 0; t < p.union_tiles[k].size() && !changed; ++t) {
        double hi = 0, lo = std::numeric_limits<double>::infinity();
        int hi_j = -1;
        for (int j : p.covering[k][t]) {
          const double v = r[k][static_cast<std::size_t>(j)];
          if (v > hi) {
            hi = v;
            hi_j = j;
          }
          lo = std::min(lo, v);
        }
        if (hi_j >= 0 && hi > lo + ladder.delta * (1.0 + 1e-12)) {
          r[k][static_cast<std::size_t>(hi_j)] = step_down(hi);
          changed = true;
        }
      }
  }

  const auto mr = apply_max_rule(p, r);
  out.vars.R = mr.R;
  for (int k = 0; k < p.num_users(); ++k) {
    double total = 0;
    for (double R : out.vars.R[k]) total += R;
    rebalance_rates_down(out.vars, k, total);
  }
  out.objective = q_metric(p.kind, r, p.users, p.utility).value;
  out.cert = check_feasibility(p, out.vars);
  return out;
}

// Continuous-minus-discrete objective gap; rounding down must not gain.
inline double gap(double cont_obj, double disc_obj) {
  const double g = cont_obj - disc_obj;
  if (g < -1e-9)
    throw std::logic_error("gap: discrete objective exceeds continuous objective");
  return std::max(0.0, g);
}

}  // namespace vrsplit
