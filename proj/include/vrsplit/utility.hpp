// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The vrsplit authors

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "vrsplit/scene.hpp"

namespace vrsplit {

// FoV utility U(r) = scale * ln(gain * r / top_rate), clamped to 0 below the
// zero crossing at top_rate / gain so that U(0) = 0 and U is nonnegative and
// nondecreasing on [0, top_rate]. The raw logarithmic branch (`formula`) is
// what the solver models; it is strictly increasing and strictly concave on
// (0, top_rate].
struct UtilityFunction {
  double scale = 0.6;    // multiplies the log
  double gain = 1000.0;  // rate magnification inside the log
  double top_rate = 0;   // D_L in bits/s

  UtilityFunction() = default;
  UtilityFunction(double a, double c, double dl)
      : scale(a), gain(c), top_rate(dl) {
    if (a <= 0 || c <= 1 || dl <= 0)
      throw std::invalid_argument("UtilityFunction: invalid parameters");
  }

  static UtilityFunction with_top_rate(double dl) {
    return UtilityFunction(0.6, 1000.0, dl);
  }

  double floor_rate() const { return top_rate / gain; }

  // Unclamped logarithmic branch; requires r > 0.
  double formula(double r) const { return scale * std::log(gain * r / top_rate); }

  // Clamped utility on [0, top_rate].
  double value(double r) const {
    if (r < -1e-9 * top_rate || r > top_rate * (1.0 + 1e-9))
      throw std::domain_error("UtilityFunction: rate outside [0, D_L]");
    if (r <= floor_rate()) return 0.0;
    return formula(std::min(r, top_rate));
  }
};

// Exact minimizer of sum_i p_i * values_i over the box-bounded simplex
// {lower <= p <= upper, sum p = 1}: start from the lower bounds and pour the
// remaining mass into coordinates in ascending order of value, filling each
// to its upper bound. Ties break by index, so the result is deterministic.
inline std::vector<double> worst_case_distribution(
    const std::vector<double>& values, const std::vector<double>& lower,
    const std::vector<double>& upper) {
  const std::size_t n = values.size();
  if (lower.size() != n || upper.size() != n)
    throw std::invalid_argument("worst_case_distribution: size mismatch");
  double lo_sum = 0, hi_sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (lower[i] < 0 || upper[i] > 1 || lower[i] > upper[i] + 1e-15)
      throw std::domain_error("worst_case_distribution: invalid bounds");
    lo_sum += lower[i];
    hi_sum += upper[i];
  }
  if (lo_sum > 1.0 + 1e-12 || hi_sum < 1.0 - 1e-12)
    throw std::domain_error("worst_case_distribution: infeasible bounds");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> p(lower);
  double mass = 1.0 - lo_sum;
  for (std::size_t idx : order) {
    if (mass <= 0) break;
    const double add = std::min(mass, upper[idx] - lower[idx]);
    p[idx] += add;
    mass -= add;
  }
  return p;
}

// Optimal dual variables of the inner minimization. The LP dual maximizes
// sum_i (tau_i * lower_i - lambda_i * upper_i) - gamma subject to
// values_i + lambda_i - tau_i + gamma >= 0, lambda, tau >= 0, and its optimum
// equals the primal minimum (strong duality). threshold is the value of the
// last coordinate receiving mass in the greedy primal solution.
struct WorstCaseDual {
  std::vector<double> lambda;
  std::vector<double> tau;
  double gamma = 0;
  double value = 0;
};

inline WorstCaseDual worst_case_dual(const std::vector<double>& values,
                                     const std::vector<double>& lower,
                                     const std::vector<double>& upper) {
  const auto p = worst_case_distribution(values, lower, upper);
  const std::size_t n = values.size();
  double threshold = *std::min_element(values.begin(), values.end());
  for (std::size_t i = 0; i < n; ++i)
    if (p[i] > lower[i] + 1e-15) threshold = std::max(threshold, values[i]);

  WorstCaseDual d;
  d.lambda.resize(n);
  d.tau.resize(n);
  d.gamma = -threshold;
  for (std::size_t i = 0; i < n; ++i) {
    d.lambda[i] = std::max(0.0, threshold - values[i]);
    d.tau[i] = std::max(0.0, values[i] - threshold);
  }
  double v = -d.gamma;
  for (std::size_t i = 0; i < n; ++i)
    v += d.tau[i] * lower[i] - d.lambda[i] * upper[i];
  d.value = v;
  return d;
}

// Total-utility metric for one case. worst_p holds, per user, the probability
// vector attaining the inner minimum (ip case only).
struct MetricValue {
  FovCase kind = FovCase::pp;
  double value = 0;
  std::vector<std::vector<double>> worst_p;
};

// rates[k][j] is the FoV minimum rate of the j-th predicted FoV of user k,
// aligned with users[k].fov_indices. The case tag of every user's
// ProbabilityModel must match `kind`.
inline MetricValue q_metric(FovCase kind,
                            const std::vector<std::vector<double>>& rates,
                            const std::vector<UserPrediction>& users,
                            const UtilityFunction& u) {
  if (rates.size() != users.size())
    throw std::invalid_argument("q_metric: user count mismatch");
  MetricValue out;
  out.kind = kind;
  for (std::size_t k = 0; k < users.size(); ++k) {
    const auto& prob = users[k].prob;
    if (prob.kind != kind) throw std::domain_error("q_metric: case mismatch");
    const auto& r = rates[k];
    if (r.size() != users[k].fov_indices.size())
      throw std::invalid_argument("q_metric: rate vector size mismatch");
    std::vector<double> vals(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) vals[i] = u.value(r[i]);
    switch (kind) {
      case FovCase::pp: {
        double s = 0;
        for (std::size_t i = 0; i < vals.size(); ++i) s += prob.p[i] * vals[i];
        out.value += s;
        break;
      }
      case FovCase::ip: {
        auto wp = worst_case_distribution(vals, prob.lower, prob.upper);
        double s = 0;
        for (std::size_t i = 0; i < vals.size(); ++i) s += wp[i] * vals[i];
        out.value += s;
        out.worst_p.push_back(std::move(wp));
        break;
      }
      case FovCase::up:
        out.value += *std::min_element(vals.begin(), vals.end());
        break;
    }
  }
  return out;
}

}  // namespace vrsplit
