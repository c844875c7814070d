// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The vrsplit authors

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "vrsplit/cccp.hpp"

namespace vrsplit {

enum class Scheme { proposed, sdma_opt, sdma_zf, ofdma_mrt };

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::proposed: return "proposed";
    case Scheme::sdma_opt: return "sdma-opt";
    case Scheme::sdma_zf: return "sdma-zf";
    case Scheme::ofdma_mrt: return "ofdma-mrt";
  }
  return "?";
}

inline Scheme scheme_from_string(const std::string& s) {
  if (s == "proposed") return Scheme::proposed;
  if (s == "sdma-opt") return Scheme::sdma_opt;
  if (s == "sdma-zf") return Scheme::sdma_zf;
  if (s == "ofdma-mrt") return Scheme::ofdma_mrt;
  throw std::invalid_argument("unknown scheme: " + s);
}

struct BaselineResult {
  Scheme scheme = Scheme::sdma_opt;
  StreamingPlan plan;
  DecisionVars solver_vars;  // pre-projection point (keeps case auxiliaries)
  double objective = 0;
  CccpTrace trace;  // empty for the one-shot convex baselines
};

// SDMA with optimized beamforming: the rate-splitting pipeline with the
// common message pinned to zero.
inline BaselineResult sdma_opt(const DCProblem& sdma_problem,
                               const CccpSettings& settings,
                               const std::vector<DecisionVars>& warm_starts = {}) {
  if (sdma_problem.rate_splitting)
    throw std::invalid_argument("sdma_opt: problem must be built without rate splitting");
  auto ms = multi_start(sdma_problem, settings, warm_starts);
  BaselineResult out;
  out.scheme = Scheme::sdma_opt;
  out.solver_vars = ms.best.vars;
  out.plan = recover_solution(sdma_problem, ms.best.vars);
  out.objective = out.plan.objective;
  out.trace = ms.best.trace;
  return out;
}

// Per-subcarrier zero-forcing directions: normalized columns of the
// Moore-Penrose right inverse of the stacked channel matrix.
inline std::vector<Eigen::VectorXcd> zf_directions(const ChannelState& ch, int n) {
  const int K = ch.users;
  const int M = ch.antennas;
  if (M < K)
    throw std::runtime_error("sdma_zf: needs at least as many antennas as users");
  Eigen::MatrixXcd H(K, M);
  for (int k = 0; k < K; ++k) H.row(k) = ch.at(k, n).adjoint();
  const Eigen::MatrixXcd gram = H * H.adjoint();
  const Eigen::FullPivLU<Eigen::MatrixXcd> lu(gram);
  if (!lu.isInvertible())
    throw std::runtime_error("sdma_zf: rank-deficient channel on subcarrier " +
                             std::to_string(n));
  const Eigen::MatrixXcd pinv = H.adjoint() * lu.inverse();
  std::vector<Eigen::VectorXcd> dirs;
  dirs.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    Eigen::VectorXcd col = pinv.col(k);
    dirs.push_back(col / col.norm());
  }
  return dirs;
}

// SDMA with zero-forcing beamforming: directions are fixed, the remaining
// joint power / rate adaptation problem is convex and solved in one shot.
inline BaselineResult sdma_zf(const DCProblem& sdma_problem,
                              const SolveOptions& opts = {}) {
  if (sdma_problem.rate_splitting)
    throw std::invalid_argument("sdma_zf: problem must be built without rate splitting");
  const DCProblem& p = sdma_problem;
  const int K = p.num_users();
  const int N = p.radio.subcarriers;
  const double B = p.radio.bandwidth_hz;

  std::vector<std::vector<Eigen::VectorXcd>> dirs(static_cast<std::size_t>(K));
  std::vector<std::vector<double>> gain(static_cast<std::size_t>(K),
                                        std::vector<double>(static_cast<std::size_t>(N)));
  for (int n = 0; n < N; ++n) {
    const auto d = zf_directions(p.channels, n);
    for (int k = 0; k < K; ++k) {
      dirs[k].push_back(d[k]);
      gain[k][n] = received_power(p.channels.at(k, n), d[k]) / p.radio.noise_w;
    }
  }

  ConeProgram prog;
  prog.maximize = true;
  RateLayerIds rate = emit_rate_layer(prog, p, B);
  std::vector<std::vector<int>> q_id(static_cast<std::size_t>(K));
  std::vector<std::vector<int>> e_id(static_cast<std::size_t>(K));
  // Powers are modeled in budget units and the per-link SNR at full budget
  // moves into the exp cone's constant, keeping all cone data near unit
  // scale: 2^e <= 1 + q * gain becomes exp(ln2 e - ln S) <= q-hat + 1/S with
  // S = P * gain.
  LinExpr power(1.0);
  for (int k = 0; k < K; ++k) {
    q_id[k] = prog.new_vars(N);
    e_id[k] = prog.new_vars(N);
    LinExpr sum;
    for (int n = 0; n < N; ++n) {
      const double snr_full = p.radio.power_w * gain[k][n];
      prog.add_nonneg(LinExpr::variable(q_id[k][n]));
      prog.add_nonneg(LinExpr::variable(e_id[k][n]));
      LinExpr x(-std::log(snr_full));
      x.add(e_id[k][n], std::numbers::ln2);
      prog.add_exp(std::move(x), LinExpr(1.0),
                   LinExpr(1.0 / snr_full).add(q_id[k][n], 1.0));
      sum.add(e_id[k][n], 1.0);
      power.add(q_id[k][n], -1.0);
    }
    sum.add(rate.d_p[k], -1.0);
    prog.add_nonneg(std::move(sum));
  }
  prog.add_nonneg(std::move(power));

  ClarabelSolver solver;
  const SolveResult res = solver.solve(prog, opts);
  if (!res.usable())
    throw std::runtime_error(std::string("sdma_zf: solve failed: ") +
                             to_string(res.status));

  DecisionVars v = zero_vars(p);
  for (int k = 0; k < K; ++k) {
    for (std::size_t t = 0; t < v.R[k].size(); ++t)
      v.R[k][t] = B * res.x[static_cast<std::size_t>(rate.R[k][t])];
    for (std::size_t j = 0; j < v.r[k].size(); ++j)
      v.r[k][j] = B * res.x[static_cast<std::size_t>(rate.r[k][j])];
    v.d_p[k] = B * res.x[static_cast<std::size_t>(rate.d_p[k])];
    if (p.kind == FovCase::ip) {
      for (std::size_t j = 0; j < v.lambda[k].size(); ++j) {
        v.lambda[k][j] = res.x[static_cast<std::size_t>(rate.lambda[k][j])];
        v.tau[k][j] = res.x[static_cast<std::size_t>(rate.tau[k][j])];
      }
      v.gamma[k] = res.x[static_cast<std::size_t>(rate.gamma[k])];
    }
    if (p.kind == FovCase::up) v.y[k] = res.x[static_cast<std::size_t>(rate.y[k])];
    for (int n = 0; n < N; ++n) {
      const double q = p.radio.power_w *
                       std::max(0.0, res.x[static_cast<std::size_t>(q_id[k][n])]);
      v.w[k][n] = std::sqrt(q) * dirs[k][static_cast<std::size_t>(n)];
      v.u[k][n] = 1.0 + q * gain[k][n];
      v.e[k][n] = B * res.x[static_cast<std::size_t>(e_id[k][n])];
    }
  }

  BaselineResult out;
  out.scheme = Scheme::sdma_zf;
  out.solver_vars = v;
  out.plan = recover_solution(p, v);
  out.objective = out.plan.objective;
  return out;
}

// Greedy subcarrier assignment by channel norm with a fairness floor: every
// user first receives its floor(N/K) best unclaimed subcarriers in global
// gain order, then the leftovers go to whichever user is strongest on them.
inline std::vector<int> ofdma_assignment(const ChannelState& ch) {
  const int K = ch.users;
  const int N = ch.subcarriers;
  struct Entry { double norm; int k, n; };
  std::vector<Entry> entries;
  for (int k = 0; k < K; ++k)
    for (int n = 0; n < N; ++n)
      entries.push_back({ch.at(k, n).norm(), k, n});
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.norm != b.norm) return a.norm > b.norm;
    return a.k != b.k ? a.k < b.k : a.n < b.n;
  });

  std::vector<int> owner(static_cast<std::size_t>(N), -1);
  std::vector<int> count(static_cast<std::size_t>(K), 0);
  const int floor_share = N / K;
  for (const auto& e : entries) {
    if (owner[static_cast<std::size_t>(e.n)] >= 0) continue;
    if (count[static_cast<std::size_t>(e.k)] >= floor_share) continue;
    owner[static_cast<std::size_t>(e.n)] = e.k;
    ++count[static_cast<std::size_t>(e.k)];
  }
  for (const auto& e : entries)
    if (owner[static_cast<std::size_t>(e.n)] < 0)
      owner[static_cast<std::size_t>(e.n)] = e.k;
  return owner;
}

struct WaterfillResult {
  std::vector<double> q;
  double level = 0;       // water level 1/nu
  double multiplier = 0;  // dual multiplier of the power constraint
};

// Maximizes sum_n B log2(1 + q_n g_n) under sum q <= P by bisecting the water
// level; q_n = max(0, level - 1/g_n).
inline WaterfillResult waterfill(const std::vector<double>& gains, double power,
                                 double bandwidth_hz) {
  if (gains.empty()) throw std::invalid_argument("waterfill: no gains");
  for (double g : gains)
    if (g <= 0) throw std::invalid_argument("waterfill: gains must be positive");
  const auto used = [&](double level) {
    double s = 0;
    for (double g : gains) s += std::max(0.0, level - 1.0 / g);
    return s;
  };
  double lo = 1.0 / *std::max_element(gains.begin(), gains.end());
  double hi = 1.0 / *std::min_element(gains.begin(), gains.end()) + power;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (used(mid) > power ? hi : lo) = mid;
  }
  WaterfillResult out;
  out.level = 0.5 * (lo + hi);
  out.q.resize(gains.size());
  for (std::size_t i = 0; i < gains.size(); ++i)
    out.q[i] = std::max(0.0, out.level - 1.0 / gains[i]);
  // exact budget: scale the positive entries onto sum q = P
  double total = std::accumulate(out.q.begin(), out.q.end(), 0.0);
  if (total > 0) {
    const double fix = power / total;
    for (double& q : out.q) q *= fix;
  }
  out.multiplier = bandwidth_hz / (std::numbers::ln2 * out.level);
  return out;
}

// OFDMA with maximum-ratio transmission: greedy assignment, water-filling
// power allocation, then the per-user rate adaptation given the resulting
// capacities (one convex solve).
inline BaselineResult ofdma_mrt(const DCProblem& sdma_problem,
                                const SolveOptions& opts = {}) {
  if (sdma_problem.rate_splitting)
    throw std::invalid_argument("ofdma_mrt: problem must be built without rate splitting");
  const DCProblem& p = sdma_problem;
  const int K = p.num_users();
  const int N = p.radio.subcarriers;
  const double B = p.radio.bandwidth_hz;

  const std::vector<int> owner = ofdma_assignment(p.channels);
  std::vector<double> gains(static_cast<std::size_t>(N));
  for (int n = 0; n < N; ++n)
    gains[static_cast<std::size_t>(n)] =
        p.channels.at(owner[static_cast<std::size_t>(n)], n).squaredNorm() /
        p.radio.noise_w;
  const WaterfillResult wf = waterfill(gains, p.radio.power_w, B);

  std::vector<double> capacity(static_cast<std::size_t>(K), 0.0);
  for (int n = 0; n < N; ++n)
    capacity[static_cast<std::size_t>(owner[static_cast<std::size_t>(n)])] +=
        B * std::log2(1.0 + wf.q[static_cast<std::size_t>(n)] *
                                gains[static_cast<std::size_t>(n)]);

  ConeProgram prog;
  prog.maximize = true;
  RateLayerIds rate = emit_rate_layer(prog, p, B);
  for (int k = 0; k < K; ++k)
    prog.add_nonneg(LinExpr(capacity[static_cast<std::size_t>(k)] / B)
                        .add(rate.d_p[k], -1.0));

  ClarabelSolver solver;
  const SolveResult res = solver.solve(prog, opts);
  if (!res.usable())
    throw std::runtime_error(std::string("ofdma_mrt: solve failed: ") +
                             to_string(res.status));

  DecisionVars v = zero_vars(p);
  for (int k = 0; k < K; ++k) {
    for (std::size_t t = 0; t < v.R[k].size(); ++t)
      v.R[k][t] = B * res.x[static_cast<std::size_t>(rate.R[k][t])];
    for (std::size_t j = 0; j < v.r[k].size(); ++j)
      v.r[k][j] = B * res.x[static_cast<std::size_t>(rate.r[k][j])];
    v.d_p[k] = B * res.x[static_cast<std::size_t>(rate.d_p[k])];
    if (p.kind == FovCase::ip) {
      for (std::size_t j = 0; j < v.lambda[k].size(); ++j) {
        v.lambda[k][j] = res.x[static_cast<std::size_t>(rate.lambda[k][j])];
        v.tau[k][j] = res.x[static_cast<std::size_t>(rate.tau[k][j])];
      }
      v.gamma[k] = res.x[static_cast<std::size_t>(rate.gamma[k])];
    }
    if (p.kind == FovCase::up) v.y[k] = res.x[static_cast<std::size_t>(rate.y[k])];
  }
  for (int n = 0; n < N; ++n) {
    const int k = owner[static_cast<std::size_t>(n)];
    const auto& h = p.channels.at(k, n);
    const double q = wf.q[static_cast<std::size_t>(n)];
    v.w[k][n] = std::sqrt(q) * h / h.norm();
    const double snr = q * gains[static_cast<std::size_t>(n)];
    v.u[k][n] = 1.0 + snr;
    v.e[k][n] = B * std::log2(1.0 + snr);
  }

  BaselineResult out;
  out.scheme = Scheme::ofdma_mrt;
  out.solver_vars = v;
  out.plan = recover_solution(p, v);
  out.objective = out.plan.objective;
  return out;
}

}  // namespace vrsplit
