// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The vrsplit authors

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "vrsplit/conic.hpp"
#include "vrsplit/formulation.hpp"

namespace vrsplit {

// Variable ids of the rate adaptation layer inside a cone program. Rates are
// modeled in units of rate_scale (the subcarrier bandwidth), which keeps the
// cone data well conditioned; ids of absent variables are -1.
struct RateLayerIds {
  std::vector<std::vector<int>> R, r;
  std::vector<int> d_c, d_p;
  std::vector<std::vector<int>> lambda, tau;
  std::vector<int> gamma;
  std::vector<int> y;
  std::vector<std::vector<int>> t;  // pp utility hypographs, -1 where p == 0
  double rate_scale = 1.0;
};

// Emits tile/FoV/message-rate variables with their boxes, the smoothness
// band, the per-user rate-split equality, and the case-specific objective
// machinery (expected-utility hypographs, inner-LP dual feasibility, or the
// worst-FoV hypograph). The physical-layer coupling of d is left to the
// caller.
inline RateLayerIds emit_rate_layer(ConeProgram& prog, const DCProblem& p,
                                    double rate_scale) {
  const int K = p.num_users();
  const double DL = p.ladder.top() / rate_scale;
  const double delta = p.ladder.delta / rate_scale;

  RateLayerIds ids;
  ids.rate_scale = rate_scale;
  ids.R.resize(K);
  ids.r.resize(K);
  ids.d_c.assign(K, -1);
  ids.d_p.assign(K, -1);
  for (int k = 0; k < K; ++k) {
    ids.R[k] = prog.new_vars(p.tile_count(k));
    ids.r[k] = prog.new_vars(p.fov_count(k));
    if (p.rate_splitting) ids.d_c[k] = prog.new_var();
    ids.d_p[k] = prog.new_var();
  }

  for (int k = 0; k < K; ++k) {
    for (int v : ids.R[k]) {
      prog.add_nonneg(LinExpr::variable(v));
      prog.add_nonneg(LinExpr(DL).add(v, -1.0));
    }
    for (int v : ids.r[k]) {
      prog.add_nonneg(LinExpr::variable(v));
      prog.add_nonneg(LinExpr(DL).add(v, -1.0));
    }
    if (ids.d_c[k] >= 0) prog.add_nonneg(LinExpr::variable(ids.d_c[k]));
    prog.add_nonneg(LinExpr::variable(ids.d_p[k]));

    for (std::size_t t = 0; t < p.union_tiles[k].size(); ++t)
      for (int j : p.covering[k][t]) {
        const int rv = ids.r[k][static_cast<std::size_t>(j)];
        const int Rv = ids.R[k][t];
        prog.add_nonneg(LinExpr::variable(Rv).add(rv, -1.0));            // r <= R
        prog.add_nonneg(LinExpr(delta).add(rv, 1.0).add(Rv, -1.0));      // R <= r + delta
      }

    LinExpr split;
    for (int v : ids.R[k]) split.add(v, 1.0);
    if (ids.d_c[k] >= 0) split.add(ids.d_c[k], -1.0);
    split.add(ids.d_p[k], -1.0);
    prog.add_zero(std::move(split));
  }

  switch (p.kind) {
    case FovCase::pp: {
      ids.t.resize(K);
      for (int k = 0; k < K; ++k) {
        const auto& prob = p.users[k].prob.p;
        ids.t[k].assign(prob.size(), -1);
        for (std::size_t j = 0; j < prob.size(); ++j) {
          if (prob[j] <= 0) continue;
          const int tv = prog.new_var();
          ids.t[k][j] = tv;
          lower_log_utility(prog, LinExpr::variable(tv),
                            LinExpr::variable(ids.r[k][j], rate_scale),
                            p.utility);
          prog.objective.add(tv, prob[j]);
        }
      }
      break;
    }
    case FovCase::ip: {
      // The inner-LP dual is degenerate whenever FoV utilities tie (robust
      // optima tend to equalize them); a vanishing penalty on the dual
      // variables picks the minimal-norm dual and keeps the interior-point
      // backend away from the degenerate face.
      constexpr double kDualReg = 1e-9;
      ids.lambda.resize(K);
      ids.tau.resize(K);
      ids.gamma.assign(K, -1);
      for (int k = 0; k < K; ++k) {
        const auto& prob = p.users[k].prob;
        const int J = p.fov_count(k);
        ids.lambda[k] = prog.new_vars(J);
        ids.tau[k] = prog.new_vars(J);
        ids.gamma[k] = prog.new_var();
        for (int j = 0; j < J; ++j) {
          prog.add_nonneg(LinExpr::variable(ids.lambda[k][j]));
          prog.add_nonneg(LinExpr::variable(ids.tau[k][j]));
          // U(r) >= tau - lambda - gamma
          LinExpr t;
          t.add(ids.tau[k][j], 1.0);
          t.add(ids.lambda[k][j], -1.0);
          t.add(ids.gamma[k], -1.0);
          lower_log_utility(prog, std::move(t),
                            LinExpr::variable(ids.r[k][static_cast<std::size_t>(j)],
                                              rate_scale),
                            p.utility);
          prog.objective.add(ids.tau[k][j],
                             prob.lower[static_cast<std::size_t>(j)] - kDualReg);
          prog.objective.add(ids.lambda[k][j],
                             -prob.upper[static_cast<std::size_t>(j)] - kDualReg);
        }
        prog.objective.add(ids.gamma[k], -1.0);
      }
      break;
    }
    case FovCase::up: {
      ids.y.assign(K, -1);
      for (int k = 0; k < K; ++k) {
        ids.y[k] = prog.new_var();
        prog.add_nonneg(LinExpr::variable(ids.y[k]));
        for (int j = 0; j < p.fov_count(k); ++j)
          lower_log_utility(prog, LinExpr::variable(ids.y[k]),
                            LinExpr::variable(ids.r[k][static_cast<std::size_t>(j)],
                                              rate_scale),
                            p.utility);
        prog.objective.add(ids.y[k], 1.0);
      }
      break;
    }
  }
  return ids;
}

// Full variable map of one CCCP conic subproblem. The SINR auxiliaries are
// modeled relative to their linearization values (u = u_ref * u-hat), which
// keeps every cone's data near unit scale even at very high SNR.
struct SubproblemLayout {
  RateLayerIds rate;
  int w_base = -1;
  int e_base = -1;
  int u_base = -1;
  int streams = 0, N = 0, M = 0;
  std::vector<std::vector<double>> u_ref;  // [stream][n]

  int w_var(int s, int n) const { return w_base + (s * N + n) * 2 * M; }
  int e_var(int s, int n) const { return e_base + s * N + n; }
  int u_var(int s, int n) const { return u_base + s * N + n; }
};

// Lowers the convex subproblem obtained by linearizing the subtracted part of
// every DC constraint at x0. Channels are scaled by 1/sigma so the noise
// variance becomes one inside the cone data; rates are in bandwidth units.
inline ConeProgram build_subproblem(const DCProblem& p, const DecisionVars& x0,
                                    SubproblemLayout& layout) {
  ConeProgram prog;
  prog.maximize = true;
  const int K = p.num_users();
  const int S = p.num_streams();
  const int N = p.radio.subcarriers;
  const int M = p.radio.antennas;
  const double B = p.radio.bandwidth_hz;
  const double noise_amp = std::sqrt(p.radio.noise_w);

  layout.rate = emit_rate_layer(prog, p, B);
  layout.streams = S;
  layout.N = N;
  layout.M = M;
  layout.w_base = prog.num_vars;
  prog.new_vars(S * N * 2 * M);
  layout.e_base = prog.num_vars;
  prog.new_vars(S * N);
  layout.u_base = prog.num_vars;
  prog.new_vars(S * N);
  layout.u_ref.assign(S, std::vector<double>(N, 1.0));
  for (int s = 0; s < S; ++s)
    for (int n = 0; n < N; ++n) {
      if (x0.u[s][n] <= 0)
        throw std::domain_error("build_subproblem: u0 must be positive");
      layout.u_ref[s][n] = x0.u[s][n];
    }

  // Aggregate rate couplings: message rates against per-subcarrier shares.
  if (p.rate_splitting) {
    LinExpr common;
    for (int n = 0; n < N; ++n) common.add(layout.e_var(p.common_stream(), n), 1.0);
    for (int k = 0; k < K; ++k) common.add(layout.rate.d_c[k], -1.0);
    prog.add_nonneg(std::move(common));
  }
  for (int k = 0; k < K; ++k) {
    LinExpr priv;
    for (int n = 0; n < N; ++n) priv.add(layout.e_var(k, n), 1.0);
    priv.add(layout.rate.d_p[k], -1.0);
    prog.add_nonneg(std::move(priv));
  }

  // e >= 0, u >= 1, and the exponential link 2^(e/B) <= u. With u-hat =
  // u / u_ref the link becomes exp(ln2 * e/B - ln u_ref) <= u-hat.
  for (int s = 0; s < S; ++s)
    for (int n = 0; n < N; ++n) {
      const double uref = layout.u_ref[s][n];
      prog.add_nonneg(LinExpr::variable(layout.e_var(s, n)));
      prog.add_nonneg(LinExpr(-1.0 / uref).add(layout.u_var(s, n), 1.0));
      LinExpr x(-std::log(uref));
      x.add(layout.e_var(s, n), std::numbers::ln2);
      prog.add_exp(std::move(x), LinExpr(1.0),
                   LinExpr::variable(layout.u_var(s, n)));
    }

  // Total power.
  std::vector<LinExpr> power_rows;
  power_rows.push_back(LinExpr(std::sqrt(p.radio.power_w)));
  for (int s = 0; s < S; ++s)
    for (int n = 0; n < N; ++n)
      for (int i = 0; i < 2 * M; ++i)
        power_rows.push_back(LinExpr::variable(layout.w_var(s, n) + i));
  prog.add_soc(std::move(power_rows));

  // DC constraints with the subtracted part linearized at x0. Each
  // constraint is divided by q0 (its aggregate received power at x0), so
  // together with the u-hat substitution the cone data stays near unit
  // scale however large the SINRs get.
  for (const DcPair& pair : dc_pairs(p)) {
    const Eigen::VectorXcd h = p.channels.at(pair.user, pair.n) / noise_amp;
    const int u_id = layout.u_var(dc_u_stream(p, pair), pair.n);
    const double u0 = x0.u[dc_u_stream(p, pair)][pair.n];

    std::vector<int> g_streams = dc_interferers(p, pair);
    g_streams.push_back(dc_signal_stream(p, pair));
    double q0 = 1.0;
    for (int s : g_streams) q0 += received_power(h, x0.w[s][pair.n]);
    const Eigen::VectorXcd h_scaled = h / std::sqrt(q0);

    // ghat(w, u)/q0 = 1/u0 + sum_s (grad_s/q0).(w_s - w0_s) - (u-hat - 1)/u0
    LinExpr bound;
    double constant = 2.0 / u0;
    bound.add(u_id, -1.0 / u0);
    for (int s : g_streams) {
      const Eigen::VectorXcd grad =
          2.0 * h_scaled * h_scaled.dot(x0.w[s][pair.n]) / u0;
      const int base = layout.w_var(s, pair.n);
      for (int m = 0; m < M; ++m) {
        bound.add(base + m, grad[m].real());
        bound.add(base + M + m, grad[m].imag());
        constant -= grad[m].real() * x0.w[s][pair.n][m].real() +
                    grad[m].imag() * x0.w[s][pair.n][m].imag();
      }
    }
    bound.constant = constant;

    std::vector<LinExpr> products;
    for (int s : dc_interferers(p, pair)) {
      auto [re, im] = complex_inner_rows(h_scaled, layout.w_var(s, pair.n));
      products.push_back(std::move(re));
      products.push_back(std::move(im));
    }
    lower_quad_over_linear(prog, std::move(products), std::move(bound), 1.0 / q0, u0);
  }

  return prog;
}

// Reads a subproblem solution back into decision variables (physical units).
inline DecisionVars extract_point(const DCProblem& p, const SubproblemLayout& layout,
                                  std::span<const double> x) {
  DecisionVars v = zero_vars(p);
  const double scale = layout.rate.rate_scale;
  for (int k = 0; k < p.num_users(); ++k) {
    for (std::size_t t = 0; t < v.R[k].size(); ++t)
      v.R[k][t] = scale * x[static_cast<std::size_t>(layout.rate.R[k][t])];
    for (std::size_t j = 0; j < v.r[k].size(); ++j)
      v.r[k][j] = scale * x[static_cast<std::size_t>(layout.rate.r[k][j])];
    if (layout.rate.d_c[k] >= 0)
      v.d_c[k] = scale * x[static_cast<std::size_t>(layout.rate.d_c[k])];
    v.d_p[k] = scale * x[static_cast<std::size_t>(layout.rate.d_p[k])];
    if (p.kind == FovCase::ip) {
      for (std::size_t j = 0; j < v.lambda[k].size(); ++j) {
        v.lambda[k][j] = x[static_cast<std::size_t>(layout.rate.lambda[k][j])];
        v.tau[k][j] = x[static_cast<std::size_t>(layout.rate.tau[k][j])];
      }
      v.gamma[k] = x[static_cast<std::size_t>(layout.rate.gamma[k])];
    }
    if (p.kind == FovCase::up)
      v.y[k] = x[static_cast<std::size_t>(layout.rate.y[k])];
  }
  for (int s = 0; s < layout.streams; ++s)
    for (int n = 0; n < layout.N; ++n) {
      const int base = layout.w_var(s, n);
      for (int m = 0; m < layout.M; ++m)
        v.w[s][n][m] = std::complex<double>(
            x[static_cast<std::size_t>(base + m)],
            x[static_cast<std::size_t>(base + layout.M + m)]);
      v.e[s][n] = scale * x[static_cast<std::size_t>(layout.e_var(s, n))];
      v.u[s][n] = layout.u_ref[s][n] * x[static_cast<std::size_t>(layout.u_var(s, n))];
    }
  return v;
}

}  // namespace vrsplit
