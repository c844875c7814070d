// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The vrsplit authors

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "vrsplit/channel.hpp"
#include "vrsplit/scene.hpp"
#include "vrsplit/utility.hpp"

namespace vrsplit {

// The utility-maximization instance in difference-of-convex form: rate
// adaptation layer (tile rates R, FoV rates r, message rates d) coupled to
// the physical layer (beamformers w, per-subcarrier rate shares e, SINR
// auxiliaries u) through the DC rate constraints. `rate_splitting = false`
// pins the common message to zero (the SDMA restriction).
struct DCProblem {
  FovCase kind = FovCase::pp;
  bool rate_splitting = true;
  TilingGrid grid;
  std::vector<UserPrediction> users;
  std::vector<std::vector<FovSet>> fovs;         // [k][j], aligned with fov_indices
  std::vector<std::vector<Tile>> union_tiles;    // F-bar per user, sorted
  std::vector<std::vector<std::vector<int>>> covering;  // [k][tile] -> FoV slots j
  RateLadder ladder;
  SystemConfig radio;
  ChannelState channels;
  UtilityFunction utility;

  int num_users() const { return radio.users; }
  int num_streams() const { return radio.users + (rate_splitting ? 1 : 0); }
  int common_stream() const { return radio.users; }
  int fov_count(int k) const {
    return static_cast<int>(users[static_cast<std::size_t>(k)].fov_indices.size());
  }
  int tile_count(int k) const {
    return static_cast<int>(union_tiles[static_cast<std::size_t>(k)].size());
  }

  // Constraint family cardinalities of the equivalent problem.
  int count_dc_common() const {
    return rate_splitting ? radio.users * radio.subcarriers : 0;
  }
  int count_dc_private() const { return radio.users * radio.subcarriers; }
  int count_exp_rate() const { return num_streams() * radio.subcarriers; }
  int count_sum_rate() const { return radio.users; }
  int count_power() const { return 1; }
  int count_dual_feasibility() const {
    if (kind != FovCase::ip) return 0;
    int c = 0;
    for (int k = 0; k < num_users(); ++k) c += fov_count(k);
    return c;
  }
  int count_hypograph() const {
    if (kind != FovCase::up) return 0;
    int c = 0;
    for (int k = 0; k < num_users(); ++k) c += fov_count(k);
    return c;
  }
};

inline DCProblem build_problem(FovCase kind, const TilingGrid& grid,
                               std::vector<UserPrediction> users,
                               const RateLadder& ladder,
                               const ChannelState& channels,
                               const SystemConfig& radio,
                               const UtilityFunction& utility,
                               bool rate_splitting = true) {
  if (static_cast<int>(users.size()) != radio.users)
    throw std::invalid_argument("build_problem: user count mismatch");
  if (channels.users != radio.users || channels.subcarriers != radio.subcarriers ||
      channels.antennas != radio.antennas)
    throw std::invalid_argument("build_problem: channel dimensions mismatch");
  if (std::abs(utility.top_rate - ladder.top()) > 1e-9 * ladder.top())
    throw std::invalid_argument("build_problem: utility top rate != ladder top");
  DCProblem p;
  p.kind = kind;
  p.rate_splitting = rate_splitting;
  p.grid = grid;
  p.ladder = ladder;
  p.radio = radio;
  p.channels = channels;
  p.utility = utility;
  p.users = std::move(users);
  p.fovs.resize(p.users.size());
  p.union_tiles.resize(p.users.size());
  p.covering.resize(p.users.size());
  for (std::size_t k = 0; k < p.users.size(); ++k) {
    const auto& pred = p.users[k];
    if (pred.prob.kind != kind)
      throw std::invalid_argument("build_problem: probability case mismatch");
    if (pred.fov_indices.empty())
      throw std::invalid_argument("build_problem: empty FoV prediction");
    if (pred.prob.size() != pred.fov_indices.size())
      throw std::invalid_argument("build_problem: probability size mismatch");
    for (int idx : pred.fov_indices) p.fovs[k].push_back(fov_tiles(grid, idx));
    p.union_tiles[k] = union_fovs(p.fovs[k]);
    p.covering[k].resize(p.union_tiles[k].size());
    for (std::size_t t = 0; t < p.union_tiles[k].size(); ++t) {
      for (std::size_t j = 0; j < p.fovs[k].size(); ++j) {
        const auto& tiles = p.fovs[k][j].tiles;
        if (std::binary_search(tiles.begin(), tiles.end(), p.union_tiles[k][t]))
          p.covering[k][t].push_back(static_cast<int>(j));
      }
    }
  }
  return p;
}

// Decision variables of the equivalent problems. Streams are ordered with
// the K private streams first and the common stream last (when present).
struct DecisionVars {
  std::vector<std::vector<double>> R;            // [k][tile]
  std::vector<std::vector<double>> r;            // [k][j]
  std::vector<double> d_c, d_p;                  // [k]
  std::vector<std::vector<Eigen::VectorXcd>> w;  // [stream][n]
  std::vector<std::vector<double>> e, u;         // [stream][n]
  std::vector<std::vector<double>> lambda, tau;  // [k][j], ip only
  std::vector<double> gamma;                     // [k], ip only
  std::vector<double> y;                         // [k], up only
};

inline DecisionVars zero_vars(const DCProblem& p) {
  DecisionVars v;
  const int K = p.num_users();
  const int S = p.num_streams();
  const int N = p.radio.subcarriers;
  v.R.resize(K);
  v.r.resize(K);
  for (int k = 0; k < K; ++k) {
    v.R[k].assign(p.tile_count(k), 0.0);
    v.r[k].assign(p.fov_count(k), 0.0);
  }
  v.d_c.assign(K, 0.0);
  v.d_p.assign(K, 0.0);
  v.w.resize(S);
  v.e.resize(S);
  v.u.resize(S);
  for (int s = 0; s < S; ++s) {
    v.w[s].assign(N, Eigen::VectorXcd::Zero(p.radio.antennas));
    v.e[s].assign(N, 0.0);
    v.u[s].assign(N, 1.0);
  }
  if (p.kind == FovCase::ip) {
    v.lambda.resize(K);
    v.tau.resize(K);
    for (int k = 0; k < K; ++k) {
      v.lambda[k].assign(p.fov_count(k), 0.0);
      v.tau[k].assign(p.fov_count(k), 0.0);
    }
    v.gamma.assign(K, 0.0);
  }
  if (p.kind == FovCase::up) v.y.assign(K, 0.0);
  return v;
}

// --- SINRs and capacities recomputed from beamformers -----------------------

inline double common_sinr(const DCProblem& p, const DecisionVars& v, int k, int n) {
  if (!p.rate_splitting) return 0.0;
  const auto& h = p.channels.at(k, n);
  double interference = p.radio.noise_w;
  for (int j = 0; j < p.num_users(); ++j)
    interference += received_power(h, v.w[j][n]);
  return received_power(h, v.w[p.common_stream()][n]) / interference;
}

inline double private_sinr(const DCProblem& p, const DecisionVars& v, int k, int n) {
  const auto& h = p.channels.at(k, n);
  double interference = p.radio.noise_w;
  for (int j = 0; j < p.num_users(); ++j)
    if (j != k) interference += received_power(h, v.w[j][n]);
  return received_power(h, v.w[k][n]) / interference;
}

inline double common_capacity(const DCProblem& p, const DecisionVars& v, int k) {
  double cap = 0;
  for (int n = 0; n < p.radio.subcarriers; ++n)
    cap += p.radio.bandwidth_hz * std::log2(1.0 + common_sinr(p, v, k, n));
  return cap;
}

inline double private_capacity(const DCProblem& p, const DecisionVars& v, int k) {
  double cap = 0;
  for (int n = 0; n < p.radio.subcarriers; ++n)
    cap += p.radio.bandwidth_hz * std::log2(1.0 + private_sinr(p, v, k, n));
  return cap;
}

inline double total_power(const DecisionVars& v) {
  double pw = 0;
  for (const auto& stream : v.w)
    for (const auto& wn : stream) pw += wn.squaredNorm();
  return pw;
}

// --- feasibility against the original problem -------------------------------

struct FamilyResidual {
  std::string family;
  double worst = -std::numeric_limits<double>::infinity();      // signed, <= 0 ok
  double worst_rel = -std::numeric_limits<double>::infinity();  // scaled
};

struct FeasibilityReport {
  std::vector<FamilyResidual> families;
  double max_rel_violation = 0;
  bool feasible = false;

  const FamilyResidual& find(const std::string& name) const {
    for (const auto& f : families)
      if (f.family == name) return f;
    throw std::invalid_argument("FeasibilityReport: unknown family " + name);
  }
};

// Evaluates the original constraints (smoothness, rate split, power, common
// and private rate inequalities with SINRs recomputed from w, and the box
// bounds) rather than the auxiliary equivalent forms.
inline FeasibilityReport check_feasibility(const DCProblem& p,
                                           const DecisionVars& v,
                                           double tol = 1e-6) {
  FeasibilityReport rep;
  const double DL = p.ladder.top();
  auto family = [&](const std::string& name, double scale, auto&& fill) {
    FamilyResidual fr;
    fr.family = name;
    fill([&](double residual) {
      fr.worst = std::max(fr.worst, residual);
      fr.worst_rel = std::max(fr.worst_rel, residual / scale);
    });
    if (fr.worst == -std::numeric_limits<double>::infinity()) {
      fr.worst = 0;
      fr.worst_rel = 0;
    }
    rep.families.push_back(fr);
  };

  family("smooth_lower", DL, [&](auto push) {
    for (int k = 0; k < p.num_users(); ++k)
      for (std::size_t t = 0; t < p.union_tiles[k].size(); ++t)
        for (int j : p.covering[k][t])
          push(v.r[k][static_cast<std::size_t>(j)] - v.R[k][t]);
  });
  family("smooth_upper", DL, [&](auto push) {
    for (int k = 0; k < p.num_users(); ++k)
      for (std::size_t t = 0; t < p.union_tiles[k].size(); ++t)
        for (int j : p.covering[k][t])
          push(v.R[k][t] - v.r[k][static_cast<std::size_t>(j)] - p.ladder.delta);
  });
  family("rate_box", DL, [&](auto push) {
    for (int k = 0; k < p.num_users(); ++k) {
      for (double R : v.R[k]) {
        push(-R);
        push(R - DL);
      }
      for (double r : v.r[k]) {
        push(-r);
        push(r - DL);
      }
      push(-v.d_c[k]);
      push(-v.d_p[k]);
    }
  });
  family("sum_rate", DL, [&](auto push) {
    for (int k = 0; k < p.num_users(); ++k) {
      double sum = 0;
      for (double R : v.R[k]) sum += R;
      push(std::abs(sum - v.d_c[k] - v.d_p[k]));
    }
  });
  family("power", p.radio.power_w, [&](auto push) {
    push(total_power(v) - p.radio.power_w);
  });
  family("common_rate", DL, [&](auto push) {
    double dc_sum = 0;
    for (int k = 0; k < p.num_users(); ++k) dc_sum += v.d_c[k];
    for (int k = 0; k < p.num_users(); ++k)
      push(dc_sum - common_capacity(p, v, k));
  });
  family("private_rate", DL, [&](auto push) {
    for (int k = 0; k < p.num_users(); ++k)
      push(v.d_p[k] - private_capacity(p, v, k));
  });

  rep.max_rel_violation = 0;
  for (const auto& f : rep.families)
    rep.max_rel_violation = std::max(rep.max_rel_violation, f.worst_rel);
  rep.feasible = rep.max_rel_violation <= tol;
  return rep;
}

// --- objective of the equivalent problem ------------------------------------

// Objective value of the case's equivalent problem at the given point. The
// pp objective uses the logarithmic branch on FoVs with positive probability
// (which is what the conic subproblems optimize).
inline double equivalent_objective(const DCProblem& p, const DecisionVars& v) {
  double obj = 0;
  switch (p.kind) {
    case FovCase::pp:
      for (int k = 0; k < p.num_users(); ++k) {
        const auto& prob = p.users[k].prob.p;
        for (std::size_t j = 0; j < prob.size(); ++j) {
          if (prob[j] <= 0) continue;
          const double r = v.r[k][j];
          if (r <= 0) return -std::numeric_limits<double>::infinity();
          obj += prob[j] * p.utility.formula(r);
        }
      }
      break;
    case FovCase::ip:
      for (int k = 0; k < p.num_users(); ++k) {
        const auto& prob = p.users[k].prob;
        double s = -v.gamma[k];
        for (std::size_t j = 0; j < prob.lower.size(); ++j)
          s += v.tau[k][j] * prob.lower[j] - v.lambda[k][j] * prob.upper[j];
        obj += s;
      }
      break;
    case FovCase::up:
      for (double yk : v.y) obj += yk;
      break;
  }
  return obj;
}

// --- DC constraint pairs ----------------------------------------------------

// One constraint of the DC family: f(w) - g(w, u) <= 0 where f is the
// interference power plus noise and g is (signal + interference + noise)
// divided by the SINR auxiliary.
struct DcPair {
  int user = 0;       // receiving user k
  int n = 0;          // subcarrier
  bool common = false;
};

inline std::vector<DcPair> dc_pairs(const DCProblem& p) {
  std::vector<DcPair> out;
  for (int k = 0; k < p.num_users(); ++k)
    for (int n = 0; n < p.radio.subcarriers; ++n) {
      if (p.rate_splitting) out.push_back({k, n, true});
      out.push_back({k, n, false});
    }
  return out;
}

// Streams appearing in f (interference side) for the pair.
inline std::vector<int> dc_interferers(const DCProblem& p, const DcPair& pr) {
  std::vector<int> out;
  for (int j = 0; j < p.num_users(); ++j)
    if (pr.common || j != pr.user) out.push_back(j);
  return out;
}

// Stream carrying the decoded signal (numerator addition in g).
inline int dc_signal_stream(const DCProblem& p, const DcPair& pr) {
  return pr.common ? p.common_stream() : pr.user;
}

// The SINR auxiliary u indexed by the pair: u_{c,n} for common, u_{k,n} else.
inline int dc_u_stream(const DCProblem& p, const DcPair& pr) {
  return pr.common ? p.common_stream() : pr.user;
}

inline double dc_f_value(const DCProblem& p, const DcPair& pr, const DecisionVars& v) {
  const auto& h = p.channels.at(pr.user, pr.n);
  double f = p.radio.noise_w;
  for (int j : dc_interferers(p, pr)) f += received_power(h, v.w[j][pr.n]);
  return f;
}

inline double dc_g_value(const DCProblem& p, const DcPair& pr, const DecisionVars& v) {
  const auto& h = p.channels.at(pr.user, pr.n);
  const double u = v.u[dc_u_stream(p, pr)][pr.n];
  if (u <= 0) throw std::domain_error("dc_g_value: u must be positive");
  double q = p.radio.noise_w + received_power(h, v.w[dc_signal_stream(p, pr)][pr.n]);
  for (int j : dc_interferers(p, pr)) q += received_power(h, v.w[j][pr.n]);
  return q / u;
}

// Analytic gradient of g with respect to the participating beamformers
// (complex form, to be read as the stacked [Re; Im] gradient) and u.
struct DcGradient {
  std::vector<std::pair<int, Eigen::VectorXcd>> dw;  // (stream, 2 h h^H w / u)
  double du = 0;
};

inline DcGradient dc_g_gradient(const DCProblem& p, const DcPair& pr,
                                const DecisionVars& v) {
  const auto& h = p.channels.at(pr.user, pr.n);
  const double u = v.u[dc_u_stream(p, pr)][pr.n];
  if (u <= 0) throw std::domain_error("dc_g_gradient: u must be positive");
  DcGradient grad;
  std::vector<int> streams = dc_interferers(p, pr);
  streams.push_back(dc_signal_stream(p, pr));
  double q = p.radio.noise_w;
  for (int s : streams) {
    const auto& w = v.w[s][pr.n];
    q += received_power(h, w);
    grad.dw.emplace_back(s, Eigen::VectorXcd(2.0 * h * h.dot(w) / u));
  }
  grad.du = -q / (u * u);
  return grad;
}

// --- optimality-property helpers --------------------------------------------

struct MaxRuleResult {
  std::vector<std::vector<double>> R;
  double worst_upper_violation = 0;  // max over tiles of R - (r_j + delta)
};

// R_{x,y,k} = max over FoVs covering the tile of r_{i,k}. The smoothness
// lower bound holds with equality somewhere on every tile by construction;
// the upper bound is evaluated and reported.
inline MaxRuleResult apply_max_rule(const DCProblem& p,
                                    const std::vector<std::vector<double>>& r) {
  MaxRuleResult out;
  out.R.resize(r.size());
  for (int k = 0; k < p.num_users(); ++k) {
    out.R[k].assign(p.union_tiles[k].size(), 0.0);
    for (std::size_t t = 0; t < p.union_tiles[k].size(); ++t) {
      double m = 0;
      for (int j : p.covering[k][t])
        m = std::max(m, r[k][static_cast<std::size_t>(j)]);
      out.R[k][t] = m;
      for (int j : p.covering[k][t])
        out.worst_upper_violation =
            std::max(out.worst_upper_violation,
                     m - r[k][static_cast<std::size_t>(j)] - p.ladder.delta);
    }
  }
  return out;
}

// Reduces message rates to match a decreased tile-rate sum, taking the
// reduction out of the private rate first.
inline void rebalance_rates_down(DecisionVars& v, int k, double new_total) {
  const double old_total = v.d_c[k] + v.d_p[k];
  double cut = old_total - new_total;
  if (cut <= 0) return;
  const double from_p = std::min(cut, v.d_p[k]);
  v.d_p[k] -= from_p;
  cut -= from_p;
  v.d_c[k] = std::max(0.0, v.d_c[k] - cut);
}

// --- serialization -----------------------------------------------------------

// Structured text dump of a decision point, 17 significant digits so a
// read_vars round trip is bit exact. Layout is fixed by the problem.
inline void write_vars(const DCProblem& p, const DecisionVars& v, std::ostream& out) {
  out.precision(17);
  out << "vrsplit-vars v1 " << to_string(p.kind) << " "
      << (p.rate_splitting ? "rs" : "sdma") << "\n";
  auto block = [&](const char* name, const auto& rows) {
    out << name;
    for (const auto& row : rows)
      for (double x : row) out << " " << x;
    out << "\n";
  };
  block("R", v.R);
  block("r", v.r);
  out << "d";
  for (int k = 0; k < p.num_users(); ++k) out << " " << v.d_c[k] << " " << v.d_p[k];
  out << "\nw";
  for (const auto& stream : v.w)
    for (const auto& wn : stream)
      for (int m = 0; m < wn.size(); ++m)
        out << " " << wn[m].real() << " " << wn[m].imag();
  out << "\n";
  block("e", v.e);
  block("u", v.u);
  if (p.kind == FovCase::ip) {
    block("lambda", v.lambda);
    block("tau", v.tau);
    out << "gamma";
    for (double g : v.gamma) out << " " << g;
    out << "\n";
  }
  if (p.kind == FovCase::up) {
    out << "y";
    for (double y : v.y) out << " " << y;
    out << "\n";
  }
}

inline DecisionVars read_vars(const DCProblem& p, std::istream& in) {
  DecisionVars v = zero_vars(p);
  std::string tag, version, kind, mode;
  in >> tag >> version >> kind >> mode;
  if (tag != "vrsplit-vars" || version != "v1")
    throw std::runtime_error("read_vars: unrecognized header");
  if (kind != to_string(p.kind) ||
      (mode == "rs") != p.rate_splitting)
    throw std::runtime_error("read_vars: case or mode mismatch");
  std::string name;
  auto block = [&](const char* expect, auto& rows) {
    in >> name;
    if (name != expect) throw std::runtime_error("read_vars: expected " + std::string(expect));
    for (auto& row : rows)
      for (double& x : row) in >> x;
  };
  block("R", v.R);
  block("r", v.r);
  in >> name;
  for (int k = 0; k < p.num_users(); ++k) in >> v.d_c[k] >> v.d_p[k];
  in >> name;
  for (auto& stream : v.w)
    for (auto& wn : stream)
      for (int m = 0; m < wn.size(); ++m) {
        double re, im;
        in >> re >> im;
        wn[m] = std::complex<double>(re, im);
      }
  block("e", v.e);
  block("u", v.u);
  if (p.kind == FovCase::ip) {
    block("lambda", v.lambda);
    block("tau", v.tau);
    in >> name;
    for (double& g : v.gamma) in >> g;
  }
  if (p.kind == FovCase::up) {
    in >> name;
    for (double& y : v.y) in >> y;
  }
  if (!in) throw std::runtime_error("read_vars: truncated input");
  return v;
}

// Human-readable instance summary for debugging dumps.
inline void write_problem_summary(const DCProblem& p, std::ostream& out) {
  out << "vrsplit-problem v1\n";
  out << "case " << to_string(p.kind) << (p.rate_splitting ? " rs" : " sdma") << "\n";
  out << "grid " << p.grid.rows << "x" << p.grid.cols << " fov " << p.grid.fov_rows
      << "x" << p.grid.fov_cols << "\n";
  out << "radio M=" << p.radio.antennas << " K=" << p.radio.users
      << " N=" << p.radio.subcarriers << " B=" << p.radio.bandwidth_hz
      << " P=" << p.radio.power_w << " sigma2=" << p.radio.noise_w << "\n";
  out << "ladder";
  for (double d : p.ladder.levels) out << " " << d;
  out << " delta " << p.ladder.delta << "\n";
  for (int k = 0; k < p.num_users(); ++k) {
    out << "user " << p.users[k].user << " fovs";
    for (int i : p.users[k].fov_indices) out << " " << i;
    out << " tiles " << p.tile_count(k) << "\n";
  }
  out << "families dc_common=" << p.count_dc_common()
      << " dc_private=" << p.count_dc_private() << " exp=" << p.count_exp_rate()
      << " sum_rate=" << p.count_sum_rate() << " power=" << p.count_power()
      << " dual_feas=" << p.count_dual_feasibility()
      << " hypograph=" << p.count_hypograph() << "\n";
}

// Diagnostic for the expected alignment between viewing probability and FoV
// rate on solver outputs: among FoV pairs of one user where one FoV is no
// likelier yet has strictly more exclusive tiles, counts those whose rate
// exceeds the likelier FoV's. Stationary points may violate it, so this is
// reported, never asserted.
inline int rate_alignment_diagnostic(const DCProblem& p,
                                     const std::vector<std::vector<double>>& r,
                                     double tol = 1e-9) {
  int violations = 0;
  for (int k = 0; k < p.num_users(); ++k) {
    const auto& prob = p.users[k].prob;
    const int J = p.fov_count(k);
    std::vector<std::size_t> excl(static_cast<std::size_t>(J));
    for (int j = 0; j < J; ++j)
      excl[static_cast<std::size_t>(j)] =
          exclusive_tiles(p.fovs[k], p.users[k].fov_indices[static_cast<std::size_t>(j)])
              .size();
    for (int i = 0; i < J; ++i)
      for (int j = 0; j < J; ++j) {
        if (i == j) continue;
        double pi = 0, pj = 0;
        if (p.kind == FovCase::pp) {
          pi = prob.p[static_cast<std::size_t>(i)];
          pj = prob.p[static_cast<std::size_t>(j)];
        } else if (p.kind == FovCase::ip) {
          pi = prob.upper[static_cast<std::size_t>(i)];
          pj = prob.lower[static_cast<std::size_t>(j)];
        } else {
          continue;
        }
        if (pi <= pj && excl[static_cast<std::size_t>(i)] > excl[static_cast<std::size_t>(j)] &&
            excl[static_cast<std::size_t>(j)] > 1 &&
            r[k][static_cast<std::size_t>(i)] > r[k][static_cast<std::size_t>(j)] + tol)
          ++violations;
      }
  }
  return violations;
}

// Fills the inner-LP dual block of a point for the boxed-probability
// problem from the closed-form optimal duals at its FoV rates; the dual
// objective then equals Q^(ip) of those rates exactly.
inline DecisionVars with_inner_duals(const DCProblem& ip_problem, DecisionVars v) {
  if (ip_problem.kind != FovCase::ip)
    throw std::invalid_argument("with_inner_duals: problem is not the boxed case");
  const int K = ip_problem.num_users();
  v.lambda.assign(K, {});
  v.tau.assign(K, {});
  v.gamma.assign(K, 0.0);
  v.y.clear();
  for (int k = 0; k < K; ++k) {
    const auto& prob = ip_problem.users[k].prob;
    std::vector<double> vals(v.r[k].size());
    for (std::size_t j = 0; j < vals.size(); ++j)
      vals[j] = ip_problem.utility.value(std::min(v.r[k][j], ip_problem.ladder.top()));
    const WorstCaseDual dual = worst_case_dual(vals, prob.lower, prob.upper);
    v.lambda[k] = dual.lambda;
    v.tau[k] = dual.tau;
    v.gamma[k] = dual.gamma;
  }
  return v;
}

struct StreamingPlan {
  DecisionVars vars;
  double objective = 0;  // equivalent-problem objective
  double metric = 0;     // Q^(case) of the recovered FoV rates
  FeasibilityReport cert;
};

// Projects an equivalent-problem point onto the original decision variables.
// For the unknown-probability case the per-user FoV rates are made exactly
// uniform (their minimum), which leaves the metric unchanged.
inline StreamingPlan recover_solution(const DCProblem& p, const DecisionVars& v,
                                      double tol = 1e-6) {
  StreamingPlan plan;
  plan.vars = v;
  plan.objective = equivalent_objective(p, v);
  if (p.kind == FovCase::up) {
    for (int k = 0; k < p.num_users(); ++k) {
      const double rho =
          *std::min_element(plan.vars.r[k].begin(), plan.vars.r[k].end());
      std::fill(plan.vars.r[k].begin(), plan.vars.r[k].end(), rho);
    }
    const auto mr = apply_max_rule(p, plan.vars.r);
    plan.vars.R = mr.R;
    for (int k = 0; k < p.num_users(); ++k) {
      double total = 0;
      for (double R : plan.vars.R[k]) total += R;
      rebalance_rates_down(plan.vars, k, total);
    }
  }
  plan.vars.lambda.clear();
  plan.vars.tau.clear();
  plan.vars.gamma.clear();
  plan.vars.y.clear();
  std::vector<std::vector<double>> rates = plan.vars.r;
  plan.metric = q_metric(p.kind, rates, p.users, p.utility).value;
  plan.cert = check_feasibility(p, plan.vars, tol);
  return plan;
}

}  // namespace vrsplit
