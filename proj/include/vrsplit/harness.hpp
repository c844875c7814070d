// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The vrsplit authors

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vrsplit/baselines.hpp"
#include "vrsplit/fixtures.hpp"
#include "vrsplit/quantize.hpp"

namespace vrsplit {

struct ExperimentConfig {
  std::string ladder_fixture = "fixtures/encoding_ladders.json";
  std::string prediction_fixture = "fixtures/fov_predictions.json";
  bool normalize_predictions = true;
  std::vector<int> user_ids = {1, 2};
  std::vector<int> ladder_levels = {3};
  double delta = 4.4e7;  // bits/s, divided by ladder_scale like the ladder
  double ladder_scale = 1.0;
  std::vector<int> antennas = {4};
  int subcarriers = 4;
  double bandwidth_hz = 1e6;
  std::vector<double> power_w = {1.0};
  double noise_w = 1e-9;
  std::vector<double> pathloss;  // empty -> all ones
  std::vector<FovCase> cases = {FovCase::pp, FovCase::ip, FovCase::up};
  std::vector<Scheme> schemes = {Scheme::proposed, Scheme::sdma_opt,
                                 Scheme::sdma_zf, Scheme::ofdma_mrt};
  std::vector<double> eps_grid = {0.4};
  std::uint64_t seed_base = 1;
  int realizations = 1;
  CccpSettings solver;
  bool warm_start_chain = true;
  bool write_traces = true;
};

inline double dbm_to_watt(double dbm) { return std::pow(10.0, dbm / 10.0) / 1000.0; }

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  ExperimentConfig c;
  if (j.contains("scene")) {
    const auto& s = j.at("scene");
    if (s.contains("ladder_fixture")) c.ladder_fixture = s.at("ladder_fixture");
    if (s.contains("ladder_levels"))
      c.ladder_levels = s.at("ladder_levels").get<std::vector<int>>();
    if (s.contains("delta")) c.delta = s.at("delta").get<double>();
    if (s.contains("ladder_scale")) c.ladder_scale = s.at("ladder_scale").get<double>();
  }
  if (j.contains("users")) {
    const auto& u = j.at("users");
    if (u.contains("fixture")) c.prediction_fixture = u.at("fixture");
    if (u.contains("ids")) c.user_ids = u.at("ids").get<std::vector<int>>();
    if (u.contains("normalize")) c.normalize_predictions = u.at("normalize").get<bool>();
  }
  if (j.contains("radio")) {
    const auto& r = j.at("radio");
    if (r.contains("antennas")) c.antennas = r.at("antennas").get<std::vector<int>>();
    if (r.contains("subcarriers")) c.subcarriers = r.at("subcarriers").get<int>();
    if (r.contains("bandwidth_hz")) c.bandwidth_hz = r.at("bandwidth_hz").get<double>();
    if (r.contains("power_w")) c.power_w = r.at("power_w").get<std::vector<double>>();
    if (r.contains("power_dbm")) {
      c.power_w.clear();
      for (double dbm : r.at("power_dbm").get<std::vector<double>>())
        c.power_w.push_back(dbm_to_watt(dbm));
    }
    if (r.contains("noise_w")) c.noise_w = r.at("noise_w").get<double>();
    if (r.contains("pathloss")) c.pathloss = r.at("pathloss").get<std::vector<double>>();
  }
  if (j.contains("cases")) {
    c.cases.clear();
    for (const auto& s : j.at("cases"))
      c.cases.push_back(fov_case_from_string(s.get<std::string>()));
  }
  if (j.contains("schemes")) {
    c.schemes.clear();
    for (const auto& s : j.at("schemes"))
      c.schemes.push_back(scheme_from_string(s.get<std::string>()));
  }
  if (j.contains("eps")) c.eps_grid = j.at("eps").get<std::vector<double>>();
  if (j.contains("seeds")) {
    const auto& s = j.at("seeds");
    if (s.contains("base")) c.seed_base = s.at("base").get<std::uint64_t>();
    if (s.contains("realizations")) c.realizations = s.at("realizations").get<int>();
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    if (s.contains("restarts")) c.solver.restarts = s.at("restarts").get<int>();
    if (s.contains("max_iters")) c.solver.max_iters = s.at("max_iters").get<int>();
    if (s.contains("objective_rel_tol"))
      c.solver.objective_rel_tol = s.at("objective_rel_tol").get<double>();
    if (s.contains("tol_feas")) c.solver.backend.tol_feas = s.at("tol_feas").get<double>();
    if (s.contains("tol_gap")) {
      c.solver.backend.tol_gap_abs = s.at("tol_gap").get<double>();
      c.solver.backend.tol_gap_rel = s.at("tol_gap").get<double>();
    }
    if (s.contains("warm_start_chain"))
      c.warm_start_chain = s.at("warm_start_chain").get<bool>();
    if (s.contains("write_traces")) c.write_traces = s.at("write_traces").get<bool>();
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  return parse_config(load_json_file(path));
}

struct ResultRow {
  std::uint64_t seed = 0;
  FovCase kind = FovCase::pp;
  Scheme scheme = Scheme::proposed;
  int antennas = 0;
  int ladder_levels = 0;
  double eps = 0;
  double power_w = 0;
  double objective = 0;       // Q^(case) of the recovered plan
  double disc_objective = 0;  // Q^(case) after discretization
  double q_pp = 0, q_ip = 0, q_up = 0;
  int iterations = 0;
  std::string status = "ok";
  double wall_time_s = 0;  // persisted in timings.csv to keep results.csv stable
};

// RFC 4180 field quoting.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += "\"";
  return out;
}

inline std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += ch;
    }
  }
  out.push_back(std::move(field));
  return out;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline const char* results_header() {
  return "seed,case,scheme,M,L,eps,P,objective,disc_objective,q_pp,q_ip,q_up,"
         "iterations,status";
}

inline std::string to_csv(const ResultRow& r) {
  std::ostringstream out;
  out << r.seed << "," << to_string(r.kind) << "," << to_string(r.scheme) << ","
      << r.antennas << "," << r.ladder_levels << "," << format_double(r.eps) << ","
      << format_double(r.power_w) << "," << format_double(r.objective) << ","
      << format_double(r.disc_objective) << "," << format_double(r.q_pp) << ","
      << format_double(r.q_ip) << "," << format_double(r.q_up) << ","
      << r.iterations << "," << csv_field(r.status);
  return out.str();
}

inline std::vector<ResultRow> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_results_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("read_results_csv: empty file");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csv_split(line);
    if (f.size() < 14) throw std::runtime_error("read_results_csv: short row");
    ResultRow r;
    r.seed = std::stoull(f[0]);
    r.kind = fov_case_from_string(f[1]);
    r.scheme = scheme_from_string(f[2]);
    r.antennas = std::stoi(f[3]);
    r.ladder_levels = std::stoi(f[4]);
    r.eps = std::stod(f[5]);
    r.power_w = std::stod(f[6]);
    r.objective = std::stod(f[7]);
    r.disc_objective = std::stod(f[8]);
    r.q_pp = std::stod(f[9]);
    r.q_ip = std::stod(f[10]);
    r.q_up = std::stod(f[11]);
    r.iterations = std::stoi(f[12]);
    r.status = f[13];
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace detail {

// Extends an SDMA point to the rate-splitting problem: zero common
// beamformers and a zero-rate common message leave every constraint intact.
inline DecisionVars extend_to_rate_splitting(const DCProblem& rs_problem,
                                             const DecisionVars& sdma) {
  DecisionVars v = zero_vars(rs_problem);
  v.R = sdma.R;
  v.r = sdma.r;
  v.d_p = sdma.d_p;
  v.lambda = sdma.lambda;
  v.tau = sdma.tau;
  v.gamma = sdma.gamma;
  v.y = sdma.y;
  for (int k = 0; k < rs_problem.num_users(); ++k) {
    v.w[k] = sdma.w[k];
    v.e[k] = sdma.e[k];
    v.u[k] = sdma.u[k];
  }
  return v;
}

struct CellSolve {
  StreamingPlan plan;
  DecisionVars solver_vars;  // pre-projection point, usable as a warm start
  int iterations = 0;
  std::string status = "ok";
  double wall_time_s = 0;
  CccpTrace trace;
  bool ok = false;
};

inline std::string sanitize_status(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace detail

class ExperimentRunner {
 public:
  ExperimentRunner(ExperimentConfig cfg, std::string out_dir)
      : cfg_(std::move(cfg)), out_dir_(std::move(out_dir)) {
    fixture_ = load_prediction_fixture(cfg_.prediction_fixture,
                                       cfg_.normalize_predictions);
  }

  std::vector<ResultRow> run() {
    std::vector<ResultRow> rows;
    namespace fs = std::filesystem;
    fs::create_directories(out_dir_);
    if (cfg_.write_traces) fs::create_directories(out_dir_ + "/traces");

    for (int rlz = 0; rlz < cfg_.realizations; ++rlz) {
      const std::uint64_t seed = cfg_.seed_base + static_cast<std::uint64_t>(rlz);
      for (int M : cfg_.antennas)
        for (double P : cfg_.power_w)
          for (int L : cfg_.ladder_levels) {
            const RateLadder ladder =
                load_ladder_fixture(cfg_.ladder_fixture, L, cfg_.delta)
                    .scaled(cfg_.ladder_scale);
            for (FovCase kind : cfg_.cases)
              for (double eps : cfg_.eps_grid)
                for (Scheme scheme : cfg_.schemes)
                  rows.push_back(make_row(seed, M, P, L, ladder, kind, eps, scheme));
          }
    }

    std::ofstream results(out_dir_ + "/results.csv");
    results << results_header() << "\n";
    for (const auto& r : rows) results << to_csv(r) << "\n";
    std::ofstream timings(out_dir_ + "/timings.csv");
    timings << "seed,case,scheme,M,L,eps,P,wall_time_s\n";
    for (const auto& r : rows)
      timings << r.seed << "," << to_string(r.kind) << "," << to_string(r.scheme)
              << "," << r.antennas << "," << r.ladder_levels << ","
              << format_double(r.eps) << "," << format_double(r.power_w) << ","
              << format_double(r.wall_time_s) << "\n";
    return rows;
  }

  bool all_ok() const { return all_ok_; }

  DCProblem make_problem(std::uint64_t seed, int M, double P, const RateLadder& ladder,
                         FovCase kind, double eps, bool rate_splitting) {
    SystemConfig radio(M, static_cast<int>(cfg_.user_ids.size()), cfg_.subcarriers,
                       cfg_.bandwidth_hz, P, cfg_.noise_w,
                       cfg_.pathloss.empty()
                           ? std::vector<double>(cfg_.user_ids.size(), 1.0)
                           : cfg_.pathloss);
    const std::string chan_key = std::to_string(seed) + "|" + std::to_string(M);
    auto it = channel_cache_.find(chan_key);
    if (it == channel_cache_.end())
      it = channel_cache_.emplace(chan_key, sample_channels(radio, seed)).first;
    auto users = predictions_for_case(fixture_, cfg_.user_ids, kind, eps);
    return build_problem(kind, fixture_.grid, std::move(users), ladder, it->second,
                         radio, UtilityFunction::with_top_rate(ladder.top()),
                         rate_splitting);
  }

 private:
  bool scheme_selected(Scheme s) const {
    return std::find(cfg_.schemes.begin(), cfg_.schemes.end(), s) != cfg_.schemes.end();
  }

  ResultRow make_row(std::uint64_t seed, int M, double P, int L,
                     const RateLadder& ladder, FovCase kind, double eps,
                     Scheme scheme) {
    ResultRow row;
    row.seed = seed;
    row.kind = kind;
    row.scheme = scheme;
    row.antennas = M;
    row.ladder_levels = L;
    row.eps = eps;
    row.power_w = P;
    try {
      const detail::CellSolve& cell = solve_scheme(seed, M, P, ladder, kind, eps, scheme);
      row.iterations = cell.iterations;
      row.status = cell.status;
      row.wall_time_s = cell.wall_time_s;
      if (!cell.ok) {
        all_ok_ = false;
        return row;
      }
      row.objective = cell.plan.metric;
      const DCProblem eval = make_problem(seed, M, P, ladder, kind, eps,
                                          scheme == Scheme::proposed);
      const DiscretePlan disc = discretize(eval, cell.plan, ladder);
      row.disc_objective = disc.objective;

      // Cross-case scoring of the same FoV rates through the utility module.
      const auto& rates = cell.plan.vars.r;
      const UtilityFunction util = UtilityFunction::with_top_rate(ladder.top());
      row.q_pp = q_metric(FovCase::pp, rates,
                          predictions_for_case(fixture_, cfg_.user_ids, FovCase::pp, 0),
                          util).value;
      row.q_ip = q_metric(FovCase::ip, rates,
                          predictions_for_case(fixture_, cfg_.user_ids, FovCase::ip, eps),
                          util).value;
      row.q_up = q_metric(FovCase::up, rates,
                          predictions_for_case(fixture_, cfg_.user_ids, FovCase::up, 0),
                          util).value;
    } catch (const std::exception& ex) {
      row.status = detail::sanitize_status(ex.what());
      all_ok_ = false;
    }
    return row;
  }

  std::string cell_key(std::uint64_t seed, int M, double P, const RateLadder& ladder,
                       FovCase kind, double eps, Scheme scheme) const {
    std::ostringstream key;
    key << "s" << seed << "_M" << M << "_P" << format_double(P) << "_DL"
        << format_double(ladder.top()) << "_d" << format_double(ladder.delta) << "_"
        << to_string(kind) << "_e"
        << (kind == FovCase::ip ? format_double(eps) : std::string("x")) << "_"
        << to_string(scheme);
    return key.str();
  }

  const detail::CellSolve& solve_scheme(std::uint64_t seed, int M, double P,
                                        const RateLadder& ladder, FovCase kind,
                                        double eps, Scheme scheme) {
    const std::string key = cell_key(seed, M, P, ladder, kind, eps, scheme);
    auto it = solve_cache_.find(key);
    if (it != solve_cache_.end()) return it->second;

    detail::CellSolve cell;
    const auto start = std::chrono::steady_clock::now();
    try {
      CccpSettings settings = cfg_.solver;
      settings.seed = seed;
      switch (scheme) {
        case Scheme::sdma_zf: {
          const DCProblem prob = make_problem(seed, M, P, ladder, kind, eps, false);
          BaselineResult res = sdma_zf(prob, settings.backend);
          cell.solver_vars = res.solver_vars;
          cell.plan = std::move(res.plan);
          cell.iterations = 1;
          break;
        }
        case Scheme::ofdma_mrt: {
          const DCProblem prob = make_problem(seed, M, P, ladder, kind, eps, false);
          BaselineResult res = ofdma_mrt(prob, settings.backend);
          cell.solver_vars = res.solver_vars;
          cell.plan = std::move(res.plan);
          cell.iterations = 1;
          break;
        }
        case Scheme::sdma_opt: {
          const DCProblem prob = make_problem(seed, M, P, ladder, kind, eps, false);
          std::vector<DecisionVars> warm;
          if (cfg_.warm_start_chain) {
            if (scheme_selected(Scheme::sdma_zf) && M >= prob.num_users()) {
              const auto& zf = solve_scheme(seed, M, P, ladder, kind, eps, Scheme::sdma_zf);
              if (zf.ok) warm.push_back(zf.solver_vars);
            }
            if (scheme_selected(Scheme::ofdma_mrt)) {
              const auto& of = solve_scheme(seed, M, P, ladder, kind, eps, Scheme::ofdma_mrt);
              if (of.ok) warm.push_back(of.solver_vars);
            }
          }
          BaselineResult res = sdma_opt(prob, settings, warm);
          cell.solver_vars = res.solver_vars;
          cell.plan = std::move(res.plan);
          cell.trace = std::move(res.trace);
          cell.iterations = static_cast<int>(cell.trace.iterates.size()) - 1;
          break;
        }
        case Scheme::proposed: {
          const DCProblem prob = make_problem(seed, M, P, ladder, kind, eps, true);
          std::vector<DecisionVars> warm;
          if (cfg_.warm_start_chain && scheme_selected(Scheme::sdma_opt)) {
            const auto& sd = solve_scheme(seed, M, P, ladder, kind, eps, Scheme::sdma_opt);
            if (sd.ok)
              warm.push_back(detail::extend_to_rate_splitting(prob, sd.solver_vars));
          }
          auto ms = multi_start(prob, settings, warm);
          cell.solver_vars = ms.best.vars;
          cell.trace = std::move(ms.best.trace);
          cell.plan = recover_solution(prob, cell.solver_vars);
          cell.iterations = static_cast<int>(cell.trace.iterates.size()) - 1;
          break;
        }
      }
      cell.ok = true;
    } catch (const std::exception& ex) {
      cell.ok = false;
      cell.status = detail::sanitize_status(ex.what());
    }
    cell.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (cell.ok && cfg_.write_traces && !cell.trace.iterates.empty()) {
      std::ofstream tf(out_dir_ + "/traces/" + key + ".csv");
      write_trace_csv(cell.trace, tf);
    }
    return solve_cache_.emplace(key, std::move(cell)).first->second;
  }

  ExperimentConfig cfg_;
  std::string out_dir_;
  PredictionFixture fixture_;
  std::map<std::string, ChannelState> channel_cache_;
  std::map<std::string, detail::CellSolve> solve_cache_;
  bool all_ok_ = true;
};

// --- plot data ---------------------------------------------------------------

// Tidy per-figure aggregation: one output row per (x value, labelled series)
// with the across-seed mean and standard error.
inline void emit_plot_data(const std::vector<ResultRow>& rows, const std::string& axis,
                           std::ostream& out) {
  struct Key {
    double x;
    std::string label;
    bool operator<(const Key& o) const {
      return label != o.label ? label < o.label : x < o.x;
    }
  };
  if (axis != "M" && axis != "P" && axis != "eps" && axis != "L")
    throw std::invalid_argument("emit_plot_data: unknown axis " + axis);
  std::map<Key, std::vector<double>> groups;
  for (const auto& r : rows) {
    if (r.status != "ok") continue;
    const std::string base = std::string(to_string(r.scheme)) + "-" + to_string(r.kind);
    if (axis == "M") {
      groups[{static_cast<double>(r.antennas), base}].push_back(r.objective);
    } else if (axis == "P") {
      groups[{r.power_w, base}].push_back(r.objective);
    } else if (axis == "eps") {
      groups[{r.eps, base}].push_back(r.q_ip);
    } else {
      groups[{static_cast<double>(r.ladder_levels), base}].push_back(r.objective);
      groups[{static_cast<double>(r.ladder_levels), base + "-disc"}].push_back(
          r.disc_objective);
    }
  }
  out << "x,label,mean,stderr\n";
  for (const auto& [key, vals] : groups) {
    double mean = 0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0;
    for (double v : vals) var += (v - mean) * (v - mean);
    const double stderr_ =
        vals.size() > 1 ? std::sqrt(var / (static_cast<double>(vals.size()) - 1)) /
                              std::sqrt(static_cast<double>(vals.size()))
                        : 0.0;
    out << format_double(key.x) << "," << csv_field(key.label) << ","
        << format_double(mean) << "," << format_double(stderr_) << "\n";
  }
}

}  // namespace vrsplit
