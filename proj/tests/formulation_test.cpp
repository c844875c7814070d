// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The vrsplit authors

#include "vrsplit/formulation.hpp"

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "vrsplit/rng.hpp"

namespace vrsplit {
namespace {

using testing::InstanceOptions;
using testing::make_instance;

TEST(BuildProblem, ConstraintFamilyCounts) {
  InstanceOptions opt;
  opt.kind = FovCase::pp;
  opt.antennas = 4;
  opt.subcarriers = 4;
  const DCProblem p = make_instance(opt);
  EXPECT_EQ(p.count_dc_common(), 8);
  EXPECT_EQ(p.count_dc_private(), 8);
  EXPECT_EQ(p.count_exp_rate(), 12);
  EXPECT_EQ(p.count_sum_rate(), 2);
  EXPECT_EQ(p.count_power(), 1);
  EXPECT_EQ(static_cast<int>(dc_pairs(p).size()), 16);

  opt.kind = FovCase::ip;
  const DCProblem ip = make_instance(opt);
  EXPECT_EQ(ip.count_dual_feasibility(), 4);  // |I_1| + |I_2|

  opt.kind = FovCase::up;
  const DCProblem up = make_instance(opt);
  EXPECT_EQ(up.count_hypograph(), 4);

  opt.kind = FovCase::pp;
  opt.rate_splitting = false;
  const DCProblem sdma = make_instance(opt);
  EXPECT_EQ(sdma.count_dc_common(), 0);
  EXPECT_EQ(sdma.count_exp_rate(), 8);
}

TEST(BuildProblem, RejectsMismatchedInputs) {
  InstanceOptions opt;
  const DCProblem p = make_instance(opt);
  SystemConfig other = p.radio;
  other.antennas += 1;
  EXPECT_THROW(build_problem(p.kind, p.grid, p.users, p.ladder, p.channels, other,
                             p.utility),
               std::invalid_argument);
  auto wrong_case = p.users;
  wrong_case[0].prob = ProbabilityModel::unknown(wrong_case[0].fov_indices.size());
  EXPECT_THROW(build_problem(FovCase::pp, p.grid, wrong_case, p.ladder, p.channels,
                             p.radio, p.utility),
               std::invalid_argument);
}

TEST(CheckFeasibility, ZeroPointIsFeasible) {
  const DCProblem p = make_instance({});
  const DecisionVars v = zero_vars(p);
  const auto rep = check_feasibility(p, v, 1e-9);
  EXPECT_TRUE(rep.feasible);
  EXPECT_LE(rep.max_rel_violation, 0.0);
}

TEST(CheckFeasibility, PowerScalingFlagsOnlyPowerFamily) {
  const DCProblem p = make_instance({});
  DecisionVars v = zero_vars(p);
  // fill beamformers until total power exceeds the budget by half
  const double per =
      std::sqrt(1.5 * p.radio.power_w / (p.num_streams() * p.radio.subcarriers));
  for (auto& stream : v.w)
    for (auto& w : stream) {
      w.setZero();
      w[0] = per;
    }
  const auto rep = check_feasibility(p, v, 1e-6);
  EXPECT_FALSE(rep.feasible);
  EXPECT_GT(rep.find("power").worst_rel, 0.4);
  EXPECT_LE(rep.find("sum_rate").worst_rel, 1e-12);
  EXPECT_LE(rep.find("smooth_lower").worst_rel, 0.0);
  EXPECT_LE(rep.find("common_rate").worst_rel, 0.0);
  EXPECT_LE(rep.find("private_rate").worst_rel, 0.0);
}

TEST(ApplyMaxRule, OverlapTakesTheLargerFovRate) {
  // user 1 of the reference scene: FoV 6 at D_2, FoV 7 at D_1
  InstanceOptions opt;
  opt.ladder_scale = 1.0;
  const DCProblem p = make_instance(opt);
  const double d1 = 14.46e6, d2 = 52.97e6;
  std::vector<std::vector<double>> r = {{d2, d1}, {0.0, 0.0}};
  const auto mr = apply_max_rule(p, r);
  const auto f6 = fov_tiles(p.grid, 6);
  const auto f7 = fov_tiles(p.grid, 7);
  for (std::size_t t = 0; t < p.union_tiles[0].size(); ++t) {
    const Tile& tile = p.union_tiles[0][t];
    const bool in6 = std::binary_search(f6.tiles.begin(), f6.tiles.end(), tile);
    EXPECT_DOUBLE_EQ(mr.R[0][t], in6 ? d2 : d1);
    if (!in6)
      EXPECT_TRUE(std::binary_search(f7.tiles.begin(), f7.tiles.end(), tile));
  }
  EXPECT_LE(mr.worst_upper_violation, 0.0);  // d2 - d1 < delta = 4.4e7
}

TEST(ApplyMaxRule, SingleFovIdentityAndDeltaViolation) {
  InstanceOptions opt;
  opt.ladder_scale = 10.0;
  const DCProblem p = make_instance(opt);
  {
    std::vector<std::vector<double>> r = {{3e6, 3e6}, {2e6, 2e6}};
    const auto mr = apply_max_rule(p, r);
    for (double R : mr.R[0]) EXPECT_DOUBLE_EQ(R, 3e6);
    EXPECT_LE(mr.worst_upper_violation, 0.0);
  }
  {
    // spread beyond delta on the overlap of FoVs 6 and 7
    std::vector<std::vector<double>> r = {{8e6, 1e6}, {2e6, 2e6}};
    const auto mr = apply_max_rule(p, r);
    EXPECT_NEAR(mr.worst_upper_violation, 8e6 - 1e6 - p.ladder.delta, 1.0);
    EXPECT_GT(mr.worst_upper_violation, 0.0);
  }
}

TEST(DcSplit, BothSidesMidpointConvex) {
  const DCProblem p = make_instance({});
  const auto pairs = dc_pairs(p);
  const Philox4x32 gen(77);
  std::uint64_t ctr = 0;
  auto random_point = [&]() {
    DecisionVars v = zero_vars(p);
    for (auto& stream : v.w)
      for (auto& w : stream)
        for (int m = 0; m < p.radio.antennas; ++m) {
          const auto z = gen.normal_pair(ctr++);
          w[m] = 0.3 * std::complex<double>(z[0], z[1]);
        }
    for (auto& stream : v.u)
      for (auto& u : stream) u = 1.0 + 10.0 * gen.uniform(ctr++);
    return v;
  };
  auto midpoint = [&](const DecisionVars& a, const DecisionVars& b) {
    DecisionVars m = a;
    for (std::size_t s = 0; s < a.w.size(); ++s)
      for (std::size_t n = 0; n < a.w[s].size(); ++n) {
        m.w[s][n] = 0.5 * (a.w[s][n] + b.w[s][n]);
        m.u[s][n] = 0.5 * (a.u[s][n] + b.u[s][n]);
      }
    return m;
  };
  for (int trial = 0; trial < 25; ++trial) {
    const auto a = random_point();
    const auto b = random_point();
    const auto m = midpoint(a, b);
    for (const auto& pair : pairs) {
      EXPECT_LE(dc_f_value(p, pair, m),
                0.5 * (dc_f_value(p, pair, a) + dc_f_value(p, pair, b)) + 1e-9);
      EXPECT_LE(dc_g_value(p, pair, m),
                0.5 * (dc_g_value(p, pair, a) + dc_g_value(p, pair, b)) + 1e-9);
    }
  }
}

TEST(EquivalentObjective, MatchesMetricOncePositive) {
  InstanceOptions opt;
  opt.kind = FovCase::pp;
  const DCProblem p = make_instance(opt);
  DecisionVars v = zero_vars(p);
  // rates comfortably above the zero crossing of the utility
  for (int k = 0; k < p.num_users(); ++k)
    for (double& r : v.r[k]) r = 3e6;
  const double obj = equivalent_objective(p, v);
  const double metric = q_metric(p.kind, v.r, p.users, p.utility).value;
  EXPECT_NEAR(obj, metric, 1e-12);
}

TEST(Serialization, VarsRoundTripBitExactly) {
  for (const FovCase kind : {FovCase::pp, FovCase::ip, FovCase::up}) {
    InstanceOptions opt;
    opt.kind = kind;
    const DCProblem p = make_instance(opt);
    DecisionVars v = zero_vars(p);
    const Philox4x32 gen(41);
    std::uint64_t ctr = 0;
    for (auto& stream : v.w)
      for (auto& w : stream)
        for (int m = 0; m < p.radio.antennas; ++m) {
          const auto z = gen.normal_pair(ctr++);
          w[m] = std::complex<double>(z[0] / 3, z[1] / 3);
        }
    for (int k = 0; k < p.num_users(); ++k) {
      for (double& x : v.R[k]) x = gen.uniform(ctr++) * 1e7;
      for (double& x : v.r[k]) x = gen.uniform(ctr++) * 1e7;
      v.d_p[k] = gen.uniform(ctr++) * 1e7;
    }
    if (kind == FovCase::ip)
      for (int k = 0; k < p.num_users(); ++k) v.gamma[k] = -gen.uniform(ctr++);
    if (kind == FovCase::up)
      for (double& y : v.y) y = gen.uniform(ctr++);

    std::stringstream buf;
    write_vars(p, v, buf);
    const DecisionVars back = read_vars(p, buf);
    EXPECT_EQ(back.R, v.R);
    EXPECT_EQ(back.r, v.r);
    EXPECT_EQ(back.d_p, v.d_p);
    EXPECT_EQ(back.e, v.e);
    EXPECT_EQ(back.u, v.u);
    EXPECT_EQ(back.gamma, v.gamma);
    EXPECT_EQ(back.y, v.y);
    for (std::size_t s = 0; s < v.w.size(); ++s)
      for (std::size_t n = 0; n < v.w[s].size(); ++n)
        EXPECT_TRUE(back.w[s][n] == v.w[s][n]);
  }
}

TEST(Serialization, ProblemSummaryListsFamilies) {
  const DCProblem p = make_instance({});
  std::ostringstream out;
  write_problem_summary(p, out);
  EXPECT_NE(out.str().find("dc_common=8"), std::string::npos);
  EXPECT_NE(out.str().find("exp=12"), std::string::npos);
}

TEST(RecoverSolution, UniformizesUnknownCaseExactly) {
  InstanceOptions opt;
  opt.kind = FovCase::up;
  const DCProblem p = make_instance(opt);
  DecisionVars v = zero_vars(p);
  v.r = {{3.0e6, 2.5e6}, {2.0e6, 2.2e6}};
  for (int k = 0; k < p.num_users(); ++k) {
    const auto mr = apply_max_rule(p, v.r);
    v.R = mr.R;
  }
  for (int k = 0; k < p.num_users(); ++k) {
    double total = 0;
    for (double R : v.R[k]) total += R;
    v.d_p[k] = total;
  }
  v.y = {p.utility.value(2.5e6), p.utility.value(2.0e6)};
  const double before = q_metric(p.kind, v.r, p.users, p.utility).value;
  const auto plan = recover_solution(p, v, 1e-6);
  for (int k = 0; k < p.num_users(); ++k) {
    const double first = plan.vars.r[k][0];
    for (double r : plan.vars.r[k]) EXPECT_EQ(r, first);  // exactly uniform
  }
  EXPECT_NEAR(plan.metric, before, 1e-12);
  EXPECT_NEAR(plan.objective, before, 1e-9);
  EXPECT_TRUE(plan.vars.y.empty());
}

}  // namespace
}  // namespace vrsplit
