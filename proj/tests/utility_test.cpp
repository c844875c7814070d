// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The vrsplit authors

#include "vrsplit/utility.hpp"

#include <gtest/gtest.h>

#include "vrsplit/rng.hpp"

namespace vrsplit {
namespace {

constexpr double kTopRate = 87.75e6;

// Exhaustive vertex enumeration of {lower <= p <= upper, sum p = 1}: at a
// vertex at most one coordinate is strictly between its bounds. Independent
// of the greedy implementation.
double worst_case_lp_bruteforce(const std::vector<double>& values,
                                const std::vector<double>& lower,
                                const std::vector<double>& upper) {
  const std::size_t n = values.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t mask = 0; mask < (1u << n); ++mask) {
    for (std::size_t free = 0; free <= n; ++free) {  // free == n: no free coord
      double sum = 0;
      std::vector<double> p(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (i == free) continue;
        p[i] = (mask >> i) & 1 ? upper[i] : lower[i];
        sum += p[i];
      }
      if (free < n) {
        p[free] = 1.0 - sum;
        if (p[free] < lower[free] - 1e-12 || p[free] > upper[free] + 1e-12) continue;
      } else if (std::abs(sum - 1.0) > 1e-12) {
        continue;
      }
      double obj = 0;
      for (std::size_t i = 0; i < n; ++i) obj += p[i] * values[i];
      best = std::min(best, obj);
    }
  }
  return best;
}

TEST(UtilityFunction, ReferenceValues) {
  const auto u = UtilityFunction::with_top_rate(kTopRate);
  EXPECT_DOUBLE_EQ(u.value(kTopRate / 1000.0), 0.0);
  EXPECT_NEAR(u.value(kTopRate), 0.6 * std::log(1000.0), 1e-12);
  EXPECT_NEAR(u.value(kTopRate), 4.144653167389282, 1e-12);
  EXPECT_DOUBLE_EQ(u.value(0.0), 0.0);
  EXPECT_THROW(u.value(-1.0), std::domain_error);
  EXPECT_THROW(u.value(kTopRate * 1.01), std::domain_error);
}

TEST(UtilityFunction, MonotoneAndMidpointConcave) {
  const auto u = UtilityFunction::with_top_rate(kTopRate);
  const Philox4x32 gen(5);
  for (int i = 0; i < 2000; ++i) {
    const double a = u.floor_rate() +
                     gen.uniform(2 * i) * (kTopRate - u.floor_rate());
    const double b = u.floor_rate() +
                     gen.uniform(2 * i + 1) * (kTopRate - u.floor_rate());
    const double lo = std::min(a, b), hi = std::max(a, b);
    EXPECT_LE(u.value(lo), u.value(hi) + 1e-15);
    EXPECT_GE(u.value(0.5 * (a + b)) + 1e-12,
              0.5 * (u.value(a) + u.value(b)));  // midpoint concavity
  }
}

TEST(WorstCaseDistribution, SpecExamples) {
  EXPECT_EQ(worst_case_distribution({1, 2}, {0, 0}, {1, 1}),
            (std::vector<double>{1, 0}));
  const auto p = worst_case_distribution({3, 1, 2}, {0.2, 0.2, 0.2}, {0.5, 0.5, 0.5});
  EXPECT_NEAR(p[0], 0.2, 1e-15);
  EXPECT_NEAR(p[1], 0.5, 1e-15);
  EXPECT_NEAR(p[2], 0.3, 1e-15);
  EXPECT_THROW(worst_case_distribution({1, 2}, {0.6, 0.6}, {0.7, 0.7}),
               std::domain_error);
}

TEST(WorstCaseDistribution, EqualUtilitiesDegenerate) {
  const std::vector<double> vals = {2.0, 2.0, 2.0};
  const auto p = worst_case_distribution(vals, {0.1, 0.1, 0.1}, {0.9, 0.9, 0.9});
  double sum = 0, obj = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sum += p[i];
    obj += p[i] * vals[i];
  }
  EXPECT_NEAR(sum, 1.0, 1e-15);
  EXPECT_NEAR(obj, 2.0, 1e-15);
}

TEST(WorstCaseDistribution, MatchesVertexEnumerationAndDual) {
  const Philox4x32 gen(17);
  std::uint64_t ctr = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(gen.uniform(ctr++) * 5);  // 2..6
    std::vector<double> vals(n), lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
      vals[i] = 8.0 * gen.uniform(ctr++) - 1.0;
      const double a = gen.uniform(ctr++);
      const double b = gen.uniform(ctr++);
      lo[i] = std::min(a, b) * 0.5;
      hi[i] = std::max(a, b);
    }
    double lo_sum = 0, hi_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      lo_sum += lo[i];
      hi_sum += hi[i];
    }
    if (lo_sum > 1.0 || hi_sum < 1.0) {
      --trial;  // resample infeasible boxes
      continue;
    }
    const auto p = worst_case_distribution(vals, lo, hi);
    double greedy = 0, mass = 0;
    for (std::size_t i = 0; i < n; ++i) {
      greedy += p[i] * vals[i];
      mass += p[i];
      EXPECT_GE(p[i], lo[i] - 1e-12);
      EXPECT_LE(p[i], hi[i] + 1e-12);
    }
    EXPECT_NEAR(mass, 1.0, 1e-12);
    const double brute = worst_case_lp_bruteforce(vals, lo, hi);
    EXPECT_NEAR(greedy, brute, 1e-6);
    const auto dual = worst_case_dual(vals, lo, hi);
    EXPECT_NEAR(dual.value, brute, 1e-6);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_GE(dual.lambda[i], 0.0);
      EXPECT_GE(dual.tau[i], 0.0);
      EXPECT_GE(vals[i] + dual.lambda[i] - dual.tau[i] + dual.gamma, -1e-12);
    }
  }
}

std::vector<UserPrediction> single_user(ProbabilityModel prob) {
  UserPrediction up;
  up.user = 1;
  up.fov_indices.resize(prob.size());
  for (std::size_t i = 0; i < up.fov_indices.size(); ++i)
    up.fov_indices[i] = static_cast<int>(i + 1);
  up.prob = std::move(prob);
  return {up};
}

TEST(QMetric, PerfectCaseWeightedAverage) {
  const auto u = UtilityFunction::with_top_rate(kTopRate);
  // utilities 2 and 4 at rates chosen by inverting the log
  const double r1 = kTopRate / 1000.0 * std::exp(2.0 / 0.6);
  const double r2 = kTopRate / 1000.0 * std::exp(4.0 / 0.6);
  const auto users = single_user(ProbabilityModel::perfect({0.25, 0.75}));
  const auto m = q_metric(FovCase::pp, {{r1, r2}}, users, u);
  EXPECT_NEAR(m.value, 3.5, 1e-9);
}

TEST(QMetric, UnknownCaseEqualRates) {
  const auto u = UtilityFunction::with_top_rate(kTopRate);
  const double rho = 30e6;
  std::vector<UserPrediction> users;
  for (int k = 0; k < 3; ++k) {
    auto one = single_user(ProbabilityModel::unknown(4));
    users.push_back(one[0]);
  }
  const auto m = q_metric(FovCase::up,
                          {{rho, rho, rho, rho}, {rho, rho, rho, rho},
                           {rho, rho, rho, rho}},
                          users, u);
  EXPECT_NEAR(m.value, 3.0 * u.value(rho), 1e-12);
}

TEST(QMetric, WideBoxEqualsUnknownCase) {
  const auto u = UtilityFunction::with_top_rate(kTopRate);
  std::vector<double> eps = {0.999, 0.999, 0.999};
  const auto ip_users =
      single_user(ProbabilityModel::boxed({0.2, 0.3, 0.5}, eps));
  const auto up_users = single_user(ProbabilityModel::unknown(3));
  const std::vector<std::vector<double>> rates = {{20e6, 50e6, 80e6}};
  const auto mip = q_metric(FovCase::ip, rates, ip_users, u);
  const auto mup = q_metric(FovCase::up, rates, up_users, u);
  EXPECT_NEAR(mip.value, mup.value, 1e-9);
}

TEST(QMetric, ZeroEpsilonCollapsesToPerfect) {
  const auto u = UtilityFunction::with_top_rate(kTopRate);
  const std::vector<double> p = {0.2, 0.3, 0.5};
  const auto pp_users = single_user(ProbabilityModel::perfect(p));
  const auto ip_users = single_user(ProbabilityModel::boxed(p, 0.0));
  const std::vector<std::vector<double>> rates = {{20e6, 50e6, 80e6}};
  EXPECT_DOUBLE_EQ(q_metric(FovCase::pp, rates, pp_users, u).value,
                   q_metric(FovCase::ip, rates, ip_users, u).value);
}

TEST(QMetric, PointwiseCaseOrdering) {
  const auto u = UtilityFunction::with_top_rate(kTopRate);
  const Philox4x32 gen(23);
  std::uint64_t ctr = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p = {0, 0, 0, 0};
    double sum = 0;
    for (double& v : p) {
      v = gen.uniform(ctr++);
      sum += v;
    }
    for (double& v : p) v /= sum;
    const double eps = gen.uniform(ctr++) * 0.8;
    std::vector<std::vector<double>> rates = {{0, 0, 0, 0}};
    for (double& r : rates[0]) r = gen.uniform(ctr++) * kTopRate;
    const double qpp = q_metric(FovCase::pp, rates, single_user(ProbabilityModel::perfect(p)), u).value;
    const double qip = q_metric(FovCase::ip, rates, single_user(ProbabilityModel::boxed(p, eps)), u).value;
    const double qup = q_metric(FovCase::up, rates, single_user(ProbabilityModel::unknown(4)), u).value;
    EXPECT_GE(qpp, qip - 1e-12);
    EXPECT_GE(qip, qup - 1e-12);
  }
}

TEST(QMetric, CaseMismatchThrows) {
  const auto u = UtilityFunction::with_top_rate(kTopRate);
  const auto users = single_user(ProbabilityModel::perfect({1.0}));
  EXPECT_THROW(q_metric(FovCase::up, {{1e6}}, users, u), std::domain_error);
}

}  // namespace
}  // namespace vrsplit
