// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The vrsplit authors

#pragma once

#include <fstream>
#include <json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "vrsplit/scene.hpp"

namespace vrsplit {

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

// Rate ladder with the given number of levels from a ladder fixture file.
inline RateLadder load_ladder_fixture(const std::string& path, int levels,
                                      double delta) {
  const auto j = load_json_file(path);
  const std::string key = std::to_string(levels);
  if (!j.at("ladders").contains(key))
    throw std::invalid_argument("ladder fixture has no entry for L=" + key);
  std::vector<double> lv = j.at("ladders").at(key).get<std::vector<double>>();
  return RateLadder(std::move(lv), delta);
}

struct PredictionFixture {
  TilingGrid grid;
  std::vector<int> user_ids;
  std::vector<std::vector<int>> fov_indices;  // sorted ascending
  std::vector<std::vector<double>> p;         // aligned with fov_indices
};

// Loads the shipped FoV prediction fixture. Probability rows are kept
// verbatim unless `normalize` rescales them onto the simplex (one shipped
// row does not sum to one while the estimation formula guarantees it).
inline PredictionFixture load_prediction_fixture(const std::string& path,
                                                 bool normalize = false) {
  const auto j = load_json_file(path);
  PredictionFixture out;
  const auto& g = j.at("grid");
  out.grid = TilingGrid(g.at("rows").get<int>(), g.at("cols").get<int>(),
                        g.at("fov_rows").get<int>(), g.at("fov_cols").get<int>());
  for (const auto& row : j.at("users")) {
    std::vector<int> idx = row.at("fov_indices").get<std::vector<int>>();
    std::vector<double> p = row.at("p").get<std::vector<double>>();
    if (idx.size() != p.size())
      throw std::invalid_argument("prediction fixture: misaligned row");
    std::vector<std::size_t> order(idx.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return idx[a] < idx[b]; });
    std::vector<int> sidx(idx.size());
    std::vector<double> sp(p.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      sidx[i] = idx[order[i]];
      sp[i] = p[order[i]];
    }
    if (normalize) {
      double sum = 0;
      for (double v : sp) sum += v;
      if (sum <= 0)
        throw std::invalid_argument("prediction fixture: nonpositive row sum");
      for (double& v : sp) v /= sum;
    }
    out.user_ids.push_back(row.at("user").get<int>());
    out.fov_indices.push_back(std::move(sidx));
    out.p.push_back(std::move(sp));
  }
  return out;
}

// Builds per-user predictions for the requested case from fixture rows.
inline std::vector<UserPrediction> predictions_for_case(
    const PredictionFixture& fixture, const std::vector<int>& user_ids,
    FovCase kind, double eps) {
  std::vector<UserPrediction> out;
  for (int uid : user_ids) {
    std::size_t row = fixture.user_ids.size();
    for (std::size_t i = 0; i < fixture.user_ids.size(); ++i)
      if (fixture.user_ids[i] == uid) row = i;
    if (row == fixture.user_ids.size())
      throw std::invalid_argument("prediction fixture: no user " + std::to_string(uid));
    UserPrediction up;
    up.user = uid;
    up.fov_indices = fixture.fov_indices[row];
    switch (kind) {
      case FovCase::pp:
        up.prob = ProbabilityModel::perfect(fixture.p[row]);
        break;
      case FovCase::ip:
        up.prob = ProbabilityModel::boxed(fixture.p[row], eps);
        break;
      case FovCase::up:
        up.prob = ProbabilityModel::unknown(fixture.p[row].size());
        break;
    }
    out.push_back(std::move(up));
  }
  return out;
}

}  // namespace vrsplit
