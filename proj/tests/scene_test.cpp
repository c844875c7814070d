// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The vrsplit authors

#include "vrsplit/scene.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "vrsplit/fixtures.hpp"

namespace vrsplit {
namespace {

std::string fixture_path(const std::string& rel) {
  return std::string(VRSPLIT_SOURCE_DIR) + "/" + rel;
}

std::vector<Tile> tiles(std::initializer_list<std::pair<int, int>> list) {
  std::vector<Tile> out(list.begin(), list.end());
  std::sort(out.begin(), out.end());
  return out;
}

TEST(FovTiles, ReferenceCoverageSetsOn4x4) {
  const TilingGrid grid(4, 4, 3, 3);
  EXPECT_EQ(fov_tiles(grid, 6).tiles,
            tiles({{1, 1}, {1, 2}, {1, 3}, {2, 1}, {2, 2}, {2, 3}, {3, 1}, {3, 2}, {3, 3}}));
  EXPECT_EQ(fov_tiles(grid, 7).tiles,
            tiles({{1, 2}, {1, 3}, {1, 4}, {2, 2}, {2, 3}, {2, 4}, {3, 2}, {3, 3}, {3, 4}}));
  EXPECT_EQ(fov_tiles(grid, 11).tiles,
            tiles({{2, 2}, {2, 3}, {2, 4}, {3, 2}, {3, 3}, {3, 4}, {4, 2}, {4, 3}, {4, 4}}));
}

TEST(FovTiles, CenterBlockOn8x8) {
  // viewpoint 29 sits at row ceil(29/8) = 4, column 29 - 8*3 = 5
  const TilingGrid grid(8, 8, 3, 3);
  std::vector<Tile> expected;
  for (int r = 3; r <= 5; ++r)
    for (int c = 4; c <= 6; ++c) expected.emplace_back(r, c);
  EXPECT_EQ(fov_tiles(grid, 29).tiles, expected);
}

TEST(FovTiles, SizePreservedEverywhere) {
  for (const auto& grid : {TilingGrid(4, 4, 3, 3), TilingGrid(8, 8, 3, 3),
                           TilingGrid(5, 7, 2, 4), TilingGrid(3, 3, 3, 3)}) {
    for (int v = 1; v <= grid.viewpoints(); ++v) {
      const auto f = fov_tiles(grid, v);
      EXPECT_EQ(static_cast<int>(f.tiles.size()), grid.fov_rows * grid.fov_cols);
      // distinct tiles within bounds
      for (std::size_t i = 1; i < f.tiles.size(); ++i)
        EXPECT_LT(f.tiles[i - 1], f.tiles[i]);
      for (const auto& [x, y] : f.tiles) {
        EXPECT_GE(x, 1);
        EXPECT_LE(x, grid.rows);
        EXPECT_GE(y, 1);
        EXPECT_LE(y, grid.cols);
      }
    }
  }
}

TEST(FovTiles, HorizontalWrapAtLeftEdge) {
  const TilingGrid grid(8, 8, 3, 3);
  const auto f = fov_tiles(grid, 9);  // row 2, column 1
  for (int r = 1; r <= 3; ++r) {
    EXPECT_TRUE(std::binary_search(f.tiles.begin(), f.tiles.end(), Tile{r, 8}));
    EXPECT_TRUE(std::binary_search(f.tiles.begin(), f.tiles.end(), Tile{r, 1}));
    EXPECT_TRUE(std::binary_search(f.tiles.begin(), f.tiles.end(), Tile{r, 2}));
  }
}

TEST(FovTiles, ViewpointOutOfRangeThrows) {
  const TilingGrid grid(4, 4, 3, 3);
  EXPECT_THROW(fov_tiles(grid, 0), std::domain_error);
  EXPECT_THROW(fov_tiles(grid, 17), std::domain_error);
}

TEST(UnionFovs, PairAndIdempotence) {
  const TilingGrid grid(4, 4, 3, 3);
  const auto f6 = fov_tiles(grid, 6);
  const auto f7 = fov_tiles(grid, 7);
  EXPECT_EQ(union_fovs({f6}), f6.tiles);
  EXPECT_EQ(union_fovs({f6, f6}), f6.tiles);
  std::vector<Tile> expected;
  for (int r = 1; r <= 3; ++r)
    for (int c = 1; c <= 4; ++c) expected.emplace_back(r, c);
  EXPECT_EQ(union_fovs({f6, f7}), expected);
  EXPECT_THROW(union_fovs({}), std::invalid_argument);
}

TEST(ExclusiveTiles, SubtractionAndDisjointness) {
  const TilingGrid grid(4, 4, 3, 3);
  const auto f6 = fov_tiles(grid, 6);
  const auto f7 = fov_tiles(grid, 7);
  EXPECT_EQ(exclusive_tiles({f6, f7}, 6), tiles({{1, 1}, {2, 1}, {3, 1}}));
  EXPECT_EQ(exclusive_tiles({f6}, 6), f6.tiles);

  FovSet dup = f6;
  dup.index = 99;
  EXPECT_TRUE(exclusive_tiles({f6, dup}, 6).empty());
  EXPECT_TRUE(exclusive_tiles({f6, dup}, 99).empty());

  // pairwise disjoint across FoVs of one user
  const std::vector<FovSet> fovs = {fov_tiles(grid, 6), fov_tiles(grid, 7),
                                    fov_tiles(grid, 11)};
  std::set<Tile> seen;
  for (const auto& f : fovs)
    for (const auto& t : exclusive_tiles(fovs, f.index)) {
      EXPECT_FALSE(seen.count(t));
      seen.insert(t);
    }
}

TEST(Neighborhood, InteriorRowsAndWrap) {
  const TilingGrid grid(8, 8, 3, 3);
  EXPECT_EQ(neighborhood(grid, 28), (std::vector<int>{20, 27, 28, 29, 36}));
  EXPECT_EQ(neighborhood(grid, 21), (std::vector<int>{13, 20, 21, 22, 29}));
  EXPECT_EQ(neighborhood(grid, 9), (std::vector<int>{1, 9, 10, 16, 17}));
  // right edge wraps to column 1 of the same row
  EXPECT_EQ(neighborhood(grid, 24), (std::vector<int>{16, 17, 23, 24, 32}));
  // top row drops the clamped upper neighbour
  EXPECT_EQ(neighborhood(grid, 2), (std::vector<int>{1, 2, 3, 10}));
}

TEST(EstimateProbabilities, CountingOracle) {
  const TilingGrid grid(8, 8, 3, 3);
  // user 0 anchors at viewpoint 28; four others move to 29, 29, 29, 27
  std::vector<ViewTrace> traces;
  traces.push_back({0, {28, 28, 28}});
  traces.push_back({1, {10, 28, 29}});
  traces.push_back({2, {11, 28, 29}});
  traces.push_back({3, {12, 28, 29}});
  traces.push_back({4, {13, 28, 27}});
  const auto pred = estimate_probabilities(traces, grid, 0, 2);
  EXPECT_EQ(pred.fov_indices, (std::vector<int>{20, 27, 28, 29, 36}));
  EXPECT_EQ(pred.prob.kind, FovCase::pp);
  EXPECT_DOUBLE_EQ(pred.prob.p[1], 0.25);  // FoV 27
  EXPECT_DOUBLE_EQ(pred.prob.p[3], 0.75);  // FoV 29

  double sum = 0;
  for (double v : pred.prob.p) sum += v;
  EXPECT_EQ(sum, 1.0);
}

TEST(EstimateProbabilities, AllSameTargetAndErrors) {
  const TilingGrid grid(8, 8, 3, 3);
  std::vector<ViewTrace> traces;
  traces.push_back({0, {28, 28, 28}});
  traces.push_back({1, {28, 28, 36}});
  traces.push_back({2, {28, 28, 36}});
  const auto pred = estimate_probabilities(traces, grid, 0, 2);
  EXPECT_DOUBLE_EQ(pred.prob.p[4], 1.0);  // FoV 36
  EXPECT_DOUBLE_EQ(pred.prob.p[0], 0.0);

  // no trace matches the anchor viewpoint
  std::vector<ViewTrace> miss;
  miss.push_back({0, {28, 28, 28}});
  miss.push_back({1, {10, 11, 12}});
  EXPECT_THROW(estimate_probabilities(miss, grid, 0, 2), std::runtime_error);
}

TEST(EstimateProbabilities, TraceCsvReproducesFixtureRow) {
  // Transitions from viewpoint 29 distributed 4:6:4:1:1 over {21,28,29,30,37}
  // reproduce the shipped prediction row for user 4 exactly.
  const TilingGrid grid(8, 8, 3, 3);
  namespace fs = std::filesystem;
  const auto path = fs::temp_directory_path() / "vrsplit_traces_test.csv";
  {
    std::ofstream out(path);
    out << "user_id,t_index,viewpoint\n";
    out << "32,1,29\n32,2,29\n32,3,29\n";
    int uid = 100;
    auto emit = [&](int target, int count) {
      for (int i = 0; i < count; ++i, ++uid)
        out << uid << ",1,10\n" << uid << ",2,29\n" << uid << ",3," << target << "\n";
    };
    emit(21, 4);
    emit(28, 6);
    emit(29, 4);
    emit(30, 1);
    emit(37, 1);
  }
  const auto traces = load_traces(path.string());
  const auto pred = estimate_probabilities(traces, grid, 32, 2);
  EXPECT_EQ(pred.fov_indices, (std::vector<int>{21, 28, 29, 30, 37}));
  const std::vector<double> expected = {0.25, 0.375, 0.25, 0.0625, 0.0625};
  for (std::size_t i = 0; i < expected.size(); ++i)
    EXPECT_DOUBLE_EQ(pred.prob.p[i], expected[i]);
  fs::remove(path);
}

TEST(BoxBounds, ClippingAndErrors) {
  {
    const auto [lo, hi] = box_bounds({0.5, 0.5}, {0.2, 0.2});
    EXPECT_EQ(lo, (std::vector<double>{0.3, 0.3}));
    EXPECT_EQ(hi, (std::vector<double>{0.7, 0.7}));
  }
  {
    const auto [lo, hi] = box_bounds({0.9, 0.1}, {0.2, 0.2});
    EXPECT_DOUBLE_EQ(lo[0], 0.7);
    EXPECT_DOUBLE_EQ(lo[1], 0.0);
    EXPECT_DOUBLE_EQ(hi[0], 1.0);
    EXPECT_NEAR(hi[1], 0.3, 1e-15);
  }
  {
    const auto [lo, hi] = box_bounds({0.375, 0.5, 0.125, 0.0, 0.0},
                                     {0.4, 0.4, 0.4, 0.4, 0.4});
    const std::vector<double> elo = {0.0, 0.1, 0.0, 0.0, 0.0};
    const std::vector<double> ehi = {0.775, 0.9, 0.525, 0.4, 0.4};
    for (std::size_t i = 0; i < elo.size(); ++i) {
      EXPECT_NEAR(lo[i], elo[i], 1e-15);
      EXPECT_NEAR(hi[i], ehi[i], 1e-15);
    }
    for (std::size_t i = 0; i < elo.size(); ++i) {
      EXPECT_GE(lo[i], 0.0);
      EXPECT_LE(lo[i], hi[i]);
      EXPECT_LE(hi[i], 1.0);
    }
  }
  // a verbatim row summing above one makes the lower bounds alone exceed the
  // simplex for small eps
  EXPECT_THROW(box_bounds({0.4138, 0.1724, 0.2414, 0.1667, 0.0417},
                          {0.001, 0.001, 0.001, 0.001, 0.001}),
               std::invalid_argument);
}

TEST(Fixtures, LaddersLoadAndNest) {
  const std::string path = fixture_path("fixtures/encoding_ladders.json");
  const auto l3 = load_ladder_fixture(path, 3, 4.4e7);
  const auto l5 = load_ladder_fixture(path, 5, 4.4e7);
  const auto l7 = load_ladder_fixture(path, 7, 4.4e7);
  EXPECT_EQ(l3.levels.size(), 3u);
  EXPECT_EQ(l5.levels.size(), 5u);
  EXPECT_EQ(l7.levels.size(), 7u);
  EXPECT_DOUBLE_EQ(l3.top(), 87.75e6);
  EXPECT_DOUBLE_EQ(l5.top(), 87.75e6);
  EXPECT_DOUBLE_EQ(l7.top(), 87.75e6);
  for (double v : l3.levels)
    EXPECT_TRUE(std::find(l5.levels.begin(), l5.levels.end(), v) != l5.levels.end());
  for (double v : l5.levels)
    EXPECT_TRUE(std::find(l7.levels.begin(), l7.levels.end(), v) != l7.levels.end());
  const auto scaled = l3.scaled(10.0);
  EXPECT_DOUBLE_EQ(scaled.top(), 8.775e6);
  EXPECT_DOUBLE_EQ(scaled.delta, 4.4e6);
}

TEST(Fixtures, PredictionRowsVerbatimAndNormalized) {
  const std::string path = fixture_path("fixtures/fov_predictions.json");
  const auto verbatim = load_prediction_fixture(path, false);
  ASSERT_EQ(verbatim.user_ids.size(), 5u);
  double row1 = 0;
  for (double v : verbatim.p[0]) row1 += v;
  EXPECT_NEAR(row1, 1.036, 1e-12);  // kept as shipped

  const auto normalized = load_prediction_fixture(path, true);
  for (const auto& row : normalized.p) {
    double sum = 0;
    for (double v : row) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  // row 4 is exactly dyadic and survives normalization unchanged
  const auto preds = predictions_for_case(normalized, {4}, FovCase::pp, 0.0);
  ASSERT_EQ(preds.size(), 1u);
  EXPECT_EQ(preds[0].fov_indices, (std::vector<int>{21, 28, 29, 30, 37}));
  EXPECT_DOUBLE_EQ(preds[0].prob.p[1], 0.375);
}

}  // namespace
}  // namespace vrsplit
