// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The vrsplit authors

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vrsplit {

// Tile coordinates are 1-based (row, column).
using Tile = std::pair<int, int>;

// Equirectangular tiling of one 360 frame. Viewpoints are indexed 1..X*Y in
// row-major order; the field of view spans fov_rows x fov_cols tiles, wrapping
// horizontally and shifting inward at the poles.
struct TilingGrid {
  int rows = 0;      // X
  int cols = 0;      // Y
  int fov_rows = 0;  // FoV extent in tile rows
  int fov_cols = 0;  // FoV extent in tile columns

  TilingGrid() = default;
  TilingGrid(int x, int y, int fr, int fc)
      : rows(x), cols(y), fov_rows(fr), fov_cols(fc) {
    if (x <= 0 || y <= 0 || fr <= 0 || fc <= 0)
      throw std::invalid_argument("TilingGrid: dimensions must be positive");
    if (fr > x || fc > y)
      throw std::invalid_argument("TilingGrid: FoV extent exceeds grid");
  }

  int viewpoints() const { return rows * cols; }

  int tile_row(int viewpoint) const { return (viewpoint + cols - 1) / cols; }
  int tile_col(int viewpoint) const {
    return viewpoint - cols * (tile_row(viewpoint) - 1);
  }
  int viewpoint_of(int row, int col) const { return (row - 1) * cols + col; }
};

// The set of tiles covered by one FoV, kept sorted for set algebra.
struct FovSet {
  int index = 0;
  std::vector<Tile> tiles;
};

// Per-FoV viewing probability knowledge: exact (pp), boxed (ip), none (up).
enum class FovCase { pp, ip, up };

inline const char* to_string(FovCase c) {
  switch (c) {
    case FovCase::pp: return "pp";
    case FovCase::ip: return "ip";
    case FovCase::up: return "up";
  }
  return "?";
}

inline FovCase fov_case_from_string(const std::string& s) {
  if (s == "pp") return FovCase::pp;
  if (s == "ip") return FovCase::ip;
  if (s == "up") return FovCase::up;
  throw std::invalid_argument("unknown case: " + s);
}

// Elementwise box [max(p_hat-eps,0), min(p_hat+eps,1)]. Throws if the box
// cannot intersect the probability simplex.
inline std::pair<std::vector<double>, std::vector<double>> box_bounds(
    const std::vector<double>& p_hat, const std::vector<double>& eps) {
  if (p_hat.size() != eps.size())
    throw std::invalid_argument("box_bounds: size mismatch");
  std::vector<double> lower(p_hat.size()), upper(p_hat.size());
  double lo_sum = 0, hi_sum = 0;
  for (std::size_t i = 0; i < p_hat.size(); ++i) {
    if (eps[i] < 0.0 || eps[i] >= 1.0)
      throw std::invalid_argument("box_bounds: eps out of [0,1)");
    lower[i] = std::max(p_hat[i] - eps[i], 0.0);
    upper[i] = std::min(p_hat[i] + eps[i], 1.0);
    lo_sum += lower[i];
    hi_sum += upper[i];
  }
  if (lo_sum > 1.0 + 1e-12 || hi_sum < 1.0 - 1e-12)
    throw std::invalid_argument(
        "box_bounds: empty uncertainty set (bounds exclude the simplex)");
  return {std::move(lower), std::move(upper)};
}

struct ProbabilityModel {
  FovCase kind = FovCase::up;
  std::vector<double> p;      // pp
  std::vector<double> p_hat;  // ip
  std::vector<double> eps;    // ip
  std::vector<double> lower;  // ip
  std::vector<double> upper;  // ip

  static ProbabilityModel perfect(std::vector<double> probs) {
    double sum = 0;
    for (double v : probs) {
      if (v < 0) throw std::invalid_argument("ProbabilityModel: negative p");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("ProbabilityModel: p must sum to 1");
    ProbabilityModel m;
    m.kind = FovCase::pp;
    m.p = std::move(probs);
    return m;
  }

  static ProbabilityModel boxed(std::vector<double> p_hat,
                                std::vector<double> eps) {
    auto [lo, hi] = box_bounds(p_hat, eps);
    ProbabilityModel m;
    m.kind = FovCase::ip;
    m.p_hat = std::move(p_hat);
    m.eps = std::move(eps);
    m.lower = std::move(lo);
    m.upper = std::move(hi);
    return m;
  }

  static ProbabilityModel boxed(std::vector<double> p_hat, double eps) {
    std::vector<double> e(p_hat.size(), eps);
    return boxed(std::move(p_hat), std::move(e));
  }

  static ProbabilityModel unknown(std::size_t count) {
    ProbabilityModel m;
    m.kind = FovCase::up;
    m.p.assign(count, 0.0);
    return m;
  }

  std::size_t size() const {
    return kind == FovCase::ip ? p_hat.size() : p.size();
  }
};

// One user's FoV prediction: candidate FoV indices and probability knowledge.
struct UserPrediction {
  int user = 0;
  std::vector<int> fov_indices;  // I_k, sorted ascending
  ProbabilityModel prob;
};

// Available encoding rates per tile, strictly increasing, plus the quality
// variation tolerance delta used by the smoothness constraint.
struct RateLadder {
  std::vector<double> levels;  // D_1..D_L in bits/s
  double delta = 0;            // bits/s

  RateLadder() = default;
  RateLadder(std::vector<double> lv, double d) : levels(std::move(lv)), delta(d) {
    if (levels.empty()) throw std::invalid_argument("RateLadder: empty");
    if (delta <= 0) throw std::invalid_argument("RateLadder: delta must be > 0");
    double prev = 0;
    for (double v : levels) {
      if (v <= prev)
        throw std::invalid_argument("RateLadder: levels must be strictly increasing and positive");
      prev = v;
    }
  }

  double top() const { return levels.back(); }

  RateLadder scaled(double factor) const {
    if (factor <= 0) throw std::invalid_argument("RateLadder: scale factor must be > 0");
    RateLadder out = *this;
    for (double& v : out.levels) v /= factor;
    out.delta /= factor;
    return out;
  }
};

// Tiles covered by the FoV centered at `viewpoint`. Columns wrap modulo the
// grid width; row ranges are shifted inward at the poles so the block size is
// always fov_rows * fov_cols.
inline FovSet fov_tiles(const TilingGrid& grid, int viewpoint) {
  if (viewpoint < 1 || viewpoint > grid.viewpoints())
    throw std::domain_error("fov_tiles: viewpoint out of range");
  const int row = grid.tile_row(viewpoint);
  const int col = grid.tile_col(viewpoint);
  int row_lo = row - (grid.fov_rows - 1) / 2;
  row_lo = std::clamp(row_lo, 1, grid.rows - grid.fov_rows + 1);
  const int col_lo = col - (grid.fov_cols - 1) / 2;

  FovSet out;
  out.index = viewpoint;
  out.tiles.reserve(static_cast<std::size_t>(grid.fov_rows) * grid.fov_cols);
  for (int dr = 0; dr < grid.fov_rows; ++dr) {
    for (int dc = 0; dc < grid.fov_cols; ++dc) {
      int c = col_lo + dc;
      c = ((c - 1) % grid.cols + grid.cols) % grid.cols + 1;
      out.tiles.emplace_back(row_lo + dr, c);
    }
  }
  std::sort(out.tiles.begin(), out.tiles.end());
  return out;
}

inline std::vector<Tile> union_fovs(const std::vector<FovSet>& fovs) {
  if (fovs.empty()) throw std::invalid_argument("union_fovs: empty list");
  std::set<Tile> acc;
  for (const auto& f : fovs) acc.insert(f.tiles.begin(), f.tiles.end());
  return {acc.begin(), acc.end()};
}

// Tiles of FoV i belonging to no other FoV in the list. Results for distinct
// i are pairwise disjoint.
inline std::vector<Tile> exclusive_tiles(const std::vector<FovSet>& fovs, int i) {
  const FovSet* self = nullptr;
  std::set<Tile> others;
  for (const auto& f : fovs) {
    if (f.index == i && self == nullptr) {
      self = &f;
    } else {
      others.insert(f.tiles.begin(), f.tiles.end());
    }
  }
  if (self == nullptr)
    throw std::invalid_argument("exclusive_tiles: index not in list");
  std::vector<Tile> out;
  for (const Tile& t : self->tiles)
    if (!others.count(t)) out.push_back(t);
  return out;
}

// The viewpoint itself plus its four neighbours (up, left, right, down),
// with horizontal wrap and vertical clamp; clamped duplicates are removed.
inline std::vector<int> neighborhood(const TilingGrid& grid, int viewpoint) {
  if (viewpoint < 1 || viewpoint > grid.viewpoints())
    throw std::domain_error("neighborhood: viewpoint out of range");
  const int row = grid.tile_row(viewpoint);
  const int col = grid.tile_col(viewpoint);
  std::set<int> out;
  out.insert(viewpoint);
  if (row > 1) out.insert(grid.viewpoint_of(row - 1, col));
  if (row < grid.rows) out.insert(grid.viewpoint_of(row + 1, col));
  const int left = col == 1 ? grid.cols : col - 1;
  const int right = col == grid.cols ? 1 : col + 1;
  out.insert(grid.viewpoint_of(row, left));
  out.insert(grid.viewpoint_of(row, right));
  return {out.begin(), out.end()};
}

// One user's viewpoint sequence over time.
struct ViewTrace {
  int user_id = 0;
  std::vector<int> viewpoints;
};

// Reads a trace CSV with header user_id,t_index,viewpoint. Rows may appear in
// any order; each user's sequence is ordered by t_index.
inline std::vector<ViewTrace> load_traces(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_traces: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("load_traces: empty file " + path);
  std::map<int, std::map<int, int>> by_user;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    int vals[3];
    for (int i = 0; i < 3; ++i) {
      if (!std::getline(ss, field, ','))
        throw std::runtime_error("load_traces: malformed row: " + line);
      vals[i] = std::stoi(field);
    }
    by_user[vals[0]][vals[1]] = vals[2];
  }
  std::vector<ViewTrace> out;
  for (const auto& [uid, seq] : by_user) {
    ViewTrace t;
    t.user_id = uid;
    for (const auto& [_, vp] : seq) t.viewpoints.push_back(vp);
    out.push_back(std::move(t));
  }
  return out;
}

// Empirical transition probabilities for user k: conditioned on user k's
// viewpoint at position-1, counts where the other traces move at `position`,
// restricted to the neighbourhood I_k. Transitions leaving I_k are dropped
// from both numerator and denominator.
inline UserPrediction estimate_probabilities(const std::vector<ViewTrace>& traces,
                                             const TilingGrid& grid, int user_k,
                                             std::size_t position) {
  if (position < 1)
    throw std::invalid_argument("estimate_probabilities: position must be >= 1");
  const ViewTrace* self = nullptr;
  for (const auto& t : traces)
    if (t.user_id == user_k) self = &t;
  if (self == nullptr || self->viewpoints.size() <= position - 1)
    throw std::invalid_argument("estimate_probabilities: user trace too short");
  const int anchor = self->viewpoints[position - 1];
  const std::vector<int> fov_indices = neighborhood(grid, anchor);

  std::vector<long> counts(fov_indices.size(), 0);
  long total = 0;
  for (const auto& t : traces) {
    if (t.user_id == user_k) continue;
    if (t.viewpoints.size() <= position) continue;
    if (t.viewpoints[position - 1] != anchor) continue;
    const int next = t.viewpoints[position];
    const auto it = std::lower_bound(fov_indices.begin(), fov_indices.end(), next);
    if (it == fov_indices.end() || *it != next) continue;
    ++counts[static_cast<std::size_t>(it - fov_indices.begin())];
    ++total;
  }
  if (total == 0)
    throw std::runtime_error("estimate_probabilities: no matching transitions");

  std::vector<double> p(counts.size(), 0.0);
  std::size_t residual_idx = 0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] > 0) residual_idx = i;
  double partial = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i == residual_idx) continue;
    p[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    partial += p[i];
  }
  p[residual_idx] = 1.0 - partial;  // exact unit sum in floating point

  UserPrediction up;
  up.user = user_k;
  up.fov_indices = fov_indices;
  up.prob = ProbabilityModel::perfect(std::move(p));
  return up;
}

}  // namespace vrsplit
