// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The vrsplit authors

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vrsplit/utility.hpp"

namespace vrsplit {

// Sparse affine expression sum_i coef_i * x_i + constant.
struct LinExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0;

  LinExpr() = default;
  explicit LinExpr(double c) : constant(c) {}

  LinExpr& add(int var, double coef) {
    if (coef != 0.0) terms.emplace_back(var, coef);
    return *this;
  }
  LinExpr& operator+=(const LinExpr& o) {
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    constant += o.constant;
    return *this;
  }

  static LinExpr variable(int var, double coef = 1.0) {
    LinExpr e;
    e.add(var, coef);
    return e;
  }

  double evaluate(std::span<const double> x) const {
    double v = constant;
    for (const auto& [var, coef] : terms) v += coef * x[static_cast<std::size_t>(var)];
    return v;
  }
};

enum class ConeKind { Zero, Nonneg, Soc, RotatedSoc, Exp };

// Semantics per kind, over the block's affine rows s:
//   Zero        every row == 0
//   Nonneg      every row >= 0
//   Soc         s[0] >= || s[1..] ||_2
//   RotatedSoc  2 s[0] s[1] >= sum s[2..]^2, s[0] >= 0, s[1] >= 0
//   Exp         s = (x, y, z) with y e^{x/y} <= z, y > 0
struct ConeBlock {
  ConeKind kind;
  std::vector<LinExpr> rows;
};

enum class SolveStatus {
  Optimal,
  AlmostOptimal,
  Infeasible,
  Unbounded,
  MaxIterations,
  NumericalFailure,
};

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::AlmostOptimal: return "almost_optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "?";
}

struct ConeProgram {
  int num_vars = 0;
  bool maximize = true;
  LinExpr objective;
  std::vector<ConeBlock> blocks;

  int new_var() { return num_vars++; }
  std::vector<int> new_vars(int count) {
    std::vector<int> out(static_cast<std::size_t>(count));
    for (int& v : out) v = num_vars++;
    return out;
  }

  void add_zero(LinExpr row) { blocks.push_back({ConeKind::Zero, {std::move(row)}}); }
  void add_nonneg(LinExpr row) { blocks.push_back({ConeKind::Nonneg, {std::move(row)}}); }
  void add_soc(std::vector<LinExpr> rows) {
    if (rows.size() < 2) throw std::invalid_argument("add_soc: need >= 2 rows");
    blocks.push_back({ConeKind::Soc, std::move(rows)});
  }
  void add_rsoc(std::vector<LinExpr> rows) {
    if (rows.size() < 3) throw std::invalid_argument("add_rsoc: need >= 3 rows");
    blocks.push_back({ConeKind::RotatedSoc, std::move(rows)});
  }
  void add_exp(LinExpr x, LinExpr y, LinExpr z) {
    blocks.push_back({ConeKind::Exp, {std::move(x), std::move(y), std::move(z)}});
  }

  // Worst violation of any cone membership at x (0 when feasible).
  double max_residual(std::span<const double> x) const {
    double worst = 0;
    for (const auto& blk : blocks) {
      switch (blk.kind) {
        case ConeKind::Zero:
          for (const auto& row : blk.rows)
            worst = std::max(worst, std::abs(row.evaluate(x)));
          break;
        case ConeKind::Nonneg:
          for (const auto& row : blk.rows)
            worst = std::max(worst, -row.evaluate(x));
          break;
        case ConeKind::Soc: {
          double norm2 = 0;
          for (std::size_t i = 1; i < blk.rows.size(); ++i) {
            const double v = blk.rows[i].evaluate(x);
            norm2 += v * v;
          }
          worst = std::max(worst, std::sqrt(norm2) - blk.rows[0].evaluate(x));
          break;
        }
        case ConeKind::RotatedSoc: {
          const double p = blk.rows[0].evaluate(x);
          const double q = blk.rows[1].evaluate(x);
          double norm2 = 0;
          for (std::size_t i = 2; i < blk.rows.size(); ++i) {
            const double v = blk.rows[i].evaluate(x);
            norm2 += v * v;
          }
          worst = std::max({worst, -p, -q, norm2 - 2.0 * p * q});
          break;
        }
        case ConeKind::Exp: {
          const double ex = blk.rows[0].evaluate(x);
          const double ey = blk.rows[1].evaluate(x);
          const double ez = blk.rows[2].evaluate(x);
          if (ey <= 0) {
            worst = std::max(worst, -ey + 1e-300);
          } else {
            worst = std::max(worst, ey * std::exp(ex / ey) - ez);
          }
          break;
        }
      }
    }
    return worst;
  }

  // Plain-text dump of the program (variables, objective, one block per
  // stanza) for external cross-checking.
  void write_text(std::ostream& out) const {
    out.precision(17);
    out << "vrsplit-coneprogram v1\n";
    out << "vars " << num_vars << "\n";
    out << "sense " << (maximize ? "max" : "min") << "\n";
    auto put_expr = [&](const LinExpr& e) {
      out << e.constant;
      for (const auto& [var, coef] : e.terms) out << " " << var << ":" << coef;
      out << "\n";
    };
    out << "objective ";
    put_expr(objective);
    for (const auto& blk : blocks) {
      switch (blk.kind) {
        case ConeKind::Zero: out << "zero"; break;
        case ConeKind::Nonneg: out << "nonneg"; break;
        case ConeKind::Soc: out << "soc"; break;
        case ConeKind::RotatedSoc: out << "rsoc"; break;
        case ConeKind::Exp: out << "exp"; break;
      }
      out << " " << blk.rows.size() << "\n";
      for (const auto& row : blk.rows) {
        out << "  ";
        put_expr(row);
      }
    }
  }
};

// --- lowering helpers -------------------------------------------------------

// 2^(e/B) <= u as an exponential-cone membership (exact reformulation).
inline void lower_exponential(ConeProgram& prog, int e_var, int u_var,
                              double bandwidth_hz, double e_scale = 1.0) {
  if (bandwidth_hz <= 0) throw std::invalid_argument("lower_exponential: B <= 0");
  LinExpr x = LinExpr::variable(e_var, e_scale * std::numbers::ln2 / bandwidth_hz);
  prog.add_exp(std::move(x), LinExpr(1.0), LinExpr::variable(u_var));
}

// t <= scale * ln(gain * r / top_rate) as exp(t/scale) <= gain * r / top_rate.
// Both t and r may be affine expressions (r in bits/s).
inline void lower_log_utility(ConeProgram& prog, LinExpr t, LinExpr r_bits,
                              const UtilityFunction& u) {
  LinExpr x = std::move(t);
  for (auto& term : x.terms) term.second /= u.scale;
  x.constant /= u.scale;
  LinExpr z = std::move(r_bits);
  for (auto& term : z.terms) term.second *= u.gain / u.top_rate;
  z.constant *= u.gain / u.top_rate;
  prog.add_exp(std::move(x), LinExpr(1.0), std::move(z));
}

// sum_i products[i]^2 + sigma2 <= bound, encoded with a rotated second-order
// cone 2 * [balance * (bound - sigma2)] * [1 / (2 * balance)] >= sum
// products^2. Scaling the two scalar rows reciprocally leaves the cone
// unchanged; a caller whose bound has naturally small coefficients (the CCCP
// majorant at high SINR) passes balance > 1 to keep the cone data near unit
// scale.
inline void lower_quad_over_linear(ConeProgram& prog,
                                   std::vector<LinExpr> products,
                                   LinExpr bound, double sigma2,
                                   double balance = 1.0) {
  if (balance <= 0) throw std::invalid_argument("lower_quad_over_linear: balance <= 0");
  bound.constant -= sigma2;
  if (products.empty()) {
    prog.add_nonneg(std::move(bound));
    return;
  }
  for (auto& term : bound.terms) term.second *= balance;
  bound.constant *= balance;
  std::vector<LinExpr> rows;
  rows.reserve(products.size() + 2);
  rows.push_back(std::move(bound));
  rows.push_back(LinExpr(0.5 / balance));
  for (auto& p : products) rows.push_back(std::move(p));
  prog.add_rsoc(std::move(rows));
}

// Real and imaginary parts of h^H w as affine expressions over the stacked
// real variable block [Re w; Im w] starting at w_base.
inline std::pair<LinExpr, LinExpr> complex_inner_rows(const Eigen::VectorXcd& h,
                                                      int w_base) {
  const int m = static_cast<int>(h.size());
  LinExpr re, im;
  for (int j = 0; j < m; ++j) {
    const double hr = h[j].real();
    const double hi = h[j].imag();
    re.add(w_base + j, hr);
    re.add(w_base + m + j, hi);
    im.add(w_base + j, -hi);
    im.add(w_base + m + j, hr);
  }
  return {std::move(re), std::move(im)};
}

// --- solver adapter ---------------------------------------------------------

struct SolveOptions {
  double tol_feas = 1e-8;
  double tol_gap_abs = 1e-8;
  double tol_gap_rel = 1e-8;
  int max_iter = 200;
  bool verbose = false;
};

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::vector<double> x;
  double objective = 0;  // in the program's sense (maximize or minimize)
  int iterations = 0;
  double max_residual = 0;

  bool usable() const {
    return status == SolveStatus::Optimal || status == SolveStatus::AlmostOptimal;
  }
};

class SolverAdapter {
 public:
  virtual ~SolverAdapter() = default;
  virtual SolveResult solve(const ConeProgram& prog, const SolveOptions& opts) = 0;
};

extern "C" int clarabel_ffi_solve(
    std::int64_t n, const double* q, std::int64_t m, const std::int64_t* colptr,
    const std::int64_t* rowind, const double* vals, const double* b,
    std::int64_t ncones, const std::int64_t* cone_tags, const std::int64_t* cone_dims,
    std::int64_t max_iter, double tol_gap_abs, double tol_gap_rel, double tol_feas,
    int verbose, double* x_out, double* obj_out, std::int64_t* iters_out);

// Interior-point backend. Assembles the IR into Clarabel's A x + s = b,
// s in K form; rotated cones are mapped onto plain second-order cones.
class ClarabelSolver final : public SolverAdapter {
 public:
  SolveResult solve(const ConeProgram& prog, const SolveOptions& opts) override {
    std::vector<double> q(static_cast<std::size_t>(prog.num_vars), 0.0);
    const double sense = prog.maximize ? -1.0 : 1.0;
    for (const auto& [var, coef] : prog.objective.terms)
      q[static_cast<std::size_t>(var)] += sense * coef;

    // Triplets of A and entries of b, cone blocks in row order.
    std::vector<std::int64_t> tags, dims;
    std::vector<double> b;
    struct Triplet { std::int64_t row, col; double val; };
    std::vector<Triplet> trip;
    std::int64_t row = 0;

    auto push_row = [&](const LinExpr& e, double flip) {
      // s_row = flip * e  =>  A[row, :] = -flip * coefs, b[row] = flip * const
      for (const auto& [var, coef] : e.terms)
        trip.push_back({row, var, -flip * coef});
      b.push_back(flip * e.constant);
      ++row;
    };

    for (const auto& blk : prog.blocks) {
      switch (blk.kind) {
        case ConeKind::Zero:
          tags.push_back(0);
          dims.push_back(static_cast<std::int64_t>(blk.rows.size()));
          for (const auto& r : blk.rows) push_row(r, 1.0);
          break;
        case ConeKind::Nonneg:
          tags.push_back(1);
          dims.push_back(static_cast<std::int64_t>(blk.rows.size()));
          for (const auto& r : blk.rows) push_row(r, 1.0);
          break;
        case ConeKind::Soc:
          tags.push_back(2);
          dims.push_back(static_cast<std::int64_t>(blk.rows.size()));
          for (const auto& r : blk.rows) push_row(r, 1.0);
          break;
        case ConeKind::RotatedSoc: {
          // (p, q, x) with 2pq >= ||x||^2  ->  soc(p + q, p - q, sqrt(2) x)
          tags.push_back(2);
          dims.push_back(static_cast<std::int64_t>(blk.rows.size()));
          LinExpr sum = blk.rows[0];
          sum += blk.rows[1];
          LinExpr diff = blk.rows[0];
          for (const auto& [var, coef] : blk.rows[1].terms) diff.add(var, -coef);
          diff.constant -= blk.rows[1].constant;
          push_row(sum, 1.0);
          push_row(diff, 1.0);
          for (std::size_t i = 2; i < blk.rows.size(); ++i)
            push_row(blk.rows[i], std::numbers::sqrt2);
          break;
        }
        case ConeKind::Exp:
          tags.push_back(3);
          dims.push_back(3);
          for (const auto& r : blk.rows) push_row(r, 1.0);
          break;
      }
    }

    // Triplets to CSC.
    const std::int64_t m = row;
    const std::int64_t n = prog.num_vars;
    std::stable_sort(trip.begin(), trip.end(), [](const Triplet& a, const Triplet& c) {
      return a.col != c.col ? a.col < c.col : a.row < c.row;
    });
    std::vector<std::int64_t> colptr(static_cast<std::size_t>(n) + 1, 0);
    std::vector<std::int64_t> rowind;
    std::vector<double> vals;
    rowind.reserve(trip.size());
    vals.reserve(trip.size());
    for (std::size_t i = 0; i < trip.size(); ++i) {
      // merge duplicates within a column
      if (!rowind.empty() && i > 0 && trip[i].col == trip[i - 1].col &&
          trip[i].row == trip[i - 1].row) {
        vals.back() += trip[i].val;
        continue;
      }
      ++colptr[static_cast<std::size_t>(trip[i].col) + 1];
      rowind.push_back(trip[i].row);
      vals.push_back(trip[i].val);
    }
    for (std::size_t c = 0; c < static_cast<std::size_t>(n); ++c)
      colptr[c + 1] += colptr[c];

    SolveResult res;
    res.x.assign(static_cast<std::size_t>(n), 0.0);
    double obj = 0;
    std::int64_t iters = 0;
    const int st = clarabel_ffi_solve(
        n, q.data(), m, colptr.data(), rowind.data(), vals.data(), b.data(),
        static_cast<std::int64_t>(tags.size()), tags.data(), dims.data(),
        opts.max_iter, opts.tol_gap_abs, opts.tol_gap_rel, opts.tol_feas,
        opts.verbose ? 1 : 0, res.x.data(), &obj, &iters);
    res.iterations = static_cast<int>(iters);
    res.objective = sense * obj;
    switch (st) {
      case 0: res.status = SolveStatus::Optimal; break;
      case 1: res.status = SolveStatus::AlmostOptimal; break;
      case 2: res.status = SolveStatus::Infeasible; break;
      case 3: res.status = SolveStatus::Unbounded; break;
      case 6: res.status = SolveStatus::MaxIterations; break;
      default: res.status = SolveStatus::NumericalFailure; break;
    }
    res.max_residual = prog.max_residual(res.x);
    if ((res.status == SolveStatus::NumericalFailure ||
         res.status == SolveStatus::MaxIterations) &&
        res.max_residual <= 1e-7 * std::max(1.0, std::abs(res.objective))) {
      // The backend gave up (typically at a degenerate corner) but its last
      // iterate verifiably satisfies every cone; keep it as a reduced
      // accuracy solution.
      res.status = SolveStatus::AlmostOptimal;
    }
    return res;
  }
};

}  // namespace vrsplit
