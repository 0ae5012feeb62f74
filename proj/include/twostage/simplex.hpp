#pragma once

// Dense-tableau two-phase primal simplex shared by the exact (Rational) and
// floating-point (double) LP backends. The exact backend uses Bland's rule
// throughout. The double backend prices by largest reduced cost with a
// Harris ratio test, falls back to Bland's rule on long degenerate runs, and
// periodically rebuilds the tableau from the original rows.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "twostage/numeric.hpp"

namespace twostage {

enum class Sense { LessEqual, GreaterEqual, Equal };
enum class LpStatus { Optimal, Infeasible, Unbounded };

template <class T>
struct LinearProgram {
  struct Row {
    std::vector<std::pair<std::size_t, T>> coefficients;
    Sense sense = Sense::LessEqual;
    T rhs{};
  };

  std::size_t num_vars = 0;
  std::vector<T> objective;  // maximised; all variables are non-negative
  std::vector<Row> rows;

  std::size_t add_variable(T cost) {
    objective.push_back(std::move(cost));
    return num_vars++;
  }
  void add_row(std::vector<std::pair<std::size_t, T>> coefficients, Sense sense, T rhs) {
    rows.push_back(Row{std::move(coefficients), sense, std::move(rhs)});
  }
};

template <class T>
struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<T> x;
  T objective{};
  /// One multiplier per row; at optimality sum(duals * rhs) == objective.
  std::vector<T> duals;
  std::size_t pivots = 0;
};

template <class T>
struct SimplexTolerance;

template <>
struct SimplexTolerance<double> {
  static constexpr bool exact = false;
  static constexpr double eps = 1e-9;
  static bool positive(double v) { return v > eps; }
  static bool negative(double v) { return v < -eps; }
  static bool zero(double v) { return v <= eps && v >= -eps; }
};

template <>
struct SimplexTolerance<Rational> {
  static constexpr bool exact = true;
  static bool positive(const Rational& v) { return v > 0; }
  static bool negative(const Rational& v) { return v < 0; }
  static bool zero(const Rational& v) { return v == 0; }
};

namespace detail {

template <class T>
class Tableau {
 public:
  using Tol = SimplexTolerance<T>;

  Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}

  T& at(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
  const T& at(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }

  void pivot(std::size_t pr, std::size_t pc, std::vector<T>& obj, T& obj_value) {
    const T inv = T(1) / at(pr, pc);
    for (std::size_t c = 0; c < cols_; ++c) at(pr, c) *= inv;
    rhs_[pr] *= inv;
    at(pr, pc) = T(1);
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == pr) continue;
      const T factor = at(r, pc);
      if (Tol::zero(factor)) {
        at(r, pc) = T(0);
        continue;
      }
      for (std::size_t c = 0; c < cols_; ++c) {
        if (!Tol::zero(at(pr, c))) at(r, c) -= factor * at(pr, c);
      }
      at(r, pc) = T(0);
      rhs_[r] -= factor * rhs_[pr];
      if constexpr (!Tol::exact) {
        if (rhs_[r] < 0.0 && rhs_[r] > -Tol::eps) rhs_[r] = 0.0;
      }
    }
    const T factor = obj[pc];
    if (!Tol::zero(factor)) {
      for (std::size_t c = 0; c < cols_; ++c) {
        if (!Tol::zero(at(pr, c))) obj[c] -= factor * at(pr, c);
      }
      obj_value += factor * rhs_[pr];
    }
    obj[pc] = T(0);
    basis_[pr] = pc;
  }

  std::size_t rows_, cols_;
  std::vector<T> a_;
  std::vector<T> rhs_;
  std::vector<std::size_t> basis_;
};

/// Recomputes B^{-1}[A | b] and the reduced costs of `cost` from the
/// original tableau for the current basis. Returns false when the basis
/// matrix is numerically singular, leaving `t` untouched.
bool refresh_tableau(Tableau<double>& t, const Tableau<double>& original, const std::vector<double>& cost,
                     std::vector<double>& obj, double& obj_value);

inline constexpr std::size_t kBlandAfter = 50;

template <class T>
std::size_t bland_leaving(const Tableau<T>& t, std::size_t enter) {
  using Tol = SimplexTolerance<T>;
  std::size_t leave = t.rows_;
  T best_ratio{};
  for (std::size_t r = 0; r < t.rows_; ++r) {
    if (!Tol::positive(t.at(r, enter))) continue;
    T ratio = t.rhs_[r] / t.at(r, enter);
    bool take = leave == t.rows_;
    if (!take) {
      const T diff = ratio - best_ratio;
      take = Tol::negative(diff) || (Tol::zero(diff) && t.basis_[r] < t.basis_[leave]);
    }
    if (take) {
      leave = r;
      best_ratio = ratio;
    }
  }
  return leave;
}

// Two-pass Harris test: the largest pivot among rows whose ratio is within
// the feasibility tolerance of the minimum.
inline std::size_t harris_leaving(const Tableau<double>& t, std::size_t enter) {
  using Tol = SimplexTolerance<double>;
  double bound = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < t.rows_; ++r) {
    const double a = t.at(r, enter);
    if (a > Tol::eps) bound = std::min(bound, (std::max(t.rhs_[r], 0.0) + Tol::eps) / a);
  }
  std::size_t leave = t.rows_;
  for (std::size_t r = 0; r < t.rows_; ++r) {
    const double a = t.at(r, enter);
    if (a <= Tol::eps || std::max(t.rhs_[r], 0.0) / a > bound) continue;
    if (leave == t.rows_ || a > t.at(leave, enter) ||
        (a == t.at(leave, enter) && t.basis_[r] < t.basis_[leave])) {
      leave = r;
    }
  }
  return leave;
}

// Maximises over the columns flagged in `allowed`; `obj` holds the reduced
// costs of `cost`. Returns false when unbounded.
template <class T>
bool run_simplex(Tableau<T>& t, const Tableau<T>& original, const std::vector<T>& cost, std::vector<T>& obj,
                 T& obj_value, const std::vector<bool>& allowed, std::size_t& pivots) {
  using Tol = SimplexTolerance<T>;
  const std::size_t refresh_every = std::max<std::size_t>(64, t.rows_);
  const std::size_t limit = 200 * (t.rows_ + t.cols_) + 10000;
  std::size_t degenerate_run = 0, since_refresh = 0;
  for (std::size_t iter = 0;; ++iter) {
    if (iter > limit) throw std::runtime_error("simplex: iteration limit reached");
    const bool bland = Tol::exact || degenerate_run >= kBlandAfter;
    std::size_t enter = t.cols_;
    for (std::size_t c = 0; c < t.cols_; ++c) {
      if (!allowed[c] || !Tol::positive(obj[c])) continue;
      if (bland) {
        enter = c;
        break;
      }
      if (enter == t.cols_ || obj[c] > obj[enter]) enter = c;
    }
    std::size_t leave = t.rows_;
    if (enter != t.cols_) {
      if constexpr (Tol::exact) {
        leave = bland_leaving(t, enter);
      } else {
        leave = bland ? bland_leaving(t, enter) : harris_leaving(t, enter);
      }
    }
    if (enter == t.cols_ || leave == t.rows_) {
      if constexpr (!Tol::exact) {
        // Confirm the verdict on a freshly rebuilt tableau.
        if (since_refresh > 0 && refresh_tableau(t, original, cost, obj, obj_value)) {
          since_refresh = 0;
          continue;
        }
      }
      return enter == t.cols_;
    }
    const bool degenerate = Tol::zero(t.rhs_[leave]);
    degenerate_run = degenerate ? degenerate_run + 1 : 0;
    t.pivot(leave, enter, obj, obj_value);
    ++pivots;
    ++since_refresh;
    if constexpr (!Tol::exact) {
      if (since_refresh >= refresh_every && refresh_tableau(t, original, cost, obj, obj_value)) since_refresh = 0;
    }
  }
}

}  // namespace detail

/// Solves max c^T x subject to the rows of `lp` and x >= 0.
template <class T>
LpResult<T> solve_simplex(const LinearProgram<T>& lp) {
  using Tol = SimplexTolerance<T>;
  const std::size_t m = lp.rows.size();
  const std::size_t n = lp.num_vars;

  // Column layout: [structural | slack/surplus per inequality row | artificial per row].
  std::vector<std::size_t> slack_col(m, SIZE_MAX);
  std::size_t next = n;
  for (std::size_t r = 0; r < m; ++r) {
    if (lp.rows[r].sense != Sense::Equal) slack_col[r] = next++;
  }
  const std::size_t first_artificial = next;
  const std::size_t cols = next + m;

  detail::Tableau<T> t(m, cols);
  t.rhs_.assign(m, T(0));
  t.basis_.assign(m, 0);
  std::vector<int> flip(m, 1);
  for (std::size_t r = 0; r < m; ++r) {
    const auto& row = lp.rows[r];
    const bool negate = Tol::negative(row.rhs);
    flip[r] = negate ? -1 : 1;
    for (const auto& [col, v] : row.coefficients) {
      if (col >= n) throw std::out_of_range("LP row references an unknown variable");
      t.at(r, col) += negate ? T(-v) : v;
    }
    t.rhs_[r] = negate ? T(-row.rhs) : row.rhs;
    if (slack_col[r] != SIZE_MAX) {
      const T s = row.sense == Sense::LessEqual ? T(1) : T(-1);
      t.at(r, slack_col[r]) = negate ? T(-s) : s;
    }
    t.at(r, first_artificial + r) = T(1);
    t.basis_[r] = first_artificial + r;
  }
  const detail::Tableau<T> original = t;

  LpResult<T> result;
  std::vector<bool> allowed(cols, true);

  // Phase 1: maximise -sum(artificials).
  std::vector<T> cost(cols, T(0));
  for (std::size_t c = first_artificial; c < cols; ++c) cost[c] = T(-1);
  std::vector<T> obj(cols, T(0));
  T obj_value(0);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < first_artificial; ++c) obj[c] += t.at(r, c);
    obj_value -= t.rhs_[r];
  }
  for (std::size_t c = first_artificial; c < cols; ++c) allowed[c] = false;
  detail::run_simplex(t, original, cost, obj, obj_value, allowed, result.pivots);
  if (Tol::negative(obj_value)) {
    result.status = LpStatus::Infeasible;
    return result;
  }
  // Drive zero-valued artificials out of the basis where possible, pivoting
  // on the largest available entry.
  for (std::size_t r = 0; r < m; ++r) {
    if (t.basis_[r] < first_artificial) continue;
    std::size_t best = first_artificial;
    T best_abs(0);
    for (std::size_t c = 0; c < first_artificial; ++c) {
      const T v = t.at(r, c) < T(0) ? T(-t.at(r, c)) : t.at(r, c);
      if (Tol::positive(v) && v > best_abs) {
        best = c;
        best_abs = v;
        if constexpr (Tol::exact) break;
      }
    }
    if (best != first_artificial) {
      t.pivot(r, best, obj, obj_value);
      ++result.pivots;
    }
  }

  // Phase 2: reduced costs c_j - c_B B^{-1} A_j.
  cost.assign(cols, T(0));
  for (std::size_t c = 0; c < n; ++c) cost[c] = lp.objective[c];
  obj = cost;
  obj_value = T(0);
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t b = t.basis_[r];
    if (Tol::zero(cost[b])) continue;
    const T cb = cost[b];
    for (std::size_t c = 0; c < cols; ++c) {
      if (!Tol::zero(t.at(r, c))) obj[c] -= cb * t.at(r, c);
    }
    obj_value += cb * t.rhs_[r];
  }
  if (!detail::run_simplex(t, original, cost, obj, obj_value, allowed, result.pivots)) {
    result.status = LpStatus::Unbounded;
    return result;
  }

  result.status = LpStatus::Optimal;
  result.x.assign(n, T(0));
  for (std::size_t r = 0; r < m; ++r) {
    if (t.basis_[r] < n) result.x[t.basis_[r]] = t.rhs_[r];
  }
  result.objective = obj_value;
  result.duals.assign(m, T(0));
  for (std::size_t r = 0; r < m; ++r) {
    // The artificial column of row r started as e_r, so its reduced cost is -pi_r.
    const T pi = T(-obj[first_artificial + r]);
    result.duals[r] = flip[r] < 0 ? T(-pi) : pi;
  }
  return result;
}

}  // namespace twostage
