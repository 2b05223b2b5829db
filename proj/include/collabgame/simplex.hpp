#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace collabgame {

/// Dense dictionary-form simplex for feasibility of { A x <= b, x >= 0 }.
///
/// Slack variables stay implicit: the tableau stores one column per nonbasic variable, so its
/// size is rows x (cols + 2) regardless of how many slacks exist. Pivot selection uses Bland's
/// rule (smallest-index entering variable, smallest-index leaving variable among ratio ties),
/// which rules out cycling on degenerate problems.
class FeasibilitySimplex {
 public:
  using Matrix = std::vector<std::vector<double>>;

  FeasibilitySimplex(const Matrix& a, const std::vector<double>& b, double feasibility_tol = 1e-9)
      : rows_(static_cast<int>(b.size())),
        cols_(a.empty() ? 0 : static_cast<int>(a.front().size())),
        tol_(feasibility_tol) {
    // Columns: 0..cols-1 structural, cols = auxiliary x0, cols+1 = right-hand side.
    const int width = cols_ + 2;
    table_.assign(static_cast<std::size_t>(rows_) + 1, std::vector<double>(width, 0.0));
    basic_.resize(rows_);
    nonbasic_.resize(cols_ + 1);
    for (int r = 0; r < rows_; ++r) {
      for (int j = 0; j < cols_; ++j) table_[r][j] = a[r][j];
      table_[r][cols_] = -1.0;
      table_[r][cols_ + 1] = b[r];
      basic_[r] = cols_ + 1 + r;  // slack ids follow the auxiliary id
    }
    for (int j = 0; j <= cols_; ++j) nonbasic_[j] = j;
    // Phase-one objective: maximize -x0.
    table_[rows_][cols_] = 1.0;
  }

  /// A feasible point, or nullopt if the system has none.
  std::optional<std::vector<double>> solve() {
    int worst = -1;
    for (int r = 0; r < rows_; ++r) {
      if (worst < 0 || rhs(r) < rhs(worst)) worst = r;
    }
    if (worst >= 0 && rhs(worst) < 0.0) {
      pivot(worst, cols_);
      run();
      if (table_[rows_][cols_ + 1] < -tol_) return std::nullopt;
    }
    std::vector<double> x(static_cast<std::size_t>(cols_), 0.0);
    for (int r = 0; r < rows_; ++r) {
      if (basic_[r] < cols_) x[basic_[r]] = std::max(0.0, rhs(r));
    }
    return x;
  }

  int pivots() const { return pivots_; }

 private:
  static constexpr double kPivotEps = 1e-12;

  double rhs(int r) const { return table_[r][cols_ + 1]; }

  void run() {
    const int obj = rows_;
    while (true) {
      int enter = -1;
      for (int j = 0; j <= cols_; ++j) {
        if (table_[obj][j] < -kPivotEps && (enter < 0 || nonbasic_[j] < nonbasic_[enter])) enter = j;
      }
      if (enter < 0) return;
      int leave = -1;
      double best = 0.0;
      for (int r = 0; r < rows_; ++r) {
        const double coef = table_[r][enter];
        if (coef <= kPivotEps) continue;
        const double ratio = rhs(r) / coef;
        if (leave < 0 || ratio < best - kPivotEps ||
            (std::abs(ratio - best) <= kPivotEps && basic_[r] < basic_[leave])) {
          leave = r;
          best = ratio;
        }
      }
      // Phase one is bounded below by zero, so a leaving row always exists.
      if (leave < 0) return;
      pivot(leave, enter);
    }
  }

  void pivot(int r, int s) {
    ++pivots_;
    const int width = cols_ + 2;
    const double inv = 1.0 / table_[r][s];
    for (int i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      const double factor = table_[i][s] * inv;
      if (factor == 0.0) continue;
      for (int j = 0; j < width; ++j) {
        if (j != s) table_[i][j] -= table_[r][j] * factor;
      }
      table_[i][s] = -factor;
    }
    for (int j = 0; j < width; ++j) {
      if (j != s) table_[r][j] *= inv;
    }
    table_[r][s] = inv;
    std::swap(basic_[r], nonbasic_[s]);
  }

  int rows_;
  int cols_;
  double tol_;
  Matrix table_;
  std::vector<int> basic_;
  std::vector<int> nonbasic_;
  int pivots_ = 0;
};

}  // namespace collabgame
