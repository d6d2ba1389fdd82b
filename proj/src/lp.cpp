#include "fgl/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fgl {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-10;

struct Tableau {
  int m, cols;  // cols excludes the rhs column
  std::vector<std::vector<double>> t;  // m+1 rows, cols+1 entries; last row = objective
  std::vector<int> basis;

  double& at(int r, int c) { return t[r][c]; }

  void pivot(int pr, int pc) {
    const double pv = t[pr][pc];
    for (int c = 0; c <= cols; ++c) t[pr][c] /= pv;
    for (int r = 0; r <= m; ++r) {
      if (r == pr) continue;
      const double f = t[r][pc];
      if (f == 0.0) continue;
      for (int c = 0; c <= cols; ++c) t[r][c] -= f * t[pr][c];
    }
    basis[pr] = pc;
  }

  // Returns false when unbounded; `allowed` masks eligible entering columns.
  // Phase 1 passes its target so the loop can stop once the artificial mass
  // is negligible instead of chasing noise-level reduced costs.
  bool run(const std::vector<char>& allowed, bool bland_from_start,
           bool stop_near_zero = false) {
    long iterations = 0;
    const long bland_after =
        bland_from_start ? 0 : 2000L + 20L * (m + cols);
    const long hard_cap = 200000L + 400L * (m + cols);
    std::vector<char> usable = allowed;
    while (true) {
      if (stop_near_zero && -t[m][cols] <= 1e-10) return true;
      if (++iterations > hard_cap) throw std::runtime_error("simplex stalled");
      const bool bland = iterations > bland_after;
      int pc = -1;
      double best = -kCostTol;
      for (int c = 0; c < cols; ++c) {
        if (!usable[c]) continue;
        const double rc = t[m][c];
        if (bland) {
          if (rc < -kCostTol) {
            pc = c;
            break;
          }
        } else if (rc < best) {
          best = rc;
          pc = c;
        }
      }
      if (pc < 0) return true;  // optimal
      int pr = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int r = 0; r < m; ++r) {
        const double a = t[r][pc];
        if (a <= kPivotTol) continue;
        const double ratio = t[r][cols] / a;
        if (ratio < best_ratio - 1e-12) {
          best_ratio = ratio;
          pr = r;
        } else if (ratio <= best_ratio + 1e-12 && pr >= 0 &&
                   basis[r] < basis[pr]) {
          pr = r;  // Bland-style tie break, keep the smaller ratio bound
        }
      }
      if (pr < 0) {
        // Columns whose entries have all collapsed numerically cannot be
        // pivoted on; retire them instead of reporting unbounded.
        double col_abs = 0.0;
        for (int r = 0; r < m; ++r) col_abs = std::max(col_abs, std::abs(t[r][pc]));
        if (col_abs <= 1e-7) {
          usable[pc] = 0;
          continue;
        }
        return false;  // unbounded
      }
      pivot(pr, pc);
    }
  }
};

}  // namespace

namespace {

LpSolution solve_lp_once(const LpProblem& problem, bool bland_from_start) {
  const int n = problem.num_vars;
  const int m = static_cast<int>(problem.rows.size());
  int num_slacks = 0;
  for (const auto& row : problem.rows)
    if (!row.equality) ++num_slacks;
  const int cols = n + num_slacks + m;  // variables, slacks, artificials

  Tableau tab;
  tab.m = m;
  tab.cols = cols;
  tab.t.assign(m + 1, std::vector<double>(cols + 1, 0.0));
  tab.basis.assign(m, -1);

  int slack_at = n;
  for (int r = 0; r < m; ++r) {
    const auto& row = problem.rows[r];
    double sign = row.rhs < 0.0 ? -1.0 : 1.0;
    for (int c = 0; c < n && c < static_cast<int>(row.coeff.size()); ++c)
      tab.t[r][c] = sign * row.coeff[c];
    tab.t[r][cols] = sign * row.rhs;
    if (!row.equality) tab.t[r][slack_at++] = sign;
    tab.t[r][n + num_slacks + r] = 1.0;
    tab.basis[r] = n + num_slacks + r;
  }

  // Phase 1: minimize the sum of artificials.
  for (int c = 0; c <= cols; ++c) {
    double s = 0.0;
    for (int r = 0; r < m; ++r) s += tab.t[r][c];
    tab.t[m][c] = (c >= n + num_slacks && c < cols) ? 0.0 : -s;
  }
  // Artificials start basic and must not re-enter.
  std::vector<char> allowed(cols, 1);
  for (int c = n + num_slacks; c < cols; ++c) allowed[c] = 0;
  if (!tab.run(allowed, bland_from_start, true))
    throw std::runtime_error("phase 1 unbounded");

  LpSolution sol;
  if (tab.t[m][cols] < -1e-7) {
    sol.status = LpSolution::Status::kInfeasible;
    return sol;
  }
  // Drive leftover artificials out of the basis where possible.
  for (int r = 0; r < m; ++r) {
    if (tab.basis[r] < n + num_slacks) continue;
    int pc = -1;
    for (int c = 0; c < n + num_slacks; ++c)
      if (std::abs(tab.t[r][c]) > kPivotTol) {
        pc = c;
        break;
      }
    if (pc >= 0) tab.pivot(r, pc);
  }

  // Phase 2 objective.
  for (int c = 0; c <= cols; ++c) tab.t[m][c] = 0.0;
  for (int c = 0; c < n; ++c) tab.t[m][c] = problem.objective[c];
  for (int r = 0; r < m; ++r) {
    const int b = tab.basis[r];
    const double cb = (b < n) ? problem.objective[b] : 0.0;
    if (cb == 0.0) continue;
    for (int c = 0; c <= cols; ++c) tab.t[m][c] -= cb * tab.t[r][c];
  }
  if (!tab.run(allowed, bland_from_start)) {
    sol.status = LpSolution::Status::kUnbounded;
    return sol;
  }

  sol.status = LpSolution::Status::kOptimal;
  sol.x.assign(n, 0.0);
  for (int r = 0; r < m; ++r)
    if (tab.basis[r] < n) sol.x[tab.basis[r]] = tab.t[r][cols];
  sol.value = 0.0;
  for (int c = 0; c < n; ++c) sol.value += problem.objective[c] * sol.x[c];
  return sol;
}

}  // namespace

LpSolution solve_lp(const LpProblem& problem) {
  const LpSolution fast = solve_lp_once(problem, false);
  if (fast.status != LpSolution::Status::kInfeasible) return fast;
  // Dantzig pricing can wedge phase 1 on degenerate bases; retry with
  // Bland's rule before reporting infeasibility.
  return solve_lp_once(problem, true);
}

}  // namespace fgl
