#pragma once

#include <vector>

namespace fgl {

// Small dense LP: minimize c.x subject to row constraints and x >= 0.
struct LpProblem {
  int num_vars = 0;
  std::vector<double> objective;
  struct Row {
    std::vector<double> coeff;
    double rhs = 0.0;
    bool equality = false;  // false means coeff.x <= rhs
  };
  std::vector<Row> rows;
};

struct LpSolution {
  enum class Status { kOptimal, kInfeasible, kUnbounded, kStalled };
  Status status = Status::kStalled;
  double value = 0.0;
  std::vector<double> x;
};

// Two-phase dense tableau simplex with a Bland fallback.
LpSolution solve_lp(const LpProblem& problem);

}  // namespace fgl
