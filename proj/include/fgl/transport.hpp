#pragma once

#include <vector>

#include "fgl/simplex.hpp"

namespace fgl {

struct AssignmentResult {
  double cost = 0.0;
  std::vector<int> row_of_col;  // column j is served by row row_of_col[j]
};

// Exact min-cost perfect matching on a dense square cost matrix
// (shortest augmenting paths with potentials, O(N^3)).
AssignmentResult solve_assignment(const std::vector<std::vector<double>>& cost);

// Exact optimal transport between weighted atom sets (transportation
// simplex).  Supplies and demands must have equal totals.
double solve_transport(const std::vector<double>& supply,
                       const std::vector<double>& demand,
                       const std::vector<std::vector<double>>& cost);

// L1-Wasserstein distance between empirical laws on the simplex with ground
// metric total variation.  Equal sizes use assignment, unequal sizes the
// transport LP.
double wasserstein_d1(const Population& p, const Population& q,
                      std::size_t size_cap = 2000);

}  // namespace fgl
