#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fgl/factor_graph.hpp"
#include "fgl/simplex.hpp"
#include "fgl/tree.hpp"
#include "fgl/transport.hpp"

namespace fgl {

struct DiagnosticResult {
  double statistic = 0.0;
  double std_error = 0.0;
  long samples = 0;
  std::vector<double> per_sample;  // per tuple / boundary draw / seed
};

// Mean TV distance between exact joint marginals on random distinct
// coordinate k-tuples and the product of the single-coordinate marginals.
DiagnosticResult factorization_statistic(const FactorGraph& g, int k, int tuples,
                                         std::uint64_t seed,
                                         std::uint64_t cap = std::uint64_t{1} << 24);

// Mean TV distance between the root marginal and the root marginal
// conditioned on a Gibbs-sampled boundary beyond distance 2*ell.
DiagnosticResult nonreconstruction_statistic(const FactorGraph& g, int root,
                                             int ell, long samples,
                                             std::uint64_t seed,
                                             std::uint64_t cap = std::uint64_t{1}
                                                                 << 24);

// Cyclic neighborhoods are pooled under this census key.
inline const std::string kCyclicClass = "CYCLIC";

std::map<CanonicalCode, double> local_census(const FactorGraph& g, int ell);

// d_TV between the seed-averaged graph census and a Monte Carlo estimate of
// the limit tree law.
DiagnosticResult census_distance(const ModelSpec& spec, int n, int ell,
                                 int graph_seeds, long tree_samples,
                                 std::uint64_t seed);

// Wasserstein distance between the empirical law of exact marginals over
// variables whose depth-ell neighborhood has the given code and a reference
// population.  An empty class contributes a single uniform atom.
DiagnosticResult bp_empirical_distance(const FactorGraph& g,
                                       const CanonicalCode& tree_code, int ell,
                                       const Population& reference,
                                       std::uint64_t cap = std::uint64_t{1} << 24);

// (1/n) sum_x sum_w | mu_x(w) - cavity formula from G - x |.
DiagnosticResult cavity_consistency(const FactorGraph& g,
                                    std::uint64_t cap = std::uint64_t{1} << 24);

}  // namespace fgl
