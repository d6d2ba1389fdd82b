#pragma once

#include <cstdint>
#include <vector>

#include "fgl/factor_graph.hpp"
#include "fgl/simplex.hpp"
#include "fgl/tree.hpp"

namespace fgl {

// One message per (constraint, slot) in each direction.
struct MessageSet {
  // to_constraint[a][j]: message from variable at slot j into constraint a.
  std::vector<std::vector<SimplexPoint>> to_constraint;
  // to_variable[a][j]: message from constraint a to the variable at slot j.
  std::vector<std::vector<SimplexPoint>> to_variable;
};

struct BpResult {
  MessageSet messages;
  std::vector<SimplexPoint> marginals;
  bool converged = false;
  double residual = 0.0;
  int iterations = 0;
};

// Synchronous damped loopy BP.
BpResult bp_run(const FactorGraph& g, double damping = 0.5, double tol = 1e-10,
                int max_iters = 10000);

// Belief of a single constraint given converged messages, indexed like the
// weight table.
std::vector<double> constraint_belief(const FactorGraph& g, const MessageSet& ms,
                                      int a);

// One sample of the root-spin law on a finite tree: variables at the
// truncation depth draw i.i.d. boundary messages, everything propagates
// root-ward through the message equations.
SimplexPoint tree_root_marginal(const RootedTree& t, const Population& boundary,
                                std::uint64_t seed);

struct PopDynOptions {
  int sweeps = 100;
};

// Distributional fixed-point iteration: every sweep resamples each member
// from the previous generation through a fresh root star.
Population population_dynamics(const ModelSpec& spec, const Population& init,
                               int sweeps, std::uint64_t seed);

// Probes shipped for the martingale diagnostic.
struct Probe {
  enum Kind { kEtaOmega, kEtaOmegaSq } kind = kEtaOmega;
  int omega = 0;
  double operator()(const SimplexPoint& p) const {
    const double v = p[omega];
    return kind == kEtaOmega ? v : v * v;
  }
};

struct MartingaleResidual {
  double value = 0.0;
  double std_error = 0.0;
  long samples = 0;
};

// Monte Carlo estimate of E probe(X_{ell+1}) - E probe(X_ell) with shared
// tree prefixes and independent boundary draws from `boundary`.
MartingaleResidual martingale_residual(const ModelSpec& spec, int ell,
                                       const Probe& probe,
                                       const Population& boundary, long samples,
                                       std::uint64_t seed);

}  // namespace fgl
