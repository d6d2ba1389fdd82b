#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fgl/bp.hpp"
#include "fgl/model.hpp"
#include "fgl/simplex.hpp"
#include "fgl/tree.hpp"

namespace fgl {

struct BetheTerms {
  double phi = 0.0;
  std::vector<double> hat_phi;    // per root constraint
  std::vector<double> tilde_phi;  // per root constraint
  std::vector<int> arity;         // k_a per root constraint
  double total() const {
    double t = phi;
    for (std::size_t a = 0; a < hat_phi.size(); ++a)
      t += hat_phi[a] / arity[a] - tilde_phi[a];
    return t;
  }
};

struct FreeEnergyEstimate {
  double value = 0.0;      // nats per variable
  double std_error = 0.0;
  std::string method;
  long samples = 0;
};

// Local Bethe terms of a depth-<=1 star.  `incoming` holds one message per
// (root constraint, non-root slot), constraint-major in slot order.
BetheTerms bethe_local_terms(const RootedTree& star,
                             const std::vector<SimplexPoint>& incoming);

// Monte Carlo over root stars with boundary-drawn leaf messages.
FreeEnergyEstimate bethe_free_energy(const ModelSpec& spec,
                                     const Population& boundary, long samples,
                                     std::uint64_t seed);

// The Poissonized form: per-slot Po(rho) constraint counts and fully
// combined cavity messages drawn from the boundary.
FreeEnergyEstimate poissonized_bethe(const ModelSpec& spec,
                                     const Population& boundary, long samples,
                                     std::uint64_t seed);

// (1/n) ln Z averaged over sampled graphs, by exact enumeration.
FreeEnergyEstimate free_energy_exact(const ModelSpec& spec, int n,
                                     const std::vector<std::uint64_t>& seeds,
                                     std::uint64_t cap = std::uint64_t{1} << 24);

struct AssIncrement {
  int n = 0;  // increment from n to n+1 variables
  double increment = 0.0;  // E ln(Z_{n+1}/Z_n)
  double std_error = 0.0;
  double ln_z31 = 0.0;  // E ln(Z'''/Z')
  double ln_z31_se = 0.0;
  double ln_z21 = 0.0;  // E ln(Z''/Z')
  double ln_z21_se = 0.0;
  long samples = 0;
};

// Aizenman-Simms-Starr increments via the coupled G'/G''/G''' construction.
// G'' is distributed exactly as G_n and G''' exactly as G_{n+1}, so the
// telescoped sum is an unbiased estimate of (1/n_max) E ln Z_{n_max}.
std::vector<AssIncrement> ass_increments(const ModelSpec& spec, int n_max,
                                         int seeds_per_n, std::uint64_t seed,
                                         std::uint64_t cap = std::uint64_t{1} << 24);

}  // namespace fgl
