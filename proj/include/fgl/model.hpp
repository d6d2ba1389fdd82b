#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fgl/factor_graph.hpp"
#include "fgl/rng.hpp"

namespace fgl {

// Poisson random factor-graph model: for each family, Po(n*rho) constraints,
// each with a uniform ordered neighbor tuple (with replacement).
struct ModelSpec {
  SpinAlphabet alphabet;
  struct Family {
    WeightFunction wf;
    double rho = 0.0;
  };
  std::vector<Family> families;

  void validate() const {
    if (alphabet.size() == 0) throw std::invalid_argument("empty alphabet");
    if (families.empty()) throw std::invalid_argument("model needs at least one family");
    for (const auto& f : families) {
      f.wf.validate(alphabet.size());
      if (f.rho < 0.0) throw std::invalid_argument("negative density");
    }
  }
};

FactorGraph sample_factor_graph(const ModelSpec& spec, int n, std::uint64_t seed);

// k-SAT at inverse temperature beta: 2^k sign patterns, each of density
// density/2^k, psi_c(x) = exp(-beta) when x == -c and 1 otherwise.
ModelSpec preset_ksat(int k, double beta, double density);

// Single arity-2 family exp(beta * x1 * x2) on {-1,+1}.
ModelSpec preset_ising_pairwise(double beta, double density = 1.0);

// Deterministic side x side box of Z^2 with one Ising edge per lattice edge.
FactorGraph preset_ising_grid(int side, double beta);

// "ksat:k=3,beta=1.0,density=2.5" or "ising:beta=0.2,density=1.0".
ModelSpec parse_preset(const std::string& text);

}  // namespace fgl
