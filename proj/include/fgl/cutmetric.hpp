#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fgl/measure.hpp"

namespace fgl {

struct CapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Coupling of two atom lists: nonnegative matrix with prescribed marginals.
struct Coupling {
  int rows = 0, cols = 0;
  std::vector<double> w;  // row-major

  double at(int i, int j) const { return w[static_cast<std::size_t>(i) * cols + j]; }
  double& at(int i, int j) { return w[static_cast<std::size_t>(i) * cols + j]; }

  static Coupling independent(const EmbeddedMeasure& mu, const EmbeddedMeasure& nu);
};

enum class CutMode { kExact, kHeuristic };

struct CutSupResult {
  double value = 0.0;
  std::vector<std::pair<int, int>> b_pairs;  // witness B
  std::vector<int> u_cells;                  // witness U
  std::vector<int> signs;                    // witness sign pattern over Omega
  bool exact = false;                        // enumeration vs ascent lower bound
};

struct CutOptions {
  int pairs_cap = 20;     // exact inner sup
  int n_cap = 20;         // exact inner sup
  int weak_n_cap = 8;     // permutation enumeration
  int restarts = 32;      // alternating ascent
  int max_rounds = 100;   // coupling/cut alternation
  int swap_proposals = 12;  // weak heuristic local search
  std::size_t lp_pairs_cap = 8192;
  double tol = 1e-9;
  std::uint64_t seed = 0;
};

// Inner supremum of the strong cut metric at a fixed coupling.
CutSupResult cut_sup(const Coupling& gamma, const EmbeddedMeasure& mu,
                     const EmbeddedMeasure& nu, CutMode mode,
                     const CutOptions& opts = {});

struct CutDistanceResult {
  double value = 0.0;
  Coupling coupling;
  bool coupling_optimal = false;  // exact min over the coupling polytope
  bool sup_exact = false;         // inner sup fully enumerated
  bool permutation_restricted = false;  // weak metric caveat
  std::vector<int> permutation;         // weak metric: chosen coordinate map
  int cut_count = 0;
  int rounds = 0;
};

CutDistanceResult strong_cut_distance(const EmbeddedMeasure& mu,
                                      const EmbeddedMeasure& nu, CutMode mode,
                                      const CutOptions& opts = {});

// Weak metric: minimum of the strong distance over coordinate permutations.
CutDistanceResult weak_cut_distance(const EmbeddedMeasure& mu,
                                    const EmbeddedMeasure& nu, CutMode mode,
                                    const CutOptions& opts = {});

}  // namespace fgl
