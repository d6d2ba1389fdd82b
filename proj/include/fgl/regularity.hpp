#pragma once

#include <cstdint>
#include <vector>

#include "fgl/measure.hpp"

namespace fgl {

struct CoordinatePartition {
  std::vector<std::vector<int>> blocks;  // disjoint cover of 0..n-1
  void validate(int n) const;
};

struct ConfigPartition {
  std::vector<std::vector<int>> blocks;  // disjoint cover of support indices
  void validate(std::size_t support_size) const;
};

struct Reg4Witness {
  int i = 0, j = 0;
  std::vector<int> u_cells;    // subset of V_i
  std::vector<int> t_configs;  // subset of S_j (support indices)
  int omega = 0;
  double violation = 0.0;  // |deviation in coordinate omega|
  double tv = 0.0;         // TV norm of the deviation vector
};

struct RegularityReport {
  double eps = 0.0;
  std::vector<std::pair<int, int>> good_pairs;  // R
  double good_mass = 0.0;                       // REG2 mass
  bool regular = false;
  std::vector<Reg4Witness> witnesses;
  std::vector<double> reg3_diameter;  // aligned with good_pairs
};

// Mean within-block variance of the spin indicator field.
double partition_index(const DiscreteMeasure& m, const CoordinatePartition& v,
                       const ConfigPartition& s);

// Builds the maximal good set R (REG1 + REG3 + REG4 not refuted).  The REG4
// search enumerates exactly when 2^|V_i| * 2^|S_j| fits the budget and falls
// back to randomized-plus-greedy ascent otherwise; missed witnesses leave a
// pair in R.
RegularityReport check_regularity(const DiscreteMeasure& m,
                                  const CoordinatePartition& v,
                                  const ConfigPartition& s, double eps,
                                  std::uint64_t budget = std::uint64_t{1} << 20,
                                  std::uint64_t seed = 0);

// Splits every witnessed block pair and re-splits config blocks on the
// eps/|Omega| grid so REG3 holds for every pair of the result.
std::pair<CoordinatePartition, ConfigPartition> refine_once(
    const DiscreteMeasure& m, const CoordinatePartition& v,
    const ConfigPartition& s, const RegularityReport& report);

struct DecompositionResult {
  CoordinatePartition v;
  ConfigPartition s;
  RegularityReport report;
  int steps = 0;
  std::vector<double> index_trace;  // index before each refinement and after the last
};

DecompositionResult regularity_decomposition(
    const DiscreteMeasure& m, double eps, const CoordinatePartition& v0,
    const ConfigPartition& s0, std::uint64_t budget = std::uint64_t{1} << 20,
    std::uint64_t seed = 0);

// One atom per config block, constant on coordinate blocks.
EmbeddedMeasure conditional_measure(const DiscreteMeasure& m,
                                    const CoordinatePartition& v,
                                    const ConfigPartition& s);

CoordinatePartition trivial_coordinate_partition(int n);
ConfigPartition trivial_config_partition(std::size_t support_size);

}  // namespace fgl
