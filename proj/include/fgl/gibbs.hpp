#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fgl/factor_graph.hpp"
#include "fgl/rng.hpp"

namespace fgl {

// Hard guard for exact enumeration: |Omega|^n must stay below this many
// states unless the caller raises the cap.
inline constexpr std::uint64_t kDefaultStateCap = std::uint64_t{1} << 24;

struct StateCapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Number of states q^n, or nullopt on overflow past cap checks.
std::uint64_t state_count_checked(const FactorGraph& g, std::uint64_t cap);

double log_gibbs_weight(const FactorGraph& g, const Assignment& sigma);
double gibbs_weight(const FactorGraph& g, const Assignment& sigma);

struct PartitionFunction {
  double log_z = 0.0;
  std::optional<double> z;  // present when exp(log_z) is representable
};

PartitionFunction partition_function(const FactorGraph& g,
                                     std::uint64_t cap = kDefaultStateCap);

// Exact joint marginal on an ordered list of variables; indexed like a
// weight table (first listed variable most significant).
std::vector<double> gibbs_marginal(const FactorGraph& g,
                                   const std::vector<int>& vars,
                                   std::uint64_t cap = kDefaultStateCap);

// All single-variable marginals from one sweep over the state space.
std::vector<std::vector<double>> gibbs_all_marginals(
    const FactorGraph& g, std::uint64_t cap = kDefaultStateCap);

// Exact i.i.d. samples by cumulative-probability inversion.
std::vector<Assignment> gibbs_sample(const FactorGraph& g, int count,
                                     std::uint64_t seed,
                                     std::uint64_t cap = kDefaultStateCap);

struct Clamp {
  int var;
  int spin;
};

// Marginal of `target` conditioned on the clamped variables.
std::vector<double> conditional_marginal(const FactorGraph& g, int target,
                                         const std::vector<Clamp>& clamped,
                                         std::uint64_t cap = kDefaultStateCap);

}  // namespace fgl
