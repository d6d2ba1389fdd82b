#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "fgl/factor_graph.hpp"
#include "fgl/simplex.hpp"

namespace fgl {

// Sparse probability measure on Omega^n.
struct DiscreteMeasure {
  SpinAlphabet alphabet;
  int n = 0;
  std::vector<std::pair<Assignment, double>> support;

  std::size_t q() const { return alphabet.size(); }
  void validate() const;
};

// Step-function embedding: one weighted atom per support point; each atom is
// a function [0,1) -> P(Omega) constant on the n equal coordinate cells.
struct EmbeddedMeasure {
  SpinAlphabet alphabet;
  int n = 0;
  struct Atom {
    double weight = 0.0;
    std::vector<SimplexPoint> step;  // length n
  };
  std::vector<Atom> atoms;

  std::size_t q() const { return alphabet.size(); }
  void validate() const;
};

EmbeddedMeasure embed(const DiscreteMeasure& m);

EmbeddedMeasure mixture(const EmbeddedMeasure& mu, const EmbeddedMeasure& nu,
                        double alpha);

// Coordinate-wise pairing on the product alphabet.
DiscreteMeasure product(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// Exact Gibbs measure of a small graph as a DiscreteMeasure.
DiscreteMeasure gibbs_discrete_measure(const FactorGraph& g,
                                       std::uint64_t cap = std::uint64_t{1} << 24);

// Joint marginal of an embedded measure on an ordered list of coordinate
// cells (repeats allowed), indexed with the first cell most significant.
std::vector<double> embedded_marginal(const EmbeddedMeasure& mu,
                                      const std::vector<int>& cells);

nlohmann::json to_json(const DiscreteMeasure& m);
DiscreteMeasure discrete_measure_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EmbeddedMeasure& m);
EmbeddedMeasure embedded_measure_from_json(const nlohmann::json& j);

// Aldous-Hoover sampling: rows are atoms drawn from mu, columns uniform
// coordinate cells, entry (i,j) a spin drawn from row i's value at cell j.
std::vector<std::vector<int>> sample_ah_array(const EmbeddedMeasure& mu, int k,
                                              std::uint64_t seed);

struct SampledMarginalDistance {
  double value = 0.0;
  double std_error = 0.0;
  long samples = 0;
};

// Monte Carlo E || mu_(x1..xk) - nu_(x1..xk) ||_TV over uniform coordinate
// k-tuples (drawn with replacement, mirroring the continuum definition).
SampledMarginalDistance sampled_marginal_distance(const EmbeddedMeasure& mu,
                                                  const EmbeddedMeasure& nu,
                                                  int k, long samples,
                                                  std::uint64_t seed);

}  // namespace fgl
