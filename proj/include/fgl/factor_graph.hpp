#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fgl {

struct SpinAlphabet {
  std::vector<std::string> symbols;

  std::size_t size() const { return symbols.size(); }

  int index_of(const std::string& s) const {
    for (std::size_t i = 0; i < symbols.size(); ++i)
      if (symbols[i] == s) return static_cast<int>(i);
    throw std::invalid_argument("unknown spin symbol: " + s);
  }

  static SpinAlphabet binary() { return {{"0", "1"}}; }
  static SpinAlphabet ising() { return {{"-1", "+1"}}; }

  bool operator==(const SpinAlphabet&) const = default;
};

// Positive weight function of fixed arity.  The table is dense over spin
// tuples, row-major with the first coordinate most significant.
struct WeightFunction {
  std::string name;
  int arity = 0;
  std::vector<double> table;

  void validate(std::size_t q) const {
    std::size_t expect = 1;
    for (int i = 0; i < arity; ++i) expect *= q;
    if (table.size() != expect)
      throw std::invalid_argument("weight table size mismatch for " + name);
    for (double v : table)
      if (!(v > 0.0))
        throw std::invalid_argument("weight table entry not positive in " + name);
  }

  std::size_t tuple_index(std::span<const int> spins, std::size_t q) const {
    std::size_t idx = 0;
    for (int i = 0; i < arity; ++i) idx = idx * q + static_cast<std::size_t>(spins[i]);
    return idx;
  }

  double value(std::span<const int> spins, std::size_t q) const {
    return table[tuple_index(spins, q)];
  }
};

using Assignment = std::vector<int>;

// Finite factor graph: n variables, constraints with ordered neighbor tuples
// (repeats allowed; the random model samples tuples with replacement).
struct FactorGraph {
  SpinAlphabet alphabet;
  std::vector<WeightFunction> weight_functions;
  struct Constraint {
    int wf = 0;
    std::vector<int> neighbors;
  };
  std::vector<Constraint> constraints;
  int n = 0;

  std::size_t q() const { return alphabet.size(); }
  int arity(const Constraint& c) const { return weight_functions[c.wf].arity; }

  void validate() const {
    if (alphabet.size() == 0) throw std::invalid_argument("empty alphabet");
    for (const auto& wf : weight_functions) wf.validate(q());
    for (const auto& c : constraints) {
      if (c.wf < 0 || c.wf >= static_cast<int>(weight_functions.size()))
        throw std::invalid_argument("constraint references unknown weight function");
      if (static_cast<int>(c.neighbors.size()) != weight_functions[c.wf].arity)
        throw std::invalid_argument("constraint arity mismatch");
      for (int v : c.neighbors)
        if (v < 0 || v >= n) throw std::invalid_argument("neighbor id out of range");
    }
  }

  // var -> list of (constraint index, slot).
  std::vector<std::vector<std::pair<int, int>>> adjacency() const {
    std::vector<std::vector<std::pair<int, int>>> adj(n);
    for (std::size_t a = 0; a < constraints.size(); ++a)
      for (std::size_t j = 0; j < constraints[a].neighbors.size(); ++j)
        adj[constraints[a].neighbors[j]].emplace_back(static_cast<int>(a),
                                                      static_cast<int>(j));
    return adj;
  }
};

struct RemovedVariable {
  FactorGraph graph;
  // old variable id -> new id, -1 for the removed variable.
  std::vector<int> old_to_new;
};

// G - x: drop x and every constraint touching it, reindex the rest.
RemovedVariable remove_variable(const FactorGraph& g, int x);

}  // namespace fgl
