#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fgl/factor_graph.hpp"
#include "fgl/model.hpp"

namespace fgl {

// Finite rooted factor tree.  Variable 0 is the root.  Constraint nodes
// carry the slot their parent variable occupies; children fill the other
// slots in increasing slot order.  boundary_depth records the truncation
// level: variables at exactly that depth are where boundary messages attach.
struct RootedTree {
  struct VariableNode {
    int depth = 0;
    std::vector<int> constraints;  // child constraint node ids
  };
  struct ConstraintNode {
    int wf = 0;
    int parent_var = 0;
    int parent_slot = 0;
    std::vector<int> children;  // child variable ids, non-parent slots in order
  };

  SpinAlphabet alphabet;
  std::vector<WeightFunction> weight_functions;
  std::vector<VariableNode> variables;
  std::vector<ConstraintNode> constraints;
  int boundary_depth = 0;

  int depth() const {
    int d = 0;
    for (const auto& v : variables) d = std::max(d, v.depth);
    return d;
  }
  std::size_t node_count() const { return variables.size() + constraints.size(); }
};

using CanonicalCode = std::string;

// Galton-Watson truncation: every variable above the truncation depth gets,
// per family, Po(k*rho) constraint children with uniform parent slots.
RootedTree sample_gw_tree(const ModelSpec& spec, int depth, std::uint64_t seed);

RootedTree truncate(const RootedTree& t, int ell);

// Equal codes iff the trees are isomorphic as rooted factor trees
// (root-, weight- and slot-preserving).
CanonicalCode canonical_code(const RootedTree& t);

// Distance-2*ell ball around x, or nullopt when the ball contains a cycle
// (multi-edges count as cycles).
std::optional<RootedTree> neighborhood(const FactorGraph& g, int x, int ell);

FactorGraph tree_to_factor_graph(const RootedTree& t);

}  // namespace fgl
