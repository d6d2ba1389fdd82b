#include "fgl/tree.hpp"

#include <algorithm>
#include <deque>

namespace fgl {

RootedTree sample_gw_tree(const ModelSpec& spec, int depth, std::uint64_t seed) {
  spec.validate();
  if (depth < 0) throw std::invalid_argument("depth must be >= 0");
  RootedTree t;
  t.alphabet = spec.alphabet;
  for (const auto& f : spec.families) t.weight_functions.push_back(f.wf);
  t.boundary_depth = depth;
  t.variables.push_back({0, {}});
  Rng rng = Rng::substream(seed, "gw_tree");
  std::deque<int> frontier{0};
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop_front();
    const int d = t.variables[v].depth;
    if (d >= depth) continue;
    for (std::size_t fi = 0; fi < spec.families.size(); ++fi) {
      const auto& fam = spec.families[fi];
      const int k = fam.wf.arity;
      const long count = rng.poisson(static_cast<double>(k) * fam.rho);
      for (long i = 0; i < count; ++i) {
        RootedTree::ConstraintNode a;
        a.wf = static_cast<int>(fi);
        a.parent_var = v;
        a.parent_slot = static_cast<int>(rng.below(k));
        for (int j = 0; j < k - 1; ++j) {
          const int child = static_cast<int>(t.variables.size());
          t.variables.push_back({d + 1, {}});
          a.children.push_back(child);
          frontier.push_back(child);
        }
        const int aid = static_cast<int>(t.constraints.size());
        t.constraints.push_back(std::move(a));
        t.variables[v].constraints.push_back(aid);
      }
    }
  }
  return t;
}

RootedTree truncate(const RootedTree& t, int ell) {
  if (ell < 0) throw std::invalid_argument("ell must be >= 0");
  RootedTree out;
  out.alphabet = t.alphabet;
  out.weight_functions = t.weight_functions;
  out.boundary_depth = std::min(t.boundary_depth, ell);
  std::vector<int> var_map(t.variables.size(), -1);
  for (std::size_t v = 0; v < t.variables.size(); ++v) {
    if (t.variables[v].depth > ell) continue;
    var_map[v] = static_cast<int>(out.variables.size());
    out.variables.push_back({t.variables[v].depth, {}});
  }
  for (const auto& a : t.constraints) {
    if (t.variables[a.parent_var].depth >= ell) continue;
    RootedTree::ConstraintNode na;
    na.wf = a.wf;
    na.parent_var = var_map[a.parent_var];
    na.parent_slot = a.parent_slot;
    for (int c : a.children) na.children.push_back(var_map[c]);
    const int aid = static_cast<int>(out.constraints.size());
    out.constraints.push_back(std::move(na));
    out.variables[var_map[a.parent_var]].constraints.push_back(aid);
  }
  return out;
}

namespace {

std::string variable_code(const RootedTree& t, int v);

std::string constraint_code(const RootedTree& t, int a) {
  const auto& c = t.constraints[a];
  std::string code = "C" + std::to_string(c.wf) + "." + std::to_string(c.parent_slot) + "(";
  for (std::size_t i = 0; i < c.children.size(); ++i) {
    if (i) code += ",";
    code += variable_code(t, c.children[i]);
  }
  code += ")";
  return code;
}

std::string variable_code(const RootedTree& t, int v) {
  std::vector<std::string> parts;
  for (int a : t.variables[v].constraints) parts.push_back(constraint_code(t, a));
  std::sort(parts.begin(), parts.end());
  std::string code = "V(";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) code += ";";
    code += parts[i];
  }
  code += ")";
  return code;
}

}  // namespace

CanonicalCode canonical_code(const RootedTree& t) { return variable_code(t, 0); }

std::optional<RootedTree> neighborhood(const FactorGraph& g, int x, int ell) {
  if (x < 0 || x >= g.n) throw std::invalid_argument("unknown variable id");
  const auto adj = g.adjacency();
  RootedTree t;
  t.alphabet = g.alphabet;
  t.weight_functions = g.weight_functions;
  t.boundary_depth = ell;
  t.variables.push_back({0, {}});
  std::vector<int> var_of(1, x);          // tree var -> graph var
  std::vector<int> via_constraint(1, -1); // graph constraint used to reach it
  std::vector<bool> seen_var(g.n, false);
  std::vector<bool> seen_cons(g.constraints.size(), false);
  seen_var[x] = true;
  std::deque<int> frontier{0};
  while (!frontier.empty()) {
    const int tv = frontier.front();
    frontier.pop_front();
    const int d = t.variables[tv].depth;
    if (d >= ell) continue;
    const int gv = var_of[tv];
    for (const auto& [a, slot] : adj[gv]) {
      if (a == via_constraint[tv]) continue;
      if (seen_cons[a]) return std::nullopt;
      seen_cons[a] = true;
      const auto& cons = g.constraints[a];
      int occurrences = 0;
      for (int w : cons.neighbors)
        if (w == gv) ++occurrences;
      if (occurrences != 1) return std::nullopt;  // multi-edge
      RootedTree::ConstraintNode node;
      node.wf = cons.wf;
      node.parent_var = tv;
      node.parent_slot = slot;
      for (std::size_t j = 0; j < cons.neighbors.size(); ++j) {
        if (static_cast<int>(j) == slot) continue;
        const int w = cons.neighbors[j];
        if (seen_var[w]) return std::nullopt;
        seen_var[w] = true;
        const int child = static_cast<int>(t.variables.size());
        t.variables.push_back({d + 1, {}});
        var_of.push_back(w);
        via_constraint.push_back(a);
        node.children.push_back(child);
        frontier.push_back(child);
      }
      const int aid = static_cast<int>(t.constraints.size());
      t.constraints.push_back(std::move(node));
      t.variables[tv].constraints.push_back(aid);
    }
  }
  return t;
}

FactorGraph tree_to_factor_graph(const RootedTree& t) {
  FactorGraph g;
  g.alphabet = t.alphabet;
  g.weight_functions = t.weight_functions;
  g.n = static_cast<int>(t.variables.size());
  for (const auto& a : t.constraints) {
    FactorGraph::Constraint c;
    c.wf = a.wf;
    const int k = t.weight_functions[a.wf].arity;
    c.neighbors.resize(k);
    std::size_t next_child = 0;
    for (int j = 0; j < k; ++j)
      c.neighbors[j] = (j == a.parent_slot) ? a.parent_var : a.children[next_child++];
    g.constraints.push_back(std::move(c));
  }
  return g;
}

}  // namespace fgl
