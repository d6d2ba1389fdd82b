#include <doctest.h>

#include <cmath>
#include <map>

#include "fgl/model.hpp"
#include "fgl/tree.hpp"
#include "test_util.hpp"

using namespace fgl;
using namespace fgl::test;

namespace {

// Random relabeling plus sibling shuffle: rebuild the tree with permuted
// node visit order at each variable.
RootedTree shuffle_tree(const RootedTree& t, Rng& rng) {
  RootedTree out;
  out.alphabet = t.alphabet;
  out.weight_functions = t.weight_functions;
  out.boundary_depth = t.boundary_depth;
  out.variables.push_back({0, {}});
  // Recursive copy with shuffled constraint order at each variable.
  auto copy_var = [&](auto&& self, int src, int dst) -> void {
    std::vector<int> order = t.variables[src].constraints;
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.below(i)]);
    for (int aid : order) {
      const auto& a = t.constraints[aid];
      RootedTree::ConstraintNode na;
      na.wf = a.wf;
      na.parent_var = dst;
      na.parent_slot = a.parent_slot;
      for (int child : a.children) {
        const int nc = static_cast<int>(out.variables.size());
        out.variables.push_back({t.variables[child].depth, {}});
        na.children.push_back(nc);
      }
      const int naid = static_cast<int>(out.constraints.size());
      out.constraints.push_back(na);
      out.variables[dst].constraints.push_back(naid);
      for (std::size_t ci = 0; ci < a.children.size(); ++ci)
        self(self, a.children[ci], out.constraints[naid].children[ci]);
    }
  };
  copy_var(copy_var, 0, 0);
  return out;
}

}  // namespace

TEST_CASE("gw sampling basics") {
  const ModelSpec spec = preset_ising_pairwise(0.5, 0.75);

  // depth 0: root only.
  const RootedTree root_only = sample_gw_tree(spec, 0, 1);
  CHECK(root_only.variables.size() == 1);
  CHECK(root_only.constraints.empty());

  // Root offspring mean is k*rho = 1.5.
  const int samples = 10000;
  double sum = 0.0;
  for (int s = 0; s < samples; ++s)
    sum += static_cast<double>(
        sample_gw_tree(spec, 1, 40000 + s).variables[0].constraints.size());
  const double mean = sum / samples;
  CHECK(std::abs(mean - 1.5) < 3.0 * std::sqrt(1.5 / samples));
}

TEST_CASE("parent slots are uniform") {
  const ModelSpec spec = preset_ksat(3, 1.0, 1.0);
  std::vector<long> slot_counts(3, 0);
  long total = 0;
  for (int s = 0; s < 4000; ++s) {
    const RootedTree t = sample_gw_tree(spec, 1, 90000 + s);
    for (const auto& a : t.constraints) {
      ++slot_counts[a.parent_slot];
      ++total;
    }
  }
  double chi2 = 0.0;
  const double expect = static_cast<double>(total) / 3.0;
  for (long c : slot_counts) chi2 += (c - expect) * (c - expect) / expect;
  CHECK(chi_square_p_value(chi2, 2) > 0.001);
}

TEST_CASE("truncate") {
  const ModelSpec spec = preset_ising_pairwise(0.3, 1.0);
  RootedTree t = sample_gw_tree(spec, 3, 5);
  const RootedTree t0 = truncate(t, 0);
  CHECK(t0.variables.size() == 1);
  CHECK(t0.constraints.empty());

  // Truncating beyond the depth is the identity on codes.
  CHECK(canonical_code(truncate(t, 10)) == canonical_code(t));

  // A depth-2 path truncated at 1 becomes the depth-1 star.
  RootedTree path;
  path.alphabet = spec.alphabet;
  path.weight_functions = {spec.families[0].wf};
  path.boundary_depth = 2;
  path.variables = {{0, {0}}, {1, {1}}, {2, {}}};
  path.constraints = {{0, 0, 0, {1}}, {0, 1, 1, {2}}};
  const RootedTree star = truncate(path, 1);
  CHECK(star.variables.size() == 2);
  CHECK(star.constraints.size() == 1);
  RootedTree expect_star = path;
  expect_star.variables = {{0, {0}}, {1, {}}};
  expect_star.constraints = {{0, 0, 0, {1}}};
  CHECK(canonical_code(star) == canonical_code(expect_star));
}

TEST_CASE("canonical code invariances") {
  const ModelSpec spec = preset_ksat(2, 0.8, 1.2);
  // Sibling order at variables must not matter; slots and weights must.
  RootedTree a;
  a.alphabet = spec.alphabet;
  a.weight_functions = {spec.families[0].wf, spec.families[1].wf};
  a.variables = {{0, {0, 1}}, {1, {}}, {1, {}}};
  a.constraints = {{0, 0, 0, {1}}, {1, 0, 1, {2}}};
  RootedTree b = a;
  b.variables[0].constraints = {1, 0};
  CHECK(canonical_code(a) == canonical_code(b));

  RootedTree slot_changed = a;
  slot_changed.constraints[0].parent_slot = 1;
  CHECK(canonical_code(a) != canonical_code(slot_changed));

  RootedTree weight_changed = a;
  weight_changed.constraints[0].wf = 1;
  CHECK(canonical_code(a) != canonical_code(weight_changed));
}

TEST_CASE("canonical code is invariant under relabeling and sibling shuffles") {
  const ModelSpec spec = preset_ksat(3, 0.7, 0.6);
  Rng rng(4242);
  for (int trial = 0; trial < 1000; ++trial) {
    const RootedTree t = sample_gw_tree(spec, 2, 777000 + trial);
    Rng shuffle_rng(rng.next_u64());
    const RootedTree shuffled = shuffle_tree(t, shuffle_rng);
    REQUIRE(canonical_code(t) == canonical_code(shuffled));
  }
}

TEST_CASE("root star law matches the analytic Poisson-with-uniform-slots law") {
  // Single arity-2 family: the star class is determined by the counts
  // (c0, c1) of constraints with parent slot 0 and 1, which are independent
  // Po(rho) by thinning.
  const double rho = 0.7;
  const ModelSpec spec = preset_ising_pairwise(0.4, rho);
  const long samples = 100000;
  std::map<CanonicalCode, double> empirical;
  for (long s = 0; s < samples; ++s) {
    const RootedTree t = sample_gw_tree(spec, 1, 31337 + s);
    empirical[canonical_code(t)] += 1.0 / samples;
  }
  // Analytic law on the same codes, built from explicit (c0, c1) stars.
  std::map<CanonicalCode, double> analytic;
  auto poisson_pmf = [](double lambda, int k) {
    return std::exp(-lambda + k * std::log(lambda) - std::lgamma(k + 1.0));
  };
  for (int c0 = 0; c0 <= 12; ++c0)
    for (int c1 = 0; c1 <= 12; ++c1) {
      RootedTree star;
      star.alphabet = spec.alphabet;
      star.weight_functions = {spec.families[0].wf};
      star.boundary_depth = 1;
      star.variables.push_back({0, {}});
      for (int i = 0; i < c0 + c1; ++i) {
        const int child = static_cast<int>(star.variables.size());
        star.variables.push_back({1, {}});
        star.constraints.push_back({0, 0, i < c0 ? 0 : 1, {child}});
        star.variables[0].constraints.push_back(i);
      }
      analytic[canonical_code(star)] +=
          poisson_pmf(rho, c0) * poisson_pmf(rho, c1);
    }
  double tv = 0.0;
  for (const auto& [code, p] : analytic) {
    const auto it = empirical.find(code);
    tv += std::abs(p - (it == empirical.end() ? 0.0 : it->second));
  }
  for (const auto& [code, p] : empirical)
    if (!analytic.count(code)) tv += p;
  CHECK(0.5 * tv <= 0.02);
}

TEST_CASE("neighborhood extraction") {
  // Isolated variable.
  FactorGraph isolated = free_graph(1);
  const auto ball = neighborhood(isolated, 0, 2);
  REQUIRE(ball.has_value());
  CHECK(ball->variables.size() == 1);

  // Triangle of pairwise constraints: depth 1 is a star, depth 2 closes the
  // cycle.
  FactorGraph tri;
  tri.alphabet = SpinAlphabet::ising();
  tri.weight_functions.push_back(
      WeightFunction{"w", 2, {1.0, 2.0, 2.0, 1.0}});
  tri.n = 3;
  tri.constraints = {{0, {0, 1}}, {0, {1, 2}}, {0, {2, 0}}};
  const auto star = neighborhood(tri, 0, 1);
  REQUIRE(star.has_value());
  CHECK(star->constraints.size() == 2);
  CHECK(!neighborhood(tri, 0, 2).has_value());

  // Grid corner at depth 1: two constraint children.
  const FactorGraph grid = preset_ising_grid(2, 0.5);
  const auto corner = neighborhood(grid, 0, 1);
  REQUIRE(corner.has_value());
  CHECK(corner->variables[0].constraints.size() == 2);

  // A repeated variable inside one constraint is a multi-edge, hence cyclic.
  FactorGraph multi;
  multi.alphabet = SpinAlphabet::ising();
  multi.weight_functions.push_back(
      WeightFunction{"w", 2, {1.0, 2.0, 2.0, 1.0}});
  multi.n = 2;
  multi.constraints = {{0, {0, 0}}};
  CHECK(!neighborhood(multi, 0, 1).has_value());

  CHECK_THROWS(neighborhood(tri, 7, 1));
}

TEST_CASE("tree to factor graph round trip preserves the code") {
  const ModelSpec spec = preset_ksat(3, 0.9, 0.8);
  for (int trial = 0; trial < 50; ++trial) {
    const RootedTree t = sample_gw_tree(spec, 2, 660 + trial);
    const FactorGraph g = tree_to_factor_graph(t);
    const auto back = neighborhood(g, 0, 10);
    REQUIRE(back.has_value());
    CHECK(canonical_code(*back) == canonical_code(t));
  }
}
