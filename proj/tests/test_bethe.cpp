#include <doctest.h>

#include <cmath>

#include "fgl/bethe.hpp"
#include "fgl/gibbs.hpp"
#include "test_util.hpp"

using namespace fgl;
using namespace fgl::test;

namespace {

RootedTree star_with(const ModelSpec& spec, const std::vector<std::pair<int, int>>& cons) {
  // cons: (family id, parent slot).
  RootedTree star;
  star.alphabet = spec.alphabet;
  for (const auto& fam : spec.families) star.weight_functions.push_back(fam.wf);
  star.boundary_depth = 1;
  star.variables.push_back({0, {}});
  for (const auto& [wf, slot] : cons) {
    RootedTree::ConstraintNode node;
    node.wf = wf;
    node.parent_var = 0;
    node.parent_slot = slot;
    for (int j = 0; j < star.weight_functions[wf].arity - 1; ++j) {
      const int child = static_cast<int>(star.variables.size());
      star.variables.push_back({1, {}});
      node.children.push_back(child);
    }
    const int aid = static_cast<int>(star.constraints.size());
    star.constraints.push_back(std::move(node));
    star.variables[0].constraints.push_back(aid);
  }
  return star;
}

}  // namespace

TEST_CASE("bethe local terms on pinned stars") {
  // Zero constraints: phi = ln|Omega|, no per-constraint terms.
  const ModelSpec unit = preset_ising_pairwise(0.0, 1.0);
  const RootedTree empty_star = star_with(unit, {});
  const BetheTerms none = bethe_local_terms(empty_star, {});
  CHECK(none.phi == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(none.hat_phi.empty());
  CHECK(none.total() == doctest::Approx(std::log(2.0)).epsilon(1e-14));

  // One unit constraint of arity 2 with a uniform incoming message:
  // phi = ln sum_s eta_hat(s) = 0, hat = 0, tilde = -ln|Omega|;
  // the star total is ln|Omega|.
  const RootedTree one = star_with(unit, {{0, 0}});
  const BetheTerms t1 = bethe_local_terms(one, {uniform_point(2)});
  CHECK(t1.phi == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(t1.hat_phi[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(t1.tilde_phi[0] == doctest::Approx(-std::log(2.0)).epsilon(1e-14));
  CHECK(t1.total() == doctest::Approx(std::log(2.0)).epsilon(1e-13));

  // Single Ising constraint at beta = 0.3, uniform incoming:
  // hat_phi = ln cosh(beta), cross-checked by the direct 4-term sum.
  const double beta = 0.3;
  const ModelSpec ising = preset_ising_pairwise(beta, 1.0);
  const RootedTree is_star = star_with(ising, {{0, 1}});
  const BetheTerms t2 = bethe_local_terms(is_star, {uniform_point(2)});
  CHECK(t2.hat_phi[0] == doctest::Approx(std::log(std::cosh(beta))).epsilon(1e-13));
  double direct = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      direct += std::exp(beta * (2 * a - 1) * (2 * b - 1)) * 0.5 * 0.5;
  CHECK(t2.hat_phi[0] == doctest::Approx(std::log(direct)).epsilon(1e-13));

  CHECK_THROWS(bethe_local_terms(one, {}));
}

TEST_CASE("tree-exactness of the local Bethe terms") {
  // Sum of the local terms with exact subtree messages reproduces ln Z on a
  // finite tree.  Messages come from converged BP, which is exact on trees.
  ModelSpec spec = preset_ising_pairwise(0.7, 0.8);
  for (auto& fam : preset_ksat(3, 1.1, 0.5).families) spec.families.push_back(fam);
  int done = 0;
  std::uint64_t seed = 900;
  while (done < 25) {
    const RootedTree t = sample_gw_tree(spec, 3, seed++);
    if (t.variables.size() > 12 || t.node_count() < 2) continue;
    ++done;
    const FactorGraph g = tree_to_factor_graph(t);
    const BpResult bp = bp_run(g, 0.0, 1e-14, 3000);
    REQUIRE(bp.converged);
    const auto adj = g.adjacency();
    // Bethe free energy of a finite factor graph from its BP messages:
    // sum over variables of the variable term, plus per-constraint
    // correction terms, matches the tree decomposition used by the
    // root-star estimator.
    double total = 0.0;
    for (int v = 0; v < g.n; ++v) {
      double sum = 0.0;
      for (std::size_t w = 0; w < 2; ++w) {
        double prod = 1.0;
        for (const auto& [a, j] : adj[v]) prod *= bp.messages.to_variable[a][j][w];
        sum += prod;
      }
      total += std::log(sum);
    }
    for (std::size_t a = 0; a < g.constraints.size(); ++a) {
      const auto& cons = g.constraints[a];
      const auto& wf = g.weight_functions[cons.wf];
      double hat = 0.0;
      std::vector<int> tuple(wf.arity, 0);
      for (std::size_t idx = 0; idx < wf.table.size(); ++idx) {
        double w = wf.table[idx];
        for (int j = 0; j < wf.arity; ++j)
          w *= bp.messages.to_constraint[a][j][tuple[j]];
        hat += w;
        for (int j = wf.arity - 1; j >= 0; --j) {
          if (++tuple[j] < 2) break;
          tuple[j] = 0;
        }
      }
      total += std::log(hat);
      for (int j = 0; j < wf.arity; ++j) {
        double dot = 0.0;
        for (std::size_t w = 0; w < 2; ++w)
          dot += bp.messages.to_constraint[a][j][w] *
                 bp.messages.to_variable[a][j][w];
        total -= std::log(dot);
      }
    }
    CHECK(total == doctest::Approx(partition_function(g).log_z).epsilon(1e-9));
  }
}

TEST_CASE("bethe free energy trivial cases") {
  // rho = 0 and psi = 1 both give exactly ln|Omega| with zero variance.
  const Population boundary = Population::uniform_init(16, 2);
  const ModelSpec empty = preset_ising_pairwise(0.4, 0.0);
  const FreeEnergyEstimate zero_rho = bethe_free_energy(empty, boundary, 200, 5);
  CHECK(zero_rho.value == doctest::Approx(std::log(2.0)).epsilon(1e-13));
  CHECK(zero_rho.std_error == doctest::Approx(0.0).epsilon(1e-12));

  const ModelSpec unit = preset_ising_pairwise(0.0, 1.3);
  const FreeEnergyEstimate unit_est = bethe_free_energy(unit, boundary, 500, 6);
  CHECK(unit_est.value == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  const FreeEnergyEstimate pz = poissonized_bethe(empty, boundary, 200, 7);
  CHECK(pz.value == doctest::Approx(std::log(2.0)).epsilon(1e-13));
  // The Poissonized form is ln|Omega| in expectation for unit weights, but
  // individual samples fluctuate with the degree draw.
  const FreeEnergyEstimate pu = poissonized_bethe(unit, boundary, 20000, 8);
  CHECK(std::abs(pu.value - std::log(2.0)) <= 3.0 * pu.std_error);
}

TEST_CASE("free energy exact") {
  const ModelSpec empty = preset_ising_pairwise(0.4, 0.0);
  const FreeEnergyEstimate fz = free_energy_exact(empty, 6, {1, 2, 3});
  CHECK(fz.value == doctest::Approx(std::log(2.0)).epsilon(1e-13));
  CHECK(fz.std_error == doctest::Approx(0.0).epsilon(1e-12));

  // Forced single Ising edge: n=2, one constraint.
  const double beta = 0.6;
  const FactorGraph edge = single_ising_edge(beta);
  const double expect =
      std::log(2.0 * std::exp(beta) + 2.0 * std::exp(-beta)) / 2.0;
  CHECK(partition_function(edge).log_z / 2.0 ==
        doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("poissonized matches the tree form within combined SE") {
  // The two forms estimate the same functional for any boundary law.
  Rng master(2024);
  for (int trial = 0; trial < 5; ++trial) {
    ModelSpec spec;
    spec.alphabet = SpinAlphabet::ising();
    const int families = 1 + static_cast<int>(master.below(2));
    for (int f = 0; f < families; ++f) {
      WeightFunction wf;
      wf.name = "rand" + std::to_string(f);
      wf.arity = 2 + static_cast<int>(master.below(2));
      const std::size_t size = std::size_t{1} << wf.arity;
      for (std::size_t i = 0; i < size; ++i)
        wf.table.push_back(0.5 + master.next_double());
      spec.families.push_back({std::move(wf), 0.3 + 0.4 * master.next_double()});
    }
    const Population boundary =
        Population::jittered_init(64, 2, 1.5, master.next_u64());
    const long samples = 20000;
    const FreeEnergyEstimate tree =
        bethe_free_energy(spec, boundary, samples, 1000 + trial);
    const FreeEnergyEstimate poisson =
        poissonized_bethe(spec, boundary, samples, 2000 + trial);
    const double se = std::sqrt(tree.std_error * tree.std_error +
                                poisson.std_error * poisson.std_error);
    CHECK(std::abs(tree.value - poisson.value) <= 3.0 * se);
  }
}

TEST_CASE("chen-stein identity") {
  // X ~ Po(2), f(x) = x^2: E[X f(X)] = 2 E[f(X+1)], both equal to
  // E[X^3] = d^3 + 3d^2 + d = 22.
  const double d = 2.0;
  const long draws = 100000;
  Rng rng(31415);
  double lhs = 0.0, lhs_sq = 0.0, rhs = 0.0, rhs_sq = 0.0;
  for (long i = 0; i < draws; ++i) {
    const double x = static_cast<double>(rng.poisson(d));
    const double a = x * x * x;
    lhs += a;
    lhs_sq += a * a;
    const double b = d * (x + 1.0) * (x + 1.0);
    rhs += b;
    rhs_sq += b * b;
  }
  lhs /= draws;
  rhs /= draws;
  const double lhs_se =
      std::sqrt(std::max(0.0, lhs_sq / draws - lhs * lhs) / draws);
  const double rhs_se =
      std::sqrt(std::max(0.0, rhs_sq / draws - rhs * rhs) / draws);
  CHECK(std::abs(lhs - 22.0) <= 3.0 * lhs_se);
  CHECK(std::abs(rhs - 22.0) <= 3.0 * rhs_se);
}

TEST_CASE("ass increments trivial cases and telescoping") {
  // rho = 0: every increment is exactly ln|Omega|.
  const ModelSpec empty = preset_ising_pairwise(0.4, 0.0);
  const auto incs = ass_increments(empty, 4, 3, 11);
  REQUIRE(incs.size() == 4);
  for (const auto& inc : incs) {
    CHECK(inc.increment == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(inc.std_error <= 1e-9);
  }

  // psi = 1: also ln|Omega| per level.
  const ModelSpec unit = preset_ising_pairwise(0.0, 1.0);
  for (const auto& inc : ass_increments(unit, 3, 3, 12))
    CHECK(inc.increment == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // Telescoping: (1/n) sum of increments estimates fexact(n).
  const ModelSpec ising = preset_ising_pairwise(0.2, 1.0);
  const int n_max = 6;
  const auto ladder = ass_increments(ising, n_max, 400, 13);
  double total = 0.0, var = 0.0;
  for (const auto& inc : ladder) {
    total += inc.increment;
    var += inc.std_error * inc.std_error;
  }
  total /= n_max;
  const double ladder_se = std::sqrt(var) / n_max;
  std::vector<std::uint64_t> seeds;
  for (int s = 0; s < 300; ++s) seeds.push_back(5000 + s);
  const FreeEnergyEstimate fx = free_energy_exact(ising, n_max, seeds);
  const double se = std::sqrt(ladder_se * ladder_se + fx.std_error * fx.std_error);
  CHECK(std::abs(total - fx.value) <= 3.0 * se);
}
