#include <doctest.h>

#include <cmath>

#include "fgl/bp.hpp"
#include "fgl/gibbs.hpp"
#include "fgl/model.hpp"
#include "fgl/transport.hpp"
#include "test_util.hpp"

using namespace fgl;
using namespace fgl::test;

TEST_CASE("constraint message") {
  // psi identically 1: uniform output.
  WeightFunction unit{"unit", 2, {1.0, 1.0, 1.0, 1.0}};
  std::vector<SimplexPoint> incoming{{0.3, 0.7}};
  const SimplexPoint out = constraint_message(unit, 2, 0, incoming);
  CHECK(out[0] == doctest::Approx(0.5).epsilon(1e-14));

  // Ising edge, point mass on +1 coming in: (e^-b, e^b) normalized.
  const double beta = 0.8;
  WeightFunction ising{"ising",
                       2,
                       {std::exp(beta), std::exp(-beta), std::exp(-beta),
                        std::exp(beta)}};
  std::vector<SimplexPoint> plus{point_mass(2, 1)};
  const SimplexPoint msg = constraint_message(ising, 2, 0, plus);
  const double z = std::exp(beta) + std::exp(-beta);
  CHECK(msg[0] == doctest::Approx(std::exp(-beta) / z).epsilon(1e-14));
  CHECK(msg[1] == doctest::Approx(std::exp(beta) / z).epsilon(1e-14));

  // Uniform incoming stays uniform by the +/- symmetry.
  std::vector<SimplexPoint> unif{uniform_point(2)};
  const SimplexPoint sym = constraint_message(ising, 2, 1, unif);
  CHECK(sym[0] == doctest::Approx(0.5).epsilon(1e-14));

  CHECK_THROWS(constraint_message(ising, 2, 2, plus));
  CHECK_THROWS(constraint_message(ising, 2, 0, {}));
}

TEST_CASE("combine") {
  CHECK(combine({}, 3)[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  std::vector<SimplexPoint> one{{0.2, 0.8}};
  const SimplexPoint same = combine(one, 2);
  CHECK(same[0] == doctest::Approx(0.2).epsilon(1e-13));

  std::vector<SimplexPoint> two{{0.8, 0.2}, {0.8, 0.2}};
  const SimplexPoint sq = combine(two, 2);
  CHECK(sq[0] == doctest::Approx(0.64 / 0.68).epsilon(1e-13));
  CHECK(sq[1] == doctest::Approx(0.04 / 0.68).epsilon(1e-13));
}

TEST_CASE("bp on trivial graphs") {
  // psi = 1 everywhere: converges in one sweep to uniform.
  FactorGraph ones = free_graph(3);
  ones.weight_functions.push_back(WeightFunction{"unit", 2, {1, 1, 1, 1}});
  ones.constraints.push_back({0, {0, 1}});
  ones.constraints.push_back({0, {1, 2}});
  const BpResult r = bp_run(ones);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  for (const auto& m : r.marginals) CHECK(m[0] == doctest::Approx(0.5));
}

TEST_CASE("bp reproduces the single-edge pair marginal exactly") {
  const FactorGraph edge = single_ising_edge(0.9);
  const BpResult r = bp_run(edge);
  REQUIRE(r.converged);
  const auto belief = constraint_belief(edge, r.messages, 0);
  const auto exact = gibbs_marginal(edge, {0, 1});
  for (int i = 0; i < 4; ++i)
    CHECK(belief[i] == doctest::Approx(exact[i]).epsilon(1e-10));
}

TEST_CASE("bp is exact on random GW trees") {
  // Mixed Ising / 2-SAT weights.
  ModelSpec spec = preset_ising_pairwise(0.6, 0.5);
  for (auto& fam : preset_ksat(2, 1.2, 0.8).families)
    spec.families.push_back(fam);
  int done = 0;
  std::uint64_t seed = 0;
  while (done < 100) {
    const RootedTree t = sample_gw_tree(spec, 3, 123456 + seed++);
    if (t.node_count() > 30 || t.variables.size() > 14) continue;
    const FactorGraph g = tree_to_factor_graph(t);
    const BpResult r = bp_run(g, 0.0, 1e-14, 2000);
    const auto exact = gibbs_all_marginals(g);
    double worst = 0.0;
    for (int v = 0; v < g.n; ++v)
      worst = std::max(worst, tv_distance(r.marginals[v], exact[v]));
    REQUIRE(worst <= 1e-10);
    ++done;
  }
}

TEST_CASE("bp messages stay strictly positive") {
  const ModelSpec spec = preset_ksat(3, 2.0, 1.5);
  const FactorGraph g = sample_factor_graph(spec, 12, 5);
  const BpResult r = bp_run(g, 0.5, 1e-8, 500);
  for (const auto& cons : r.messages.to_variable)
    for (const auto& msg : cons)
      for (double v : msg) CHECK(v > 0.0);
}

TEST_CASE("tree root marginal") {
  const ModelSpec spec = preset_ising_pairwise(0.5, 1.0);
  // Root-only tree: one boundary draw.
  RootedTree root_only = sample_gw_tree(spec, 0, 3);
  Population boundary;
  boundary.members.push_back({0.9, 0.1});
  const SimplexPoint draw = tree_root_marginal(root_only, boundary, 7);
  CHECK(draw[0] == doctest::Approx(0.9));

  // All-unit tree gives uniform.
  ModelSpec unit_spec = preset_ising_pairwise(0.0, 1.0);
  const RootedTree unit_tree = sample_gw_tree(unit_spec, 2, 5);
  Population unit_boundary = Population::uniform_init(4, 2);
  const SimplexPoint unif = tree_root_marginal(unit_tree, unit_boundary, 3);
  CHECK(unif[0] == doctest::Approx(0.5).epsilon(1e-12));

  // Depth-1 Ising star with point-mass boundary equals the clamped
  // conditional marginal.
  const double beta = 0.7;
  const ModelSpec star_spec = preset_ising_pairwise(beta, 1.0);
  RootedTree star;
  std::uint64_t s = 0;
  do {
    star = sample_gw_tree(star_spec, 1, 1000 + s++);
  } while (star.constraints.size() < 2);
  Population plus;
  plus.members.push_back(point_mass(2, 1));
  const SimplexPoint bp_root = tree_root_marginal(star, plus, 11);
  const FactorGraph g = tree_to_factor_graph(star);
  std::vector<Clamp> clamps;
  for (std::size_t v = 1; v < star.variables.size(); ++v)
    clamps.push_back({static_cast<int>(v), 1});
  const auto cond = conditional_marginal(g, 0, clamps);
  CHECK(bp_root[0] == doctest::Approx(cond[0]).epsilon(1e-11));
  CHECK(bp_root[1] == doctest::Approx(cond[1]).epsilon(1e-11));
}

TEST_CASE("population dynamics") {
  // rho = 0: one sweep maps anything to all-uniform.
  const ModelSpec empty_spec = preset_ising_pairwise(0.5, 0.0);
  Population init = Population::jittered_init(50, 2, 0.5, 9);
  const Population out = population_dynamics(empty_spec, init, 1, 4);
  for (const auto& m : out.members) CHECK(m[0] == doctest::Approx(0.5));

  // psi = 1: same collapse.
  const ModelSpec unit_spec = preset_ising_pairwise(0.0, 1.0);
  const Population out2 = population_dynamics(unit_spec, init, 1, 4);
  for (const auto& m : out2.members)
    CHECK(m[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("subcritical ising population contracts and stays unmagnetized") {
  const ModelSpec spec = preset_ising_pairwise(0.2, 1.0);
  Population init = Population::jittered_init(400, 2, 2.0, 17);
  const Population at30 = population_dynamics(spec, init, 30, 123);
  const Population at40 = population_dynamics(spec, at30, 10, 999);
  double mag = 0.0;
  for (const auto& m : at40.members) mag += m[1] - m[0];
  mag /= static_cast<double>(at40.members.size());
  double sd = 0.0;
  for (const auto& m : at40.members) {
    const double d = (m[1] - m[0]) - mag;
    sd += d * d;
  }
  sd = std::sqrt(sd / (at40.members.size() - 1.0));
  CHECK(std::abs(mag) <= 3.0 * sd / std::sqrt(400.0) + 1e-9);
  CHECK(wasserstein_d1(at30, at40) <= 0.01);
}

TEST_CASE("martingale residual") {
  const ModelSpec spec = preset_ising_pairwise(0.2, 1.0);
  Population uniform_boundary = Population::uniform_init(1, 2);
  const Probe const_probe{Probe::kEtaOmega, 1};

  // rho = 0 model: exactly zero.
  const ModelSpec empty_spec = preset_ising_pairwise(0.3, 0.0);
  const auto zero = martingale_residual(empty_spec, 0, const_probe,
                                        uniform_boundary, 2000, 21);
  CHECK(zero.value == doctest::Approx(0.0).epsilon(1e-15));

  // Uniform point mass is the exact fixed point of the +/- symmetric
  // Ising recursion, so the residual vanishes identically.
  for (int ell = 0; ell <= 2; ++ell) {
    const auto r =
        martingale_residual(spec, ell, const_probe, uniform_boundary, 3000, 31);
    CHECK(std::abs(r.value) <= 3.0 * r.std_error + 1e-12);
  }
}
