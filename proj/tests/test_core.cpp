#include <doctest.h>

#include <cmath>

#include "fgl/gibbs.hpp"
#include "fgl/io.hpp"
#include "fgl/model.hpp"
#include "test_util.hpp"

using namespace fgl;
using namespace fgl::test;

TEST_CASE("gibbs weight basics") {
  // Constraint-free graph: empty product.
  FactorGraph free3 = free_graph(3);
  CHECK(gibbs_weight(free3, {0, 1, 0}) == doctest::Approx(1.0).epsilon(1e-15));

  // Single Ising edge at beta = 0.5, aligned spins.
  FactorGraph edge = single_ising_edge(0.5);
  CHECK(gibbs_weight(edge, {1, 1}) == doctest::Approx(std::exp(0.5)).epsilon(1e-14));
  CHECK(gibbs_weight(edge, {0, 1}) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));

  // k-SAT clause with all literals violated.
  const ModelSpec ksat = preset_ksat(3, 1.0, 1.0);
  FactorGraph g;
  g.alphabet = ksat.alphabet;
  g.weight_functions.push_back(ksat.families[0].wf);  // c = (-,-,-)
  g.n = 3;
  g.constraints.push_back({0, {0, 1, 2}});
  // c=(-1,-1,-1) is violated by x=(+1,+1,+1).
  CHECK(gibbs_weight(g, {1, 1, 1}) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(gibbs_weight(g, {0, 1, 1}) == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS(gibbs_weight(edge, {0}));
}

TEST_CASE("partition function") {
  FactorGraph free3 = free_graph(3);
  const auto pf = partition_function(free3);
  CHECK(*pf.z == doctest::Approx(8.0).epsilon(1e-13));

  FactorGraph edge = single_ising_edge(0.5);
  const double expect = 2.0 * std::exp(0.5) + 2.0 * std::exp(-0.5);
  CHECK(*partition_function(edge).z == doctest::Approx(expect).epsilon(1e-13));

  // All psi identically 1 collapses to |Omega|^n.
  FactorGraph ones = free_graph(4);
  WeightFunction unit{"unit", 2, {1.0, 1.0, 1.0, 1.0}};
  ones.weight_functions.push_back(unit);
  ones.constraints.push_back({0, {0, 1}});
  ones.constraints.push_back({0, {2, 3}});
  CHECK(*partition_function(ones).z == doctest::Approx(16.0).epsilon(1e-13));

  FactorGraph big = free_graph(40);
  CHECK_THROWS_AS(partition_function(big), StateCapExceeded);
}

TEST_CASE("log-sum partition function matches the direct product-sum oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const ModelSpec spec = preset_ising_pairwise(0.2 + 0.1 * (trial % 5), 1.5);
    const FactorGraph g = sample_factor_graph(spec, 8, rng.next_u64());
    const double direct = direct_partition_function(g);
    CHECK(partition_function(g).log_z ==
          doctest::Approx(std::log(direct)).epsilon(1e-12));
  }
}

TEST_CASE("gibbs marginal") {
  FactorGraph ones = free_graph(3);
  CHECK(gibbs_marginal(ones, {0})[0] == doctest::Approx(0.5).epsilon(1e-13));

  FactorGraph edge = single_ising_edge(0.5);
  const auto single = gibbs_marginal(edge, {0});
  CHECK(single[0] == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(single[1] == doctest::Approx(0.5).epsilon(1e-13));

  const auto joint = gibbs_marginal(edge, {0, 1});
  const double z = 2.0 * std::exp(0.5) + 2.0 * std::exp(-0.5);
  CHECK(joint[0] == doctest::Approx(std::exp(0.5) / z).epsilon(1e-12));
  CHECK(joint[1] == doctest::Approx(std::exp(-0.5) / z).epsilon(1e-12));
  CHECK(joint[2] == doctest::Approx(std::exp(-0.5) / z).epsilon(1e-12));
  CHECK(joint[3] == doctest::Approx(std::exp(0.5) / z).epsilon(1e-12));

  CHECK_THROWS(gibbs_marginal(edge, {5}));
}

TEST_CASE("full joint marginal equals gibbs weight over Z") {
  const ModelSpec spec = preset_ising_pairwise(0.7, 1.0);
  const FactorGraph g = sample_factor_graph(spec, 5, 99);
  std::vector<int> all(g.n);
  for (int i = 0; i < g.n; ++i) all[i] = i;
  const auto joint = gibbs_marginal(g, all);
  const double log_z = partition_function(g).log_z;
  Assignment sigma(g.n, 0);
  for (std::size_t s = 0; s < joint.size(); ++s) {
    CHECK(joint[s] ==
          doctest::Approx(std::exp(log_gibbs_weight(g, sigma) - log_z))
              .epsilon(1e-11));
    for (int i = g.n - 1; i >= 0; --i) {
      if (++sigma[i] < 2) break;
      sigma[i] = 0;
    }
  }
}

TEST_CASE("exact sampling") {
  // Uniform single spin.
  FactorGraph g = free_graph(1);
  const auto samples = gibbs_sample(g, 10000, 42);
  long ones = 0;
  for (const auto& s : samples) ones += s[0];
  const double freq = static_cast<double>(ones) / 10000.0;
  CHECK(std::abs(freq - 0.5) < 3.0 * 0.5 / 100.0);

  // Determinism.
  CHECK(gibbs_sample(g, 50, 7) == gibbs_sample(g, 50, 7));

  // Aligned-spin probability for a strong Ising edge.
  FactorGraph edge = single_ising_edge(2.0);
  const auto pair_samples = gibbs_sample(edge, 10000, 5);
  long aligned = 0;
  for (const auto& s : pair_samples) aligned += s[0] == s[1];
  const double p = std::exp(2.0) / (std::exp(2.0) + std::exp(-2.0));
  const double se = std::sqrt(p * (1 - p) / 10000.0);
  CHECK(std::abs(aligned / 10000.0 - p) < 3.0 * se);
}

TEST_CASE("conditional marginal") {
  FactorGraph edge = single_ising_edge(0.5);
  // No clamps: same as the plain marginal.
  const auto uncond = conditional_marginal(edge, 0, {});
  CHECK(uncond[0] == doctest::Approx(0.5).epsilon(1e-13));

  // Neighbor clamped to +1.
  const auto cond = conditional_marginal(edge, 0, {{1, 1}});
  const double z = std::exp(0.5) + std::exp(-0.5);
  CHECK(cond[1] == doctest::Approx(std::exp(0.5) / z).epsilon(1e-13));
  CHECK(cond[0] == doctest::Approx(std::exp(-0.5) / z).epsilon(1e-13));

  // Clamping in a different component changes nothing.
  FactorGraph two = single_ising_edge(0.5);
  two.n = 3;  // variable 2 is isolated
  const auto with_far = conditional_marginal(two, 0, {{2, 0}});
  const auto without = conditional_marginal(two, 0, {});
  for (int w = 0; w < 2; ++w)
    CHECK(with_far[w] == doctest::Approx(without[w]).epsilon(1e-13));

  CHECK_THROWS(conditional_marginal(edge, 0, {{0, 1}}));
}

TEST_CASE("conditional marginal obeys the law of total probability") {
  const ModelSpec spec = preset_ising_pairwise(0.4, 1.2);
  const FactorGraph g = sample_factor_graph(spec, 6, 3);
  // Condition variable 0 on the pair (1, 2).
  const auto pair_joint = gibbs_marginal(g, {1, 2});
  const auto target = gibbs_marginal(g, {0});
  std::vector<double> mixed(2, 0.0);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const auto cond = conditional_marginal(g, 0, {{1, a}, {2, b}});
      for (int w = 0; w < 2; ++w) mixed[w] += pair_joint[a * 2 + b] * cond[w];
    }
  for (int w = 0; w < 2; ++w)
    CHECK(mixed[w] == doctest::Approx(target[w]).epsilon(1e-10));
}

TEST_CASE("remove variable") {
  // Isolated variable: constraints survive.
  FactorGraph two = single_ising_edge(0.3);
  two.n = 3;
  const auto removed = remove_variable(two, 2);
  CHECK(removed.graph.n == 2);
  CHECK(removed.graph.constraints.size() == 1);
  CHECK(removed.old_to_new[2] == -1);

  // Removing an endpoint drops the edge.
  const auto endpoint = remove_variable(two, 0);
  CHECK(endpoint.graph.constraints.empty());
  CHECK(endpoint.graph.n == 2);
  CHECK(endpoint.old_to_new[1] == 0);

  // Star of three constraints at the hub: all removed.
  FactorGraph star = free_graph(4);
  star.alphabet = SpinAlphabet::ising();
  WeightFunction wf{"w", 2, {1.0, 2.0, 3.0, 4.0}};
  star.weight_functions.push_back(wf);
  star.constraints.push_back({0, {0, 1}});
  star.constraints.push_back({0, {0, 2}});
  star.constraints.push_back({0, {3, 0}});
  CHECK(remove_variable(star, 0).graph.constraints.empty());

  CHECK_THROWS(remove_variable(two, 9));
}

TEST_CASE("factor graph json round trip is bit exact") {
  const ModelSpec spec = preset_ksat(2, 0.773612953, 1.5);
  const FactorGraph g = sample_factor_graph(spec, 7, 11);
  const FactorGraph back = factor_graph_from_json(to_json(g));
  REQUIRE(back.weight_functions.size() == g.weight_functions.size());
  for (std::size_t w = 0; w < g.weight_functions.size(); ++w)
    for (std::size_t i = 0; i < g.weight_functions[w].table.size(); ++i)
      CHECK(back.weight_functions[w].table[i] == g.weight_functions[w].table[i]);
  CHECK(back.n == g.n);
  REQUIRE(back.constraints.size() == g.constraints.size());
  for (std::size_t c = 0; c < g.constraints.size(); ++c)
    CHECK(back.constraints[c].neighbors == g.constraints[c].neighbors);
}
