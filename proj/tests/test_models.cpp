#include <doctest.h>

#include <cmath>

#include "fgl/gibbs.hpp"
#include "fgl/io.hpp"
#include "fgl/model.hpp"
#include "test_util.hpp"

using namespace fgl;
using namespace fgl::test;

TEST_CASE("zero density gives a constraint-free graph") {
  ModelSpec spec = preset_ising_pairwise(0.5, 0.0);
  const FactorGraph g = sample_factor_graph(spec, 50, 1);
  CHECK(g.constraints.empty());
  CHECK(g.n == 50);
}

TEST_CASE("sampling is deterministic in the seed") {
  const ModelSpec spec = preset_ksat(3, 1.0, 2.5);
  const FactorGraph a = sample_factor_graph(spec, 100, 1234);
  const FactorGraph b = sample_factor_graph(spec, 100, 1234);
  REQUIRE(a.constraints.size() == b.constraints.size());
  for (std::size_t i = 0; i < a.constraints.size(); ++i) {
    CHECK(a.constraints[i].wf == b.constraints[i].wf);
    CHECK(a.constraints[i].neighbors == b.constraints[i].neighbors);
  }
}

TEST_CASE("constraint count matches the Poisson rate") {
  const ModelSpec spec = preset_ising_pairwise(0.5, 1.5);
  const int n = 1000, seeds = 200;
  double sum = 0.0;
  for (int s = 0; s < seeds; ++s)
    sum += static_cast<double>(
        sample_factor_graph(spec, n, 7000 + s).constraints.size());
  const double mean = sum / seeds;
  const double se = std::sqrt(1500.0 / seeds);  // Poisson variance = mean
  CHECK(std::abs(mean - 1500.0) < 3.0 * se);
}

TEST_CASE("Poisson mean and variance check per family") {
  const ModelSpec spec = preset_ksat(2, 0.5, 1.0);  // 4 families, rho = 0.25 each
  const int n = 200, seeds = 600;
  for (std::size_t fam = 0; fam < spec.families.size(); ++fam) {
    double sum = 0.0, sum_sq = 0.0;
    for (int s = 0; s < seeds; ++s) {
      const FactorGraph g = sample_factor_graph(spec, n, 100000 + s);
      long count = 0;
      for (const auto& c : g.constraints) count += c.wf == static_cast<int>(fam);
      sum += static_cast<double>(count);
      sum_sq += static_cast<double>(count) * count;
    }
    const double lambda = n * spec.families[fam].rho;
    const double mean = sum / seeds;
    CHECK(std::abs(mean - lambda) < 3.0 * std::sqrt(lambda / seeds));
    const double var = (sum_sq - seeds * mean * mean) / (seeds - 1);
    // Sampling error of a Poisson variance estimate ~ sqrt((2l^2 + l)/k).
    const double var_se = std::sqrt((2.0 * lambda * lambda + lambda) / seeds);
    CHECK(std::abs(var - lambda) < 3.0 * var_se);
  }
}

TEST_CASE("tuple positions are uniform over variables") {
  const ModelSpec spec = preset_ksat(3, 1.0, 4.0);
  const int n = 20;
  std::vector<long> counts(n, 0);
  long total = 0;
  int seed = 0;
  while (total < 30000) {
    const FactorGraph g = sample_factor_graph(spec, n, 500000 + seed++);
    for (const auto& c : g.constraints)
      for (int v : c.neighbors) {
        ++counts[v];
        ++total;
      }
  }
  double chi2 = 0.0;
  const double expect = static_cast<double>(total) / n;
  for (long c : counts) chi2 += (c - expect) * (c - expect) / expect;
  CHECK(chi_square_p_value(chi2, n - 1) > 0.001);
}

TEST_CASE("k-SAT preset tables") {
  // k=2, c=(+,+): violated tuple is (-1,-1), the first lexicographic entry.
  const ModelSpec spec = preset_ksat(2, 0.9, 2.0);
  REQUIRE(spec.families.size() == 4);
  const auto& plus_plus = spec.families[3].wf;  // patterns ordered --, -+, +-, ++
  CHECK(plus_plus.name == "ksat_c++");
  CHECK(plus_plus.table[0] == doctest::Approx(std::exp(-0.9)).epsilon(1e-15));
  CHECK(plus_plus.table[1] == 1.0);
  CHECK(plus_plus.table[2] == 1.0);
  CHECK(plus_plus.table[3] == 1.0);
  // Density splits evenly across the 2^k sign patterns.
  for (const auto& fam : spec.families) CHECK(fam.rho == doctest::Approx(0.5));

  // beta = 0 collapses every table to 1.
  for (const auto& fam : preset_ksat(3, 0.0, 1.0).families)
    for (double v : fam.wf.table) CHECK(v == 1.0);

  CHECK(preset_ksat(3, 1.0, 1.0).families.size() == 8);
  for (const auto& fam : preset_ksat(3, 1.0, 1.0).families)
    CHECK(fam.wf.arity == 3);
}

TEST_CASE("ising grid preset") {
  const FactorGraph single = preset_ising_grid(1, 0.5);
  CHECK(single.n == 1);
  CHECK(single.constraints.empty());

  const FactorGraph box = preset_ising_grid(2, 0.5);
  CHECK(box.n == 4);
  CHECK(box.constraints.size() == 4);

  // Antiferromagnetic couplings are admitted.
  const FactorGraph anti = preset_ising_grid(2, -1.0);
  CHECK(anti.weight_functions[0].table[0] == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("preset parsing and model json round trip") {
  const ModelSpec spec = parse_preset("ksat:k=3,beta=1.0,density=2.5");
  CHECK(spec.families.size() == 8);
  CHECK(spec.families[0].wf.arity == 3);
  double total_rho = 0.0;
  for (const auto& fam : spec.families) total_rho += fam.rho;
  CHECK(total_rho == doctest::Approx(2.5));

  const ModelSpec back = model_spec_from_json(to_json(spec));
  CHECK(back.families.size() == spec.families.size());
  for (std::size_t i = 0; i < spec.families.size(); ++i) {
    CHECK(back.families[i].rho == spec.families[i].rho);
    CHECK(back.families[i].wf.table == spec.families[i].wf.table);
  }

  CHECK_THROWS(parse_preset("unknown:x=1"));
  CHECK_THROWS(parse_preset("ksat:k"));
}
