#include "fgl/bethe.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

#include "fgl/gibbs.hpp"

namespace fgl {

namespace {

// Welford accumulation: stable when all samples coincide.
struct MeanSe {
  double mean_ = 0.0, m2_ = 0.0;
  long count = 0;
  void add(double v) {
    ++count;
    const double delta = v - mean_;
    mean_ += delta / static_cast<double>(count);
    m2_ += delta * (v - mean_);
  }
  double mean() const { return mean_; }
  double se() const {
    if (count < 2) return 0.0;
    return std::sqrt(m2_ / (count - 1) / static_cast<double>(count));
  }
};

SimplexPoint draw_member(const Population& boundary, Rng& rng) {
  return boundary.members[rng.below(boundary.members.size())];
}

}  // namespace

BetheTerms bethe_local_terms(const RootedTree& star,
                             const std::vector<SimplexPoint>& incoming) {
  if (star.depth() > 1)
    throw std::invalid_argument("bethe_local_terms expects a depth <= 1 star");
  const std::size_t q = star.alphabet.size();
  const auto& root_cons = star.variables[0].constraints;
  std::size_t expected = 0;
  for (int aid : root_cons)
    expected += star.weight_functions[star.constraints[aid].wf].arity - 1;
  if (incoming.size() != expected)
    throw std::invalid_argument("one incoming message per leaf slot required");

  BetheTerms terms;
  std::vector<SimplexPoint> eta_hat;
  std::vector<std::vector<SimplexPoint>> leaf_msgs;
  std::size_t pos = 0;
  for (int aid : root_cons) {
    const auto& a = star.constraints[aid];
    const auto& wf = star.weight_functions[a.wf];
    std::vector<SimplexPoint> msgs(incoming.begin() + pos,
                                   incoming.begin() + pos + (wf.arity - 1));
    pos += wf.arity - 1;
    eta_hat.push_back(constraint_message(wf, q, a.parent_slot, msgs));
    leaf_msgs.push_back(std::move(msgs));
    terms.arity.push_back(wf.arity);
  }

  double phi_arg = 0.0;
  for (std::size_t w = 0; w < q; ++w) {
    double prod = 1.0;
    for (const auto& h : eta_hat) prod *= h[w];
    phi_arg += prod;
  }
  assert(phi_arg > 0.0);
  terms.phi = std::log(phi_arg);

  for (std::size_t ai = 0; ai < eta_hat.size(); ++ai) {
    std::vector<SimplexPoint> others;
    for (std::size_t bi = 0; bi < eta_hat.size(); ++bi)
      if (bi != ai) others.push_back(eta_hat[bi]);
    const SimplexPoint eta_tilde = combine(others, q);

    const auto& a = star.constraints[root_cons[ai]];
    const auto& wf = star.weight_functions[a.wf];
    const int k = wf.arity;
    double hat_arg = 0.0;
    std::vector<int> tuple(k, 0);
    for (std::size_t idx = 0; idx < wf.table.size(); ++idx) {
      double w = wf.table[idx] * eta_tilde[tuple[a.parent_slot]];
      int leaf = 0;
      for (int s = 0; s < k; ++s) {
        if (s == a.parent_slot) continue;
        w *= leaf_msgs[ai][leaf++][tuple[s]];
      }
      hat_arg += w;
      for (int s = k - 1; s >= 0; --s) {
        if (++tuple[s] < static_cast<int>(q)) break;
        tuple[s] = 0;
      }
    }
    assert(hat_arg > 0.0);
    terms.hat_phi.push_back(std::log(hat_arg));

    double tilde_arg = 0.0;
    for (std::size_t w = 0; w < q; ++w) tilde_arg += eta_tilde[w] * eta_hat[ai][w];
    assert(tilde_arg > 0.0);
    terms.tilde_phi.push_back(std::log(tilde_arg));
  }
  return terms;
}

FreeEnergyEstimate bethe_free_energy(const ModelSpec& spec,
                                     const Population& boundary, long samples,
                                     std::uint64_t seed) {
  spec.validate();
  if (boundary.members.empty()) throw std::invalid_argument("empty boundary");
  MeanSe acc;
  for (long s = 0; s < samples; ++s) {
    const RootedTree star =
        sample_gw_tree(spec, 1, Rng::substream(seed, "bethe_star", s).next_u64());
    Rng rng = Rng::substream(seed, "bethe_eta", s);
    std::vector<SimplexPoint> incoming;
    for (int aid : star.variables[0].constraints) {
      const int k = star.weight_functions[star.constraints[aid].wf].arity;
      for (int j = 0; j < k - 1; ++j) incoming.push_back(draw_member(boundary, rng));
    }
    acc.add(bethe_local_terms(star, incoming).total());
  }
  FreeEnergyEstimate est;
  est.value = acc.mean();
  est.std_error = acc.se();
  est.method = "bethe_tree";
  est.samples = samples;
  return est;
}

namespace {

// Fully combined cavity message: Po(rho) constraints per (family, slot),
// each fed k-1 fresh boundary draws.
SimplexPoint draw_combined_eta(const ModelSpec& spec, const Population& boundary,
                               Rng& rng) {
  const std::size_t q = spec.alphabet.size();
  std::vector<SimplexPoint> incoming;
  for (const auto& fam : spec.families) {
    const int k = fam.wf.arity;
    for (int j = 0; j < k; ++j) {
      const long d = rng.poisson(fam.rho);
      for (long c = 0; c < d; ++c) {
        std::vector<SimplexPoint> msgs;
        for (int h = 0; h < k - 1; ++h) msgs.push_back(draw_member(boundary, rng));
        incoming.push_back(constraint_message(fam.wf, q, j, msgs));
      }
    }
  }
  return combine(incoming, q);
}

SimplexPoint draw_eta_hat(const ModelSpec::Family& fam, std::size_t q, int slot,
                          const Population& boundary, Rng& rng) {
  std::vector<SimplexPoint> msgs;
  for (int h = 0; h < fam.wf.arity - 1; ++h) msgs.push_back(draw_member(boundary, rng));
  return constraint_message(fam.wf, q, slot, msgs);
}

}  // namespace

FreeEnergyEstimate poissonized_bethe(const ModelSpec& spec,
                                     const Population& boundary, long samples,
                                     std::uint64_t seed) {
  spec.validate();
  if (boundary.members.empty()) throw std::invalid_argument("empty boundary");
  const std::size_t q = spec.alphabet.size();
  MeanSe acc;
  for (long s = 0; s < samples; ++s) {
    Rng rng = Rng::substream(seed, "poissonized", s);
    // Root term: product over per-slot Po(rho) sampled messages.
    std::vector<SimplexPoint> root_msgs;
    for (const auto& fam : spec.families) {
      const int k = fam.wf.arity;
      for (int j = 0; j < k; ++j) {
        const long d = rng.poisson(fam.rho);
        for (long c = 0; c < d; ++c)
          root_msgs.push_back(draw_eta_hat(fam, q, j, boundary, rng));
      }
    }
    double phi_arg = 0.0;
    for (std::size_t w = 0; w < q; ++w) {
      double prod = 1.0;
      for (const auto& m : root_msgs) prod *= m[w];
      phi_arg += prod;
    }
    assert(phi_arg > 0.0);
    double value = std::log(phi_arg);

    for (const auto& fam : spec.families) {
      if (fam.rho == 0.0) continue;
      const int k = fam.wf.arity;
      // hat term: k independent fully combined messages.
      std::vector<SimplexPoint> etas;
      for (int h = 0; h < k; ++h) etas.push_back(draw_combined_eta(spec, boundary, rng));
      double hat_arg = 0.0;
      std::vector<int> tuple(k, 0);
      for (std::size_t idx = 0; idx < fam.wf.table.size(); ++idx) {
        double w = fam.wf.table[idx];
        for (int h = 0; h < k; ++h) w *= etas[h][tuple[h]];
        hat_arg += w;
        for (int h = k - 1; h >= 0; --h) {
          if (++tuple[h] < static_cast<int>(q)) break;
          tuple[h] = 0;
        }
      }
      assert(hat_arg > 0.0);
      value += fam.rho * std::log(hat_arg);
      // tilde terms, one per slot.
      for (int j = 0; j < k; ++j) {
        const SimplexPoint eta = draw_combined_eta(spec, boundary, rng);
        const SimplexPoint eta_hat = draw_eta_hat(fam, q, j, boundary, rng);
        double tilde_arg = 0.0;
        for (std::size_t w = 0; w < q; ++w) tilde_arg += eta[w] * eta_hat[w];
        assert(tilde_arg > 0.0);
        value -= fam.rho * std::log(tilde_arg);
      }
    }
    acc.add(value);
  }
  FreeEnergyEstimate est;
  est.value = acc.mean();
  est.std_error = acc.se();
  est.method = "bethe_poissonized";
  est.samples = samples;
  return est;
}

FreeEnergyEstimate free_energy_exact(const ModelSpec& spec, int n,
                                     const std::vector<std::uint64_t>& seeds,
                                     std::uint64_t cap) {
  spec.validate();
  MeanSe acc;
  for (std::uint64_t s : seeds) {
    const FactorGraph g = sample_factor_graph(spec, n, s);
    acc.add(partition_function(g, cap).log_z / static_cast<double>(n));
  }
  FreeEnergyEstimate est;
  est.value = acc.mean();
  est.std_error = acc.se();
  est.method = "exact_enumeration";
  est.samples = static_cast<long>(seeds.size());
  return est;
}

namespace {

// Uniform tuple over [n+1]^k conditioned to contain the new variable (id n):
// pick the slot pattern occupied by the new variable with probability
// proportional to n^(k - |pattern|), fill the rest uniformly from [n].
std::vector<int> conditioned_tuple(int n, int k, Rng& rng) {
  const int patterns = (1 << k) - 1;
  std::vector<double> weight(patterns + 1, 0.0);
  double total = 0.0;
  for (int p = 1; p <= patterns; ++p) {
    const int free_slots = k - std::popcount(static_cast<unsigned>(p));
    weight[p] = std::pow(static_cast<double>(n), free_slots);
    total += weight[p];
  }
  double u = rng.next_double() * total;
  int pick = patterns;
  for (int p = 1; p <= patterns; ++p) {
    u -= weight[p];
    if (u < 0.0) {
      pick = p;
      break;
    }
  }
  std::vector<int> tuple(k);
  for (int j = 0; j < k; ++j)
    tuple[j] = ((pick >> j) & 1) ? n : static_cast<int>(rng.below(n));
  return tuple;
}

}  // namespace

std::vector<AssIncrement> ass_increments(const ModelSpec& spec, int n_max,
                                         int seeds_per_n, std::uint64_t seed,
                                         std::uint64_t cap) {
  spec.validate();
  std::vector<AssIncrement> out;
  for (int n = 0; n < n_max; ++n) {
    MeanSe inc, z31, z21;
    for (int s = 0; s < seeds_per_n; ++s) {
      Rng rng = Rng::substream(seed, "ass",
                               static_cast<std::uint64_t>(n) * seeds_per_n + s);
      // G': exactly G_{n+1} with the new variable and its constraints removed.
      FactorGraph g1;
      g1.alphabet = spec.alphabet;
      g1.n = n;
      for (const auto& fam : spec.families) g1.weight_functions.push_back(fam.wf);
      for (std::size_t fi = 0; fi < spec.families.size(); ++fi) {
        const auto& fam = spec.families[fi];
        const int k = fam.wf.arity;
        const double keep = std::pow(static_cast<double>(n) / (n + 1), k);
        const long m1 = rng.poisson(fam.rho * (n + 1) * keep);
        for (long c = 0; c < m1; ++c) {
          FactorGraph::Constraint cons;
          cons.wf = static_cast<int>(fi);
          cons.neighbors.resize(k);
          for (int j = 0; j < k; ++j)
            cons.neighbors[j] = static_cast<int>(rng.below(n));
          g1.constraints.push_back(std::move(cons));
        }
      }
      // G'': G' plus the deficit constraints; distributed exactly as G_n.
      FactorGraph g2 = g1;
      for (std::size_t fi = 0; fi < spec.families.size(); ++fi) {
        const auto& fam = spec.families[fi];
        const int k = fam.wf.arity;
        const double keep = std::pow(static_cast<double>(n) / (n + 1), k);
        const double rate = fam.rho * (n - (n + 1) * keep);
        const long m2 = rng.poisson(std::max(rate, 0.0));
        for (long c = 0; c < m2; ++c) {
          FactorGraph::Constraint cons;
          cons.wf = static_cast<int>(fi);
          cons.neighbors.resize(k);
          for (int j = 0; j < k; ++j)
            cons.neighbors[j] = static_cast<int>(rng.below(n));
          g2.constraints.push_back(std::move(cons));
        }
      }
      // G''': G' plus variable x_{n+1} and its incident constraints;
      // distributed exactly as G_{n+1}.
      FactorGraph g3 = g1;
      g3.n = n + 1;
      for (std::size_t fi = 0; fi < spec.families.size(); ++fi) {
        const auto& fam = spec.families[fi];
        const int k = fam.wf.arity;
        const double keep = std::pow(static_cast<double>(n) / (n + 1), k);
        const long m3 = rng.poisson(fam.rho * (n + 1) * (1.0 - keep));
        for (long c = 0; c < m3; ++c) {
          FactorGraph::Constraint cons;
          cons.wf = static_cast<int>(fi);
          cons.neighbors = conditioned_tuple(n, k, rng);
          g3.constraints.push_back(std::move(cons));
        }
      }
      const double lz1 = partition_function(g1, cap).log_z;
      const double lz2 = partition_function(g2, cap).log_z;
      const double lz3 = partition_function(g3, cap).log_z;
      inc.add(lz3 - lz2);
      z31.add(lz3 - lz1);
      z21.add(lz2 - lz1);
    }
    AssIncrement rec;
    rec.n = n;
    rec.increment = inc.mean();
    rec.std_error = inc.se();
    rec.ln_z31 = z31.mean();
    rec.ln_z31_se = z31.se();
    rec.ln_z21 = z21.mean();
    rec.ln_z21_se = z21.se();
    rec.samples = seeds_per_n;
    out.push_back(rec);
  }
  return out;
}

}  // namespace fgl
