#include "fgl/bp.hpp"

#include <algorithm>
#include <cmath>

namespace fgl {

BpResult bp_run(const FactorGraph& g, double damping, double tol, int max_iters) {
  if (damping < 0.0 || damping >= 1.0)
    throw std::invalid_argument("damping must lie in [0,1)");
  const std::size_t q = g.q();
  const auto adj = g.adjacency();
  const std::size_t m = g.constraints.size();

  MessageSet ms;
  ms.to_constraint.resize(m);
  ms.to_variable.resize(m);
  for (std::size_t a = 0; a < m; ++a) {
    const std::size_t k = g.constraints[a].neighbors.size();
    ms.to_constraint[a].assign(k, uniform_point(q));
    ms.to_variable[a].assign(k, uniform_point(q));
  }

  BpResult result;
  double residual = 0.0;
  int iter = 0;
  std::vector<SimplexPoint> scratch;
  for (; iter < max_iters; ++iter) {
    residual = 0.0;
    // Constraint-to-variable messages from the current variable messages.
    for (std::size_t a = 0; a < m; ++a) {
      const auto& cons = g.constraints[a];
      const int k = static_cast<int>(cons.neighbors.size());
      for (int j = 0; j < k; ++j) {
        scratch.clear();
        for (int h = 0; h < k; ++h)
          if (h != j) scratch.push_back(ms.to_constraint[a][h]);
        SimplexPoint fresh =
            constraint_message(g.weight_functions[cons.wf], q, j, scratch);
        for (std::size_t w = 0; w < q; ++w)
          residual = std::max(residual, std::abs(fresh[w] - ms.to_variable[a][j][w]));
        ms.to_variable[a][j] = std::move(fresh);
      }
    }
    // Damped variable-to-constraint messages.
    for (std::size_t a = 0; a < m; ++a) {
      const auto& cons = g.constraints[a];
      for (std::size_t j = 0; j < cons.neighbors.size(); ++j) {
        const int v = cons.neighbors[j];
        scratch.clear();
        for (const auto& [b, h] : adj[v])
          if (!(b == static_cast<int>(a) && h == static_cast<int>(j)))
            scratch.push_back(ms.to_variable[b][h]);
        SimplexPoint fresh = combine(scratch, q);
        SimplexPoint& cur = ms.to_constraint[a][j];
        for (std::size_t w = 0; w < q; ++w) {
          const double next = damping * cur[w] + (1.0 - damping) * fresh[w];
          residual = std::max(residual, std::abs(next - cur[w]));
          cur[w] = next;
        }
      }
    }
    if (residual <= tol) {
      ++iter;
      break;
    }
  }

  result.marginals.resize(g.n);
  for (int v = 0; v < g.n; ++v) {
    scratch.clear();
    for (const auto& [a, j] : adj[v]) scratch.push_back(ms.to_variable[a][j]);
    result.marginals[v] = combine(scratch, q);
  }
  result.messages = std::move(ms);
  result.converged = residual <= tol;
  result.residual = residual;
  result.iterations = iter;
  return result;
}

std::vector<double> constraint_belief(const FactorGraph& g, const MessageSet& ms,
                                      int a) {
  const auto& cons = g.constraints[a];
  const auto& wf = g.weight_functions[cons.wf];
  const std::size_t q = g.q();
  const int k = wf.arity;
  std::vector<double> belief(wf.table.size());
  std::vector<int> tuple(k, 0);
  for (std::size_t idx = 0; idx < wf.table.size(); ++idx) {
    double w = wf.table[idx];
    for (int j = 0; j < k; ++j) w *= ms.to_constraint[a][j][tuple[j]];
    belief[idx] = w;
    for (int j = k - 1; j >= 0; --j) {
      if (++tuple[j] < static_cast<int>(q)) break;
      tuple[j] = 0;
    }
  }
  double total = 0.0;
  for (double v : belief) total += v;
  for (double& v : belief) v /= total;
  return belief;
}

namespace {

SimplexPoint upward_message(const RootedTree& t, int v, const Population& boundary,
                            Rng& rng) {
  const std::size_t q = t.alphabet.size();
  if (t.variables[v].depth == t.boundary_depth)
    return boundary.members[rng.below(boundary.members.size())];
  std::vector<SimplexPoint> incoming;
  for (int aid : t.variables[v].constraints) {
    const auto& a = t.constraints[aid];
    std::vector<SimplexPoint> child_msgs;
    for (int c : a.children) child_msgs.push_back(upward_message(t, c, boundary, rng));
    incoming.push_back(constraint_message(t.weight_functions[a.wf], q,
                                          a.parent_slot, child_msgs));
  }
  return combine(incoming, q);
}

}  // namespace

SimplexPoint tree_root_marginal(const RootedTree& t, const Population& boundary,
                                std::uint64_t seed) {
  if (boundary.members.empty())
    throw std::invalid_argument("boundary population is empty");
  Rng rng = Rng::substream(seed, "tree_boundary");
  return upward_message(t, 0, boundary, rng);
}

Population population_dynamics(const ModelSpec& spec, const Population& init,
                               int sweeps, std::uint64_t seed) {
  spec.validate();
  if (init.members.empty()) throw std::invalid_argument("empty init population");
  const std::size_t q = spec.alphabet.size();
  const std::size_t n_members = init.members.size();
  Population cur = init;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    Population next;
    next.members.resize(n_members);
    next.generation = cur.generation + 1;
    for (std::size_t i = 0; i < n_members; ++i) {
      Rng rng = Rng::substream(
          seed, "popdyn",
          static_cast<std::uint64_t>(cur.generation) * n_members + i);
      std::vector<SimplexPoint> incoming;
      for (const auto& fam : spec.families) {
        const int k = fam.wf.arity;
        const long d = rng.poisson(static_cast<double>(k) * fam.rho);
        for (long c = 0; c < d; ++c) {
          const int slot = static_cast<int>(rng.below(k));
          std::vector<SimplexPoint> msgs;
          for (int j = 0; j < k - 1; ++j)
            msgs.push_back(cur.members[rng.below(n_members)]);
          incoming.push_back(constraint_message(fam.wf, q, slot, msgs));
        }
      }
      next.members[i] = combine(incoming, q);
    }
    cur = std::move(next);
  }
  return cur;
}

MartingaleResidual martingale_residual(const ModelSpec& spec, int ell,
                                       const Probe& probe,
                                       const Population& boundary, long samples,
                                       std::uint64_t seed) {
  if (ell < 0) throw std::invalid_argument("ell must be >= 0");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (long i = 0; i < samples; ++i) {
    const std::uint64_t tree_seed = Rng::substream(seed, "mart_tree", i).next_u64();
    RootedTree deep = sample_gw_tree(spec, ell + 1, tree_seed);
    RootedTree shallow = truncate(deep, ell);
    const SimplexPoint x_deep = tree_root_marginal(
        deep, boundary, Rng::substream(seed, "mart_tau1", i).next_u64());
    const SimplexPoint x_shallow = tree_root_marginal(
        shallow, boundary, Rng::substream(seed, "mart_tau0", i).next_u64());
    const double d = probe(x_deep) - probe(x_shallow);
    sum += d;
    sum_sq += d * d;
  }
  MartingaleResidual out;
  out.samples = samples;
  out.value = sum / static_cast<double>(samples);
  const double var =
      std::max(0.0, sum_sq / samples - out.value * out.value);
  out.std_error = std::sqrt(var / static_cast<double>(samples));
  return out;
}

}  // namespace fgl
