#include "fgl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <unordered_map>

#include "fgl/gibbs.hpp"
#include "fgl/rng.hpp"

namespace fgl {

namespace {

void finish(DiagnosticResult& r) {
  r.samples = static_cast<long>(r.per_sample.size());
  double sum = 0.0, sum_sq = 0.0;
  for (double v : r.per_sample) {
    sum += v;
    sum_sq += v * v;
  }
  r.statistic = sum / static_cast<double>(r.samples);
  if (r.samples > 1) {
    const double var = std::max(
        0.0, (sum_sq - r.samples * r.statistic * r.statistic) / (r.samples - 1));
    r.std_error = std::sqrt(var / static_cast<double>(r.samples));
  }
}

}  // namespace

DiagnosticResult factorization_statistic(const FactorGraph& g, int k, int tuples,
                                         std::uint64_t seed, std::uint64_t cap) {
  if (k < 1 || k > g.n) throw std::invalid_argument("k out of range");
  const std::size_t q = g.q();
  const auto singles = gibbs_all_marginals(g, cap);
  Rng rng = Rng::substream(seed, "factorization");
  DiagnosticResult result;
  std::vector<int> tuple(k);
  for (int t = 0; t < tuples; ++t) {
    // Distinct coordinates, uniformly.
    std::vector<int> pool(g.n);
    for (int i = 0; i < g.n; ++i) pool[i] = i;
    for (int i = 0; i < k; ++i) {
      const int pick = i + static_cast<int>(rng.below(g.n - i));
      std::swap(pool[i], pool[pick]);
      tuple[i] = pool[i];
    }
    const auto joint = gibbs_marginal(g, tuple, cap);
    double tv = 0.0;
    std::vector<int> spins(k, 0);
    for (std::size_t idx = 0; idx < joint.size(); ++idx) {
      double prod = 1.0;
      for (int i = 0; i < k; ++i) prod *= singles[tuple[i]][spins[i]];
      tv += std::abs(joint[idx] - prod);
      for (int i = k - 1; i >= 0; --i) {
        if (++spins[i] < static_cast<int>(q)) break;
        spins[i] = 0;
      }
    }
    result.per_sample.push_back(0.5 * tv);
  }
  finish(result);
  return result;
}

namespace {

// Variable-node graph distances (constraints count as one hop between
// variables, so "distance" below is in variable steps; the factor-graph
// distance is twice this).
std::vector<int> variable_distances(const FactorGraph& g, int root) {
  const auto adj = g.adjacency();
  std::vector<int> dist(g.n, -1);
  dist[root] = 0;
  std::deque<int> queue{root};
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (const auto& [a, slot] : adj[v])
      for (int w : g.constraints[a].neighbors)
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
  }
  return dist;
}

}  // namespace

DiagnosticResult nonreconstruction_statistic(const FactorGraph& g, int root,
                                             int ell, long samples,
                                             std::uint64_t seed,
                                             std::uint64_t cap) {
  if (root < 0 || root >= g.n) throw std::invalid_argument("unknown root");
  const std::size_t q = g.q();
  const auto dist = variable_distances(g, root);
  std::vector<int> boundary;
  for (int v = 0; v < g.n; ++v)
    if (dist[v] < 0 || dist[v] > ell) boundary.push_back(v);

  DiagnosticResult result;
  if (boundary.empty()) {
    result.per_sample.assign(samples, 0.0);
    finish(result);
    return result;
  }
  // Two sweeps over the state space: find the max log weight, then
  // accumulate joint weights of (boundary pattern, root spin).
  const std::uint64_t states = state_count_checked(g, cap);
  if (boundary.size() * std::log2(static_cast<double>(q)) > 62)
    throw StateCapExceeded("boundary pattern space too large");
  std::unordered_map<std::uint64_t, std::vector<double>> table;
  std::vector<double> root_marginal(q, 0.0);
  {
    auto sweep = [&](auto&& f) {
      Assignment sigma(g.n, 0);
      std::vector<int> local;
      for (std::uint64_t s = 0; s < states; ++s) {
        double lw = 0.0;
        for (const auto& c : g.constraints) {
          local.resize(c.neighbors.size());
          for (std::size_t j = 0; j < c.neighbors.size(); ++j)
            local[j] = sigma[c.neighbors[j]];
          lw += std::log(g.weight_functions[c.wf].value(local, q));
        }
        f(sigma, lw);
        for (int i = g.n - 1; i >= 0; --i) {
          if (++sigma[i] < static_cast<int>(q)) break;
          sigma[i] = 0;
        }
      }
    };
    double shift = -std::numeric_limits<double>::infinity();
    sweep([&](const Assignment&, double lw) { shift = std::max(shift, lw); });
    sweep([&](const Assignment& sigma, double lw) {
      std::uint64_t key = 0;
      for (int v : boundary) key = key * q + static_cast<std::uint64_t>(sigma[v]);
      auto& row = table[key];
      if (row.empty()) row.assign(q, 0.0);
      const double w = std::exp(lw - shift);
      row[sigma[root]] += w;
      root_marginal[sigma[root]] += w;
    });
  }
  double z = 0.0;
  for (double v : root_marginal) z += v;
  for (double& v : root_marginal) v /= z;

  // Sample boundary patterns from their exact Gibbs marginal.
  std::vector<std::pair<std::uint64_t, double>> patterns;
  patterns.reserve(table.size());
  for (const auto& [key, row] : table) {
    double mass = 0.0;
    for (double v : row) mass += v;
    patterns.emplace_back(key, mass);
  }
  std::sort(patterns.begin(), patterns.end());
  std::vector<double> cum(patterns.size());
  double running = 0.0;
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    running += patterns[i].second;
    cum[i] = running;
  }
  Rng rng = Rng::substream(seed, "nonrec_boundary");
  for (long s = 0; s < samples; ++s) {
    const double u = rng.next_double() * running;
    const std::size_t pick = std::min<std::size_t>(
        std::upper_bound(cum.begin(), cum.end(), u) - cum.begin(),
        patterns.size() - 1);
    const auto& row = table.at(patterns[pick].first);
    double mass = 0.0;
    for (double v : row) mass += v;
    double tv = 0.0;
    for (std::size_t w = 0; w < q; ++w) tv += std::abs(row[w] / mass - root_marginal[w]);
    result.per_sample.push_back(0.5 * tv);
  }
  finish(result);
  return result;
}

std::map<CanonicalCode, double> local_census(const FactorGraph& g, int ell) {
  std::map<CanonicalCode, double> census;
  const double unit = 1.0 / static_cast<double>(g.n);
  for (int x = 0; x < g.n; ++x) {
    const auto ball = neighborhood(g, x, ell);
    census[ball ? canonical_code(*ball) : kCyclicClass] += unit;
  }
  return census;
}

DiagnosticResult census_distance(const ModelSpec& spec, int n, int ell,
                                 int graph_seeds, long tree_samples,
                                 std::uint64_t seed) {
  std::map<CanonicalCode, double> graph_law;
  for (int s = 0; s < graph_seeds; ++s) {
    const FactorGraph g = sample_factor_graph(
        spec, n, Rng::substream(seed, "census_graph", s).next_u64());
    for (const auto& [code, f] : local_census(g, ell))
      graph_law[code] += f / static_cast<double>(graph_seeds);
  }
  std::map<CanonicalCode, double> tree_law;
  for (long t = 0; t < tree_samples; ++t) {
    const RootedTree tree =
        sample_gw_tree(spec, ell, Rng::substream(seed, "census_tree", t).next_u64());
    tree_law[canonical_code(tree)] += 1.0 / static_cast<double>(tree_samples);
  }
  double tv = 0.0;
  for (const auto& [code, f] : graph_law) {
    auto it = tree_law.find(code);
    tv += std::abs(f - (it == tree_law.end() ? 0.0 : it->second));
  }
  for (const auto& [code, f] : tree_law)
    if (!graph_law.count(code)) tv += f;
  DiagnosticResult result;
  result.statistic = 0.5 * tv;
  result.samples = graph_seeds;
  return result;
}

DiagnosticResult bp_empirical_distance(const FactorGraph& g,
                                       const CanonicalCode& tree_code, int ell,
                                       const Population& reference,
                                       std::uint64_t cap) {
  Population matched;
  const auto marginals = gibbs_all_marginals(g, cap);
  for (int x = 0; x < g.n; ++x) {
    const auto ball = neighborhood(g, x, ell);
    if (ball && canonical_code(*ball) == tree_code)
      matched.members.push_back(marginals[x]);
  }
  if (matched.members.empty())
    matched.members.push_back(uniform_point(g.q()));
  DiagnosticResult result;
  result.statistic =
      wasserstein_d1(matched, reference, std::max<std::size_t>(
                                             2000, reference.members.size()));
  result.samples = static_cast<long>(matched.members.size());
  return result;
}

DiagnosticResult cavity_consistency(const FactorGraph& g, std::uint64_t cap) {
  const std::size_t q = g.q();
  const auto adj = g.adjacency();
  const auto marginals = gibbs_all_marginals(g, cap);
  DiagnosticResult result;
  double total = 0.0;
  for (int x = 0; x < g.n; ++x) {
    const RemovedVariable cavity = remove_variable(g, x);
    std::vector<std::vector<double>> cavity_marginals;
    if (cavity.graph.n > 0)
      cavity_marginals = gibbs_all_marginals(cavity.graph, cap);
    // Product over constraints at x of the summed constraint factor.
    std::vector<double> formula(q, 1.0);
    std::vector<char> seen_cons(g.constraints.size(), 0);
    for (const auto& [a, slot] : adj[x]) {
      if (seen_cons[a]) continue;  // treat each adjacent constraint once
      seen_cons[a] = 1;
      const auto& cons = g.constraints[a];
      const auto& wf = g.weight_functions[cons.wf];
      // Distinct variables of the constraint.
      std::vector<int> vars;
      for (int v : cons.neighbors)
        if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
      std::vector<double> factor(q, 0.0);
      std::vector<int> assign(vars.size(), 0);
      std::vector<int> tuple(wf.arity);
      while (true) {
        double w = 1.0;
        for (std::size_t vi = 0; vi < vars.size(); ++vi) {
          if (vars[vi] == x) continue;
          w *= cavity_marginals[cavity.old_to_new[vars[vi]]][assign[vi]];
        }
        for (int j = 0; j < wf.arity; ++j) {
          const auto vi = std::find(vars.begin(), vars.end(), cons.neighbors[j]) -
                          vars.begin();
          tuple[j] = assign[vi];
        }
        const double psi = wf.value(tuple, q);
        const auto xi =
            std::find(vars.begin(), vars.end(), x) - vars.begin();
        factor[assign[xi]] += psi * w;
        int pos = static_cast<int>(vars.size()) - 1;
        for (; pos >= 0; --pos) {
          if (++assign[pos] < static_cast<int>(q)) break;
          assign[pos] = 0;
        }
        if (pos < 0) break;
      }
      for (std::size_t w = 0; w < q; ++w) formula[w] *= factor[w];
    }
    double z = 0.0;
    for (double v : formula) z += v;
    double diff = 0.0;
    for (std::size_t w = 0; w < q; ++w)
      diff += std::abs(marginals[x][w] - formula[w] / z);
    result.per_sample.push_back(diff);
    total += diff;
  }
  result.statistic = total / static_cast<double>(g.n);
  result.samples = g.n;
  // Exact per graph; variability only across graphs.
  result.std_error = 0.0;
  return result;
}

}  // namespace fgl
