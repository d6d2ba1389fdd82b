#include "fgl/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fgl {

RemovedVariable remove_variable(const FactorGraph& g, int x) {
  if (x < 0 || x >= g.n) throw std::invalid_argument("remove_variable: unknown id");
  RemovedVariable out;
  out.graph.alphabet = g.alphabet;
  out.graph.weight_functions = g.weight_functions;
  out.graph.n = g.n - 1;
  out.old_to_new.assign(g.n, -1);
  int next = 0;
  for (int v = 0; v < g.n; ++v)
    if (v != x) out.old_to_new[v] = next++;
  for (const auto& c : g.constraints) {
    bool touches = std::find(c.neighbors.begin(), c.neighbors.end(), x) !=
                   c.neighbors.end();
    if (touches) continue;
    FactorGraph::Constraint nc;
    nc.wf = c.wf;
    nc.neighbors.reserve(c.neighbors.size());
    for (int v : c.neighbors) nc.neighbors.push_back(out.old_to_new[v]);
    out.graph.constraints.push_back(std::move(nc));
  }
  return out;
}

std::uint64_t state_count_checked(const FactorGraph& g, std::uint64_t cap) {
  std::uint64_t count = 1;
  const std::uint64_t q = g.q();
  for (int i = 0; i < g.n; ++i) {
    if (count > cap / std::max<std::uint64_t>(q, 1))
      throw StateCapExceeded("state space exceeds enumeration cap");
    count *= q;
  }
  if (count > cap) throw StateCapExceeded("state space exceeds enumeration cap");
  return count;
}

double log_gibbs_weight(const FactorGraph& g, const Assignment& sigma) {
  if (static_cast<int>(sigma.size()) != g.n)
    throw std::invalid_argument("assignment length mismatch");
  const std::size_t q = g.q();
  double log_w = 0.0;
  std::vector<int> local;
  for (const auto& c : g.constraints) {
    local.resize(c.neighbors.size());
    for (std::size_t j = 0; j < c.neighbors.size(); ++j)
      local[j] = sigma[c.neighbors[j]];
    log_w += std::log(g.weight_functions[c.wf].value(local, q));
  }
  return log_w;
}

double gibbs_weight(const FactorGraph& g, const Assignment& sigma) {
  return std::exp(log_gibbs_weight(g, sigma));
}

namespace {

// Calls f(state index, log weight) for every assignment, advancing an
// odometer over spins.  sigma is reused across calls.
template <typename F>
void for_each_state(const FactorGraph& g, std::uint64_t states, F&& f) {
  Assignment sigma(g.n, 0);
  const std::size_t q = g.q();
  for (std::uint64_t s = 0; s < states; ++s) {
    double log_w = 0.0;
    std::vector<int> local;
    for (const auto& c : g.constraints) {
      local.resize(c.neighbors.size());
      for (std::size_t j = 0; j < c.neighbors.size(); ++j)
        local[j] = sigma[c.neighbors[j]];
      log_w += std::log(g.weight_functions[c.wf].value(local, q));
    }
    f(s, sigma, log_w);
    for (int i = g.n - 1; i >= 0; --i) {
      if (++sigma[i] < static_cast<int>(q)) break;
      sigma[i] = 0;
    }
  }
}

// Streaming log-sum-exp accumulator with on-the-fly rescaling.
struct LogSum {
  double shift = -std::numeric_limits<double>::infinity();
  double acc = 0.0;

  void add(double log_w) {
    if (log_w <= shift) {
      acc += std::exp(log_w - shift);
    } else {
      acc = acc * std::exp(shift - log_w) + 1.0;
      shift = log_w;
    }
  }
  double log_value() const { return shift + std::log(acc); }
};

}  // namespace

PartitionFunction partition_function(const FactorGraph& g, std::uint64_t cap) {
  const std::uint64_t states = state_count_checked(g, cap);
  LogSum ls;
  for_each_state(g, states,
                 [&](std::uint64_t, const Assignment&, double lw) { ls.add(lw); });
  PartitionFunction out;
  out.log_z = ls.log_value();
  double z = std::exp(out.log_z);
  if (std::isfinite(z) && z > 0.0) out.z = z;
  return out;
}

std::vector<double> gibbs_marginal(const FactorGraph& g,
                                   const std::vector<int>& vars,
                                   std::uint64_t cap) {
  for (int v : vars)
    if (v < 0 || v >= g.n) throw std::invalid_argument("unknown variable id");
  const std::uint64_t states = state_count_checked(g, cap);
  const std::size_t q = g.q();
  std::size_t cells = 1;
  for (std::size_t i = 0; i < vars.size(); ++i) cells *= q;
  std::vector<double> acc(cells, 0.0);
  double shift = -std::numeric_limits<double>::infinity();
  for_each_state(g, states, [&](std::uint64_t, const Assignment& sigma, double lw) {
    if (lw > shift) {
      const double f = std::exp(shift - lw);
      for (double& a : acc) a *= f;
      shift = lw;
    }
    std::size_t idx = 0;
    for (int v : vars) idx = idx * q + static_cast<std::size_t>(sigma[v]);
    acc[idx] += std::exp(lw - shift);
  });
  double total = 0.0;
  for (double a : acc) total += a;
  for (double& a : acc) a /= total;
  return acc;
}

std::vector<std::vector<double>> gibbs_all_marginals(const FactorGraph& g,
                                                     std::uint64_t cap) {
  const std::uint64_t states = state_count_checked(g, cap);
  const std::size_t q = g.q();
  std::vector<std::vector<double>> acc(g.n, std::vector<double>(q, 0.0));
  double shift = -std::numeric_limits<double>::infinity();
  for_each_state(g, states, [&](std::uint64_t, const Assignment& sigma, double lw) {
    if (lw > shift) {
      const double f = std::exp(shift - lw);
      for (auto& row : acc)
        for (double& a : row) a *= f;
      shift = lw;
    }
    const double w = std::exp(lw - shift);
    for (int v = 0; v < g.n; ++v) acc[v][sigma[v]] += w;
  });
  for (auto& row : acc) {
    double total = 0.0;
    for (double a : row) total += a;
    for (double& a : row) a /= total;
  }
  return acc;
}

std::vector<Assignment> gibbs_sample(const FactorGraph& g, int count,
                                     std::uint64_t seed, std::uint64_t cap) {
  const std::uint64_t states = state_count_checked(g, cap);
  std::vector<double> cum(states);
  double shift = -std::numeric_limits<double>::infinity();
  // Two passes: first find the max log weight, then accumulate the CDF.
  for_each_state(g, states, [&](std::uint64_t, const Assignment&, double lw) {
    shift = std::max(shift, lw);
  });
  double running = 0.0;
  for_each_state(g, states, [&](std::uint64_t s, const Assignment&, double lw) {
    running += std::exp(lw - shift);
    cum[s] = running;
  });
  const double total = running;
  Rng rng = Rng::substream(seed, "gibbs_sample");
  const std::size_t q = g.q();
  std::vector<Assignment> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double u = rng.next_double() * total;
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    std::uint64_t s = static_cast<std::uint64_t>(it - cum.begin());
    if (s >= states) s = states - 1;
    Assignment sigma(g.n);
    for (int v = g.n - 1; v >= 0; --v) {
      sigma[v] = static_cast<int>(s % q);
      s /= q;
    }
    out.push_back(std::move(sigma));
  }
  return out;
}

std::vector<double> conditional_marginal(const FactorGraph& g, int target,
                                         const std::vector<Clamp>& clamped,
                                         std::uint64_t cap) {
  if (target < 0 || target >= g.n)
    throw std::invalid_argument("unknown variable id");
  const std::size_t q = g.q();
  std::vector<int> fixed(g.n, -1);
  for (const auto& c : clamped) {
    if (c.var < 0 || c.var >= g.n) throw std::invalid_argument("unknown variable id");
    if (c.var == target) throw std::invalid_argument("target variable is clamped");
    if (c.spin < 0 || c.spin >= static_cast<int>(q))
      throw std::invalid_argument("clamped spin out of range");
    fixed[c.var] = c.spin;
  }
  std::vector<int> free_vars;
  for (int v = 0; v < g.n; ++v)
    if (fixed[v] < 0) free_vars.push_back(v);

  std::uint64_t states = 1;
  for (std::size_t i = 0; i < free_vars.size(); ++i) {
    if (states > cap / q) throw StateCapExceeded("state space exceeds enumeration cap");
    states *= q;
  }

  std::vector<double> acc(q, 0.0);
  double shift = -std::numeric_limits<double>::infinity();
  Assignment sigma(g.n);
  for (int v = 0; v < g.n; ++v) sigma[v] = std::max(fixed[v], 0);
  std::vector<int> digits(free_vars.size(), 0);
  std::vector<int> local;
  for (std::uint64_t s = 0; s < states; ++s) {
    double lw = 0.0;
    for (const auto& c : g.constraints) {
      local.resize(c.neighbors.size());
      for (std::size_t j = 0; j < c.neighbors.size(); ++j)
        local[j] = sigma[c.neighbors[j]];
      lw += std::log(g.weight_functions[c.wf].value(local, q));
    }
    if (lw > shift) {
      const double f = std::exp(shift - lw);
      for (double& a : acc) a *= f;
      shift = lw;
    }
    acc[sigma[target]] += std::exp(lw - shift);
    for (int i = static_cast<int>(free_vars.size()) - 1; i >= 0; --i) {
      if (++digits[i] < static_cast<int>(q)) {
        sigma[free_vars[i]] = digits[i];
        break;
      }
      digits[i] = 0;
      sigma[free_vars[i]] = 0;
    }
  }
  double total = 0.0;
  for (double a : acc) total += a;
  for (double& a : acc) a /= total;
  return acc;
}

}  // namespace fgl
