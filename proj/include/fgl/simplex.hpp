#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "fgl/factor_graph.hpp"
#include "fgl/rng.hpp"

namespace fgl {

// A point of P(Omega): nonnegative entries summing to 1.
using SimplexPoint = std::vector<double>;

inline SimplexPoint uniform_point(std::size_t q) {
  return SimplexPoint(q, 1.0 / static_cast<double>(q));
}

inline SimplexPoint point_mass(std::size_t q, std::size_t i) {
  SimplexPoint p(q, 0.0);
  p[i] = 1.0;
  return p;
}

inline void normalize(SimplexPoint& p) {
  double total = 0.0;
  for (double v : p) total += v;
  if (!(total > 0.0)) throw std::runtime_error("cannot normalize zero vector");
  for (double& v : p) v /= total;
}

// Total variation = half the l1 norm.
inline double tv_distance(const SimplexPoint& a, const SimplexPoint& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

// eta(w) proportional to the product of the incoming messages; the empty
// product is uniform.  Computed in log space.
inline SimplexPoint combine(std::span<const SimplexPoint> messages, std::size_t q) {
  if (messages.empty()) return uniform_point(q);
  std::vector<double> log_p(q, 0.0);
  for (const auto& m : messages)
    for (std::size_t w = 0; w < q; ++w) log_p[w] += std::log(m[w]);
  double max_lp = log_p[0];
  for (double v : log_p) max_lp = std::max(max_lp, v);
  SimplexPoint p(q);
  for (std::size_t w = 0; w < q; ++w) p[w] = std::exp(log_p[w] - max_lp);
  normalize(p);
  return p;
}

// Constraint-to-variable message: sum over spin tuples with the target slot
// pinned, weighting the other slots by their incoming messages (slot order,
// target slot excluded).
inline SimplexPoint constraint_message(const WeightFunction& wf, std::size_t q,
                                       int slot,
                                       std::span<const SimplexPoint> incoming) {
  const int k = wf.arity;
  if (slot < 0 || slot >= k) throw std::invalid_argument("slot out of range");
  if (static_cast<int>(incoming.size()) != k - 1)
    throw std::invalid_argument("expected k-1 incoming messages");
  SimplexPoint out(q, 0.0);
  std::vector<int> tuple(k, 0);
  const std::size_t total = wf.table.size();
  for (std::size_t idx = 0; idx < total; ++idx) {
    double w = wf.table[idx];
    int in_pos = 0;
    for (int j = 0; j < k; ++j) {
      if (j == slot) continue;
      w *= incoming[in_pos++][tuple[j]];
    }
    out[tuple[slot]] += w;
    for (int j = k - 1; j >= 0; --j) {
      if (++tuple[j] < static_cast<int>(q)) break;
      tuple[j] = 0;
    }
  }
  normalize(out);
  return out;
}

// Empirical distribution over P(Omega).
struct Population {
  std::vector<SimplexPoint> members;
  int generation = 0;

  static Population uniform_init(std::size_t size, std::size_t q) {
    Population p;
    p.members.assign(size, uniform_point(q));
    return p;
  }

  // N i.i.d. Dirichlet(alpha,...,alpha) draws; alpha large means tightly
  // clustered around uniform.
  static Population jittered_init(std::size_t size, std::size_t q, double alpha,
                                  std::uint64_t seed) {
    Population p;
    Rng rng = Rng::substream(seed, "pop_init");
    std::vector<double> a(q, alpha);
    for (std::size_t i = 0; i < size; ++i) p.members.push_back(rng.dirichlet(a));
    return p;
  }
};

}  // namespace fgl
