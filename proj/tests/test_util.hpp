#pragma once

#include <cmath>
#include <vector>

#include "fgl/factor_graph.hpp"
#include "fgl/gibbs.hpp"
#include "fgl/model.hpp"

namespace fgl::test {

inline FactorGraph single_ising_edge(double beta) {
  FactorGraph g;
  g.alphabet = SpinAlphabet::ising();
  WeightFunction wf;
  wf.name = "ising_edge";
  wf.arity = 2;
  wf.table = {std::exp(beta), std::exp(-beta), std::exp(-beta), std::exp(beta)};
  g.weight_functions.push_back(wf);
  g.n = 2;
  g.constraints.push_back({0, {0, 1}});
  return g;
}

inline FactorGraph free_graph(int n, std::size_t q = 2) {
  FactorGraph g;
  g.alphabet = q == 2 ? SpinAlphabet::binary() : SpinAlphabet{{"a", "b", "c"}};
  g.n = n;
  return g;
}

// Plain product-sum partition function, the no-log-space oracle.
inline double direct_partition_function(const FactorGraph& g) {
  const std::size_t q = g.q();
  std::uint64_t states = 1;
  for (int i = 0; i < g.n; ++i) states *= q;
  double z = 0.0;
  Assignment sigma(g.n, 0);
  for (std::uint64_t s = 0; s < states; ++s) {
    double w = 1.0;
    std::vector<int> local;
    for (const auto& c : g.constraints) {
      local.clear();
      for (int v : c.neighbors) local.push_back(sigma[v]);
      w *= g.weight_functions[c.wf].value(local, q);
    }
    z += w;
    for (int i = g.n - 1; i >= 0; --i) {
      if (++sigma[i] < static_cast<int>(q)) break;
      sigma[i] = 0;
    }
  }
  return z;
}

// Regularized upper incomplete gamma Q(a, x) for chi-square p-values.
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) return 1.0;
  auto gamma_p_series = [](double a_, double x_) {
    double sum = 1.0 / a_, term = sum, ap = a_;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      term *= x_ / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x_ + a_ * std::log(x_) - std::lgamma(a_));
  };
  auto gamma_q_cf = [](double a_, double x_) {
    double b = x_ + 1.0 - a_, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
      const double an = -i * (i - a_);
      b += 2.0;
      d = an * d + b;
      if (std::abs(d) < 1e-300) d = 1e-300;
      c = b + an / c;
      if (std::abs(c) < 1e-300) c = 1e-300;
      d = 1.0 / d;
      const double del = d * c;
      h *= del;
      if (std::abs(del - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x_ + a_ * std::log(x_) - std::lgamma(a_));
  };
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

inline double chi_square_p_value(double stat, int dof) {
  return gamma_q(0.5 * dof, 0.5 * stat);
}

}  // namespace fgl::test
