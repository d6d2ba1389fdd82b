#include "fgl/model.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace fgl {

FactorGraph sample_factor_graph(const ModelSpec& spec, int n, std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  FactorGraph g;
  g.alphabet = spec.alphabet;
  g.n = n;
  for (const auto& f : spec.families) g.weight_functions.push_back(f.wf);
  for (std::size_t fi = 0; fi < spec.families.size(); ++fi) {
    const auto& fam = spec.families[fi];
    Rng rng = Rng::substream(seed, "model_family", fi);
    const long m = rng.poisson(static_cast<double>(n) * fam.rho);
    for (long i = 0; i < m; ++i) {
      FactorGraph::Constraint c;
      c.wf = static_cast<int>(fi);
      c.neighbors.resize(fam.wf.arity);
      for (int j = 0; j < fam.wf.arity; ++j)
        c.neighbors[j] = static_cast<int>(rng.below(n));
      g.constraints.push_back(std::move(c));
    }
  }
  return g;
}

ModelSpec preset_ksat(int k, double beta, double density) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  ModelSpec spec;
  spec.alphabet = SpinAlphabet::ising();
  const int types = 1 << k;
  const std::size_t table_size = std::size_t{1} << k;  // |Omega|=2
  for (int c = 0; c < types; ++c) {
    WeightFunction wf;
    {
      std::ostringstream name;
      name << "ksat_c";
      for (int j = 0; j < k; ++j) name << (((c >> (k - 1 - j)) & 1) ? '+' : '-');
      wf.name = name.str();
    }
    wf.arity = k;
    wf.table.assign(table_size, 1.0);
    // The clause is violated exactly when every signed variable is -1,
    // i.e. x_j = -c_j for all j.  Index 0 of the alphabet is "-1".
    std::size_t violated = 0;
    for (int j = 0; j < k; ++j) {
      const int c_j = ((c >> (k - 1 - j)) & 1) ? 1 : 0;  // 1 means +1
      const int x_j = 1 - c_j;
      violated = violated * 2 + static_cast<std::size_t>(x_j);
    }
    wf.table[violated] = std::exp(-beta);
    spec.families.push_back({std::move(wf), density / types});
  }
  return spec;
}

namespace {
WeightFunction ising_edge(double beta) {
  WeightFunction wf;
  wf.name = "ising_edge";
  wf.arity = 2;
  // Order (-1,-1), (-1,+1), (+1,-1), (+1,+1).
  wf.table = {std::exp(beta), std::exp(-beta), std::exp(-beta), std::exp(beta)};
  return wf;
}
}  // namespace

ModelSpec preset_ising_pairwise(double beta, double density) {
  ModelSpec spec;
  spec.alphabet = SpinAlphabet::ising();
  spec.families.push_back({ising_edge(beta), density});
  return spec;
}

FactorGraph preset_ising_grid(int side, double beta) {
  if (side < 1) throw std::invalid_argument("side must be >= 1");
  FactorGraph g;
  g.alphabet = SpinAlphabet::ising();
  g.weight_functions.push_back(ising_edge(beta));
  g.n = side * side;
  auto id = [side](int r, int c) { return r * side + c; };
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) {
      if (c + 1 < side)
        g.constraints.push_back({0, {id(r, c), id(r, c + 1)}});
      if (r + 1 < side)
        g.constraints.push_back({0, {id(r, c), id(r + 1, c)}});
    }
  return g;
}

ModelSpec parse_preset(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  std::map<std::string, double> kv;
  if (colon != std::string::npos) {
    std::stringstream rest(text.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("bad preset parameter: " + item);
      kv[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    }
  }
  auto get = [&kv](const std::string& key, double fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  };
  if (kind == "ksat")
    return preset_ksat(static_cast<int>(get("k", 3)), get("beta", 1.0),
                       get("density", 1.0));
  if (kind == "ising")
    return preset_ising_pairwise(get("beta", 0.2), get("density", 1.0));
  throw std::invalid_argument("unknown preset: " + kind);
}

}  // namespace fgl
