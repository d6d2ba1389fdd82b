#include "fgl/measure.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "fgl/gibbs.hpp"
#include "fgl/io.hpp"

namespace fgl {

void DiscreteMeasure::validate() const {
  if (alphabet.size() == 0) throw std::invalid_argument("empty alphabet");
  double total = 0.0;
  std::map<Assignment, int> seen;
  for (const auto& [sigma, w] : support) {
    if (static_cast<int>(sigma.size()) != n)
      throw std::invalid_argument("support point has wrong length");
    for (int v : sigma)
      if (v < 0 || v >= static_cast<int>(q()))
        throw std::invalid_argument("spin index out of range");
    if (!(w > 0.0)) throw std::invalid_argument("probabilities must be positive");
    if (seen[sigma]++) throw std::invalid_argument("duplicate support point");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("probabilities must sum to 1");
}

void EmbeddedMeasure::validate() const {
  double total = 0.0;
  for (const auto& atom : atoms) {
    if (!(atom.weight > 0.0)) throw std::invalid_argument("atom weight must be positive");
    if (static_cast<int>(atom.step.size()) != n)
      throw std::invalid_argument("step function has wrong length");
    for (const auto& p : atom.step) {
      if (p.size() != q()) throw std::invalid_argument("simplex point has wrong size");
      double s = 0.0;
      for (double v : p) {
        if (v < -1e-12) throw std::invalid_argument("negative simplex entry");
        s += v;
      }
      if (std::abs(s - 1.0) > 1e-9)
        throw std::invalid_argument("simplex point does not sum to 1");
    }
    total += atom.weight;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("atom weights must sum to 1");
}

EmbeddedMeasure embed(const DiscreteMeasure& m) {
  EmbeddedMeasure out;
  out.alphabet = m.alphabet;
  out.n = m.n;
  const std::size_t q = m.q();
  for (const auto& [sigma, w] : m.support) {
    EmbeddedMeasure::Atom atom;
    atom.weight = w;
    atom.step.reserve(m.n);
    for (int x = 0; x < m.n; ++x) atom.step.push_back(point_mass(q, sigma[x]));
    out.atoms.push_back(std::move(atom));
  }
  return out;
}

EmbeddedMeasure mixture(const EmbeddedMeasure& mu, const EmbeddedMeasure& nu,
                        double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must lie in (0,1)");
  if (mu.n != nu.n || mu.alphabet.symbols != nu.alphabet.symbols)
    throw std::invalid_argument("mixture requires matching spaces");
  EmbeddedMeasure out;
  out.alphabet = mu.alphabet;
  out.n = mu.n;
  for (const auto& a : mu.atoms) out.atoms.push_back({alpha * a.weight, a.step});
  for (const auto& a : nu.atoms)
    out.atoms.push_back({(1.0 - alpha) * a.weight, a.step});
  return out;
}

DiscreteMeasure product(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.n != nu.n) throw std::invalid_argument("product requires equal n");
  DiscreteMeasure out;
  out.n = mu.n;
  const std::size_t qb = nu.q();
  for (const auto& a : mu.alphabet.symbols)
    for (const auto& b : nu.alphabet.symbols)
      out.alphabet.symbols.push_back("(" + a + "," + b + ")");
  for (const auto& [sig, ws] : mu.support)
    for (const auto& [tau, wt] : nu.support) {
      Assignment paired(mu.n);
      for (int x = 0; x < mu.n; ++x)
        paired[x] = sig[x] * static_cast<int>(qb) + tau[x];
      out.support.emplace_back(std::move(paired), ws * wt);
    }
  return out;
}

DiscreteMeasure gibbs_discrete_measure(const FactorGraph& g, std::uint64_t cap) {
  const std::uint64_t states = state_count_checked(g, cap);
  const std::size_t q = g.q();
  DiscreteMeasure out;
  out.alphabet = g.alphabet;
  out.n = g.n;
  const double log_z = partition_function(g, cap).log_z;
  Assignment sigma(g.n, 0);
  for (std::uint64_t s = 0; s < states; ++s) {
    out.support.emplace_back(sigma, std::exp(log_gibbs_weight(g, sigma) - log_z));
    for (int i = g.n - 1; i >= 0; --i) {
      if (++sigma[i] < static_cast<int>(q)) break;
      sigma[i] = 0;
    }
  }
  return out;
}

std::vector<double> embedded_marginal(const EmbeddedMeasure& mu,
                                      const std::vector<int>& cells) {
  const std::size_t q = mu.q();
  std::size_t size = 1;
  for (std::size_t i = 0; i < cells.size(); ++i) size *= q;
  std::vector<double> out(size, 0.0);
  std::vector<int> tuple(cells.size(), 0);
  for (const auto& atom : mu.atoms) {
    std::fill(tuple.begin(), tuple.end(), 0);
    for (std::size_t idx = 0; idx < size; ++idx) {
      double w = atom.weight;
      for (std::size_t i = 0; i < cells.size(); ++i)
        w *= atom.step[cells[i]][tuple[i]];
      out[idx] += w;
      for (int i = static_cast<int>(cells.size()) - 1; i >= 0; --i) {
        if (++tuple[i] < static_cast<int>(q)) break;
        tuple[i] = 0;
      }
    }
  }
  return out;
}

nlohmann::json to_json(const DiscreteMeasure& m) {
  Json atoms = Json::array();
  for (const auto& [sigma, w] : m.support)
    atoms.push_back(Json{{"weight", double_to_string(w)}, {"values", sigma}});
  return Json{{"n", m.n}, {"alphabet", to_json(m.alphabet)}, {"atoms", atoms}};
}

DiscreteMeasure discrete_measure_from_json(const nlohmann::json& j) {
  DiscreteMeasure m;
  if (!j.contains("n")) throw std::invalid_argument("measure missing 'n'");
  if (!j.contains("alphabet")) throw std::invalid_argument("measure missing 'alphabet'");
  m.n = j.at("n").get<int>();
  m.alphabet = alphabet_from_json(j.at("alphabet"));
  for (const auto& a : j.value("atoms", Json::array())) {
    if (!a.contains("weight") || !a.contains("values"))
      throw std::invalid_argument("atom missing 'weight' or 'values'");
    m.support.emplace_back(a.at("values").get<Assignment>(),
                           double_from_json(a.at("weight")));
  }
  m.validate();
  return m;
}

nlohmann::json to_json(const EmbeddedMeasure& m) {
  Json atoms = Json::array();
  for (const auto& atom : m.atoms) {
    Json step = Json::array();
    for (const auto& p : atom.step) {
      Json cell = Json::array();
      for (double v : p) cell.push_back(double_to_string(v));
      step.push_back(cell);
    }
    atoms.push_back(Json{{"weight", double_to_string(atom.weight)}, {"stepfn", step}});
  }
  return Json{{"n", m.n}, {"alphabet", to_json(m.alphabet)}, {"atoms", atoms}};
}

EmbeddedMeasure embedded_measure_from_json(const nlohmann::json& j) {
  if (!j.contains("atoms")) throw std::invalid_argument("measure missing 'atoms'");
  const auto& atoms = j.at("atoms");
  const bool discrete =
      !atoms.empty() && atoms.front().contains("values");
  if (discrete) return embed(discrete_measure_from_json(j));
  EmbeddedMeasure m;
  m.n = j.at("n").get<int>();
  m.alphabet = alphabet_from_json(j.at("alphabet"));
  for (const auto& a : atoms) {
    EmbeddedMeasure::Atom atom;
    atom.weight = double_from_json(a.at("weight"));
    for (const auto& cell : a.at("stepfn")) {
      SimplexPoint p;
      for (const auto& v : cell) p.push_back(double_from_json(v));
      atom.step.push_back(std::move(p));
    }
    m.atoms.push_back(std::move(atom));
  }
  m.validate();
  return m;
}

std::vector<std::vector<int>> sample_ah_array(const EmbeddedMeasure& mu, int k,
                                              std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  mu.validate();
  Rng rng = Rng::substream(seed, "ah_array");
  const std::size_t q = mu.q();
  // Row atoms by cumulative weight.
  std::vector<int> row_atom(k);
  for (int i = 0; i < k; ++i) {
    double u = rng.next_double();
    int pick = static_cast<int>(mu.atoms.size()) - 1;
    for (std::size_t a = 0; a < mu.atoms.size(); ++a) {
      u -= mu.atoms[a].weight;
      if (u < 0.0) {
        pick = static_cast<int>(a);
        break;
      }
    }
    row_atom[i] = pick;
  }
  std::vector<int> col_cell(k);
  for (int j = 0; j < k; ++j) col_cell[j] = static_cast<int>(rng.below(mu.n));
  std::vector<std::vector<int>> out(k, std::vector<int>(k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const SimplexPoint& p = mu.atoms[row_atom[i]].step[col_cell[j]];
      double u = rng.next_double();
      int spin = static_cast<int>(q) - 1;
      for (std::size_t w = 0; w < q; ++w) {
        u -= p[w];
        if (u < 0.0) {
          spin = static_cast<int>(w);
          break;
        }
      }
      out[i][j] = spin;
    }
  return out;
}

SampledMarginalDistance sampled_marginal_distance(const EmbeddedMeasure& mu,
                                                  const EmbeddedMeasure& nu,
                                                  int k, long samples,
                                                  std::uint64_t seed) {
  if (mu.n != nu.n) throw std::invalid_argument("measures must share n");
  Rng rng = Rng::substream(seed, "sampled_marginal");
  double sum = 0.0, sum_sq = 0.0;
  std::vector<int> cells(k);
  for (long s = 0; s < samples; ++s) {
    for (int i = 0; i < k; ++i) cells[i] = static_cast<int>(rng.below(mu.n));
    const auto a = embedded_marginal(mu, cells);
    const auto b = embedded_marginal(nu, cells);
    double tv = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
    tv *= 0.5;
    sum += tv;
    sum_sq += tv * tv;
  }
  SampledMarginalDistance out;
  out.samples = samples;
  out.value = sum / static_cast<double>(samples);
  const double var = std::max(0.0, sum_sq / samples - out.value * out.value);
  out.std_error = std::sqrt(var / static_cast<double>(samples));
  return out;
}

}  // namespace fgl
