#include "fgl/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "fgl/rng.hpp"

namespace fgl {

void CoordinatePartition::validate(int n) const {
  std::vector<char> seen(n, 0);
  for (const auto& block : blocks) {
    if (block.empty()) throw std::invalid_argument("empty coordinate block");
    for (int x : block) {
      if (x < 0 || x >= n || seen[x])
        throw std::invalid_argument("coordinate partition is not a disjoint cover");
      seen[x] = 1;
    }
  }
  for (char c : seen)
    if (!c) throw std::invalid_argument("coordinate partition misses a coordinate");
}

void ConfigPartition::validate(std::size_t support_size) const {
  std::vector<char> seen(support_size, 0);
  for (const auto& block : blocks) {
    if (block.empty()) throw std::invalid_argument("empty config block");
    for (int c : block) {
      if (c < 0 || c >= static_cast<int>(support_size) || seen[c])
        throw std::invalid_argument("config partition is not a disjoint cover");
      seen[c] = 1;
    }
  }
  for (char c : seen)
    if (!c) throw std::invalid_argument("config partition misses a support point");
}

CoordinatePartition trivial_coordinate_partition(int n) {
  CoordinatePartition v;
  v.blocks.emplace_back(n);
  std::iota(v.blocks[0].begin(), v.blocks[0].end(), 0);
  return v;
}

ConfigPartition trivial_config_partition(std::size_t support_size) {
  ConfigPartition s;
  s.blocks.emplace_back(support_size);
  std::iota(s.blocks[0].begin(), s.blocks[0].end(), 0);
  return s;
}

namespace {

// Normalized block average of the indicator field for one configuration.
SimplexPoint config_block_average(const DiscreteMeasure& m, int config,
                                  const std::vector<int>& cells) {
  SimplexPoint avg(m.q(), 0.0);
  const auto& sigma = m.support[config].first;
  for (int x : cells) avg[sigma[x]] += 1.0;
  for (double& v : avg) v /= static_cast<double>(cells.size());
  return avg;
}

double block_mass(const DiscreteMeasure& m, const std::vector<int>& configs) {
  double mass = 0.0;
  for (int c : configs) mass += m.support[c].second;
  return mass;
}

// <Sigma[.|cells]>_{mu[.|configs]}.
SimplexPoint weighted_block_average(const DiscreteMeasure& m,
                                    const std::vector<int>& configs,
                                    const std::vector<int>& cells) {
  SimplexPoint avg(m.q(), 0.0);
  double mass = 0.0;
  for (int c : configs) {
    const double w = m.support[c].second;
    const auto& sigma = m.support[c].first;
    for (int x : cells) avg[sigma[x]] += w;
    mass += w;
  }
  const double denom = mass * static_cast<double>(cells.size());
  for (double& v : avg) v /= denom;
  return avg;
}

double tv_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return 0.5 * s;
}

struct WitnessSearch {
  const DiscreteMeasure& m;
  const std::vector<int>& cells;    // V_i
  const std::vector<int>& configs;  // S_j
  double eps;
  SimplexPoint block_mean;  // <Sigma[.|V_i]>_{mu[.|S_j]}
  double s_mass;

  std::size_t min_u() const {
    return static_cast<std::size_t>(
        std::max(1.0, std::ceil(eps * cells.size() - 1e-12)));
  }

  bool t_feasible(double mass) const { return mass >= eps * s_mass - 1e-12; }

  // Deviation vector for explicit (U, T).
  std::vector<double> deviation(const std::vector<int>& u,
                                const std::vector<int>& t) const {
    const SimplexPoint avg = weighted_block_average(m, t, u);
    std::vector<double> dev(m.q());
    for (std::size_t w = 0; w < m.q(); ++w) dev[w] = avg[w] - block_mean[w];
    return dev;
  }

  void consider(const std::vector<int>& u, const std::vector<int>& t,
                Reg4Witness& best) const {
    const auto dev = deviation(u, t);
    const double tv = tv_norm(dev);
    if (tv <= best.tv) return;
    best.tv = tv;
    best.u_cells = u;
    best.t_configs = t;
    best.violation = 0.0;
    for (std::size_t w = 0; w < m.q(); ++w)
      if (std::abs(dev[w]) > best.violation) {
        best.violation = std::abs(dev[w]);
        best.omega = static_cast<int>(w);
      }
  }

  Reg4Witness exhaustive() const {
    Reg4Witness best;
    const std::size_t nu = cells.size(), nt = configs.size();
    std::vector<int> u, t;
    for (std::uint64_t ub = 1; ub < (std::uint64_t{1} << nu); ++ub) {
      u.clear();
      for (std::size_t x = 0; x < nu; ++x)
        if ((ub >> x) & 1) u.push_back(cells[x]);
      if (u.size() < min_u()) continue;
      for (std::uint64_t tb = 1; tb < (std::uint64_t{1} << nt); ++tb) {
        t.clear();
        double mass = 0.0;
        for (std::size_t c = 0; c < nt; ++c)
          if ((tb >> c) & 1) {
            t.push_back(configs[c]);
            mass += m.support[configs[c]].second;
          }
        if (!t_feasible(mass)) continue;
        consider(u, t, best);
      }
    }
    return best;
  }

  // Greedy ascent in one spin coordinate and sign: given T pick the best
  // feasible U (top cells), given U the best feasible T (top prefix by
  // conditional value).
  Reg4Witness randomized(std::uint64_t seed, int restarts) const {
    Reg4Witness best;
    Rng rng = Rng::substream(seed, "reg4_search");
    const std::size_t nu = cells.size(), nt = configs.size();
    for (int r = 0; r < restarts; ++r) {
      for (std::size_t wq = 0; wq < m.q(); ++wq) {
        for (int sign = -1; sign <= 1; sign += 2) {
          // Random feasible start for T.
          std::vector<int> t;
          double mass = 0.0;
          while (!t_feasible(mass)) {
            const int c = configs[rng.below(nt)];
            if (std::find(t.begin(), t.end(), c) == t.end()) {
              t.push_back(c);
              mass += m.support[c].second;
            }
          }
          std::vector<int> u;
          for (int round = 0; round < 8; ++round) {
            // U-step: per-cell conditional means, take the top slice.
            std::vector<std::pair<double, int>> cell_vals;
            const double t_mass = block_mass(m, t);
            for (int x : cells) {
              double v = 0.0;
              for (int c : t)
                if (m.support[c].first[x] == static_cast<int>(wq))
                  v += m.support[c].second;
              cell_vals.emplace_back(sign * v / t_mass, x);
            }
            std::sort(cell_vals.rbegin(), cell_vals.rend());
            std::vector<int> u_next;
            for (std::size_t x = 0; x < min_u(); ++x)
              u_next.push_back(cell_vals[x].second);
            // T-step: order configs by their average over U, take the
            // shortest mass-feasible prefix.
            std::vector<std::pair<double, int>> cfg_vals;
            for (int c : configs) {
              const SimplexPoint avg = config_block_average(m, c, u_next);
              cfg_vals.emplace_back(sign * avg[wq], c);
            }
            std::sort(cfg_vals.rbegin(), cfg_vals.rend());
            std::vector<int> t_next;
            double next_mass = 0.0;
            for (const auto& [val, c] : cfg_vals) {
              t_next.push_back(c);
              next_mass += m.support[c].second;
              if (t_feasible(next_mass)) break;
            }
            if (t_next == t && u_next == u) break;
            t = std::move(t_next);
            u = std::move(u_next);
          }
          if (!u.empty()) consider(u, t, best);
        }
      }
    }
    return best;
  }
};

}  // namespace

double partition_index(const DiscreteMeasure& m, const CoordinatePartition& v,
                       const ConfigPartition& s) {
  m.validate();
  v.validate(m.n);
  s.validate(m.support.size());
  const std::size_t q = m.q();
  double index = 0.0;
  for (const auto& vb : v.blocks) {
    for (const auto& sb : s.blocks) {
      const double mass = block_mass(m, sb);
      if (mass <= 0.0) continue;
      const SimplexPoint mean = weighted_block_average(m, sb, vb);
      for (int c : sb) {
        const double w = m.support[c].second;
        const auto& sigma = m.support[c].first;
        for (int x : vb)
          for (std::size_t wq = 0; wq < q; ++wq) {
            const double ind = sigma[x] == static_cast<int>(wq) ? 1.0 : 0.0;
            const double d = ind - mean[wq];
            index += w * d * d / static_cast<double>(m.n);
          }
      }
    }
  }
  return index / static_cast<double>(q);
}

RegularityReport check_regularity(const DiscreteMeasure& m,
                                  const CoordinatePartition& v,
                                  const ConfigPartition& s, double eps,
                                  std::uint64_t budget, std::uint64_t seed) {
  m.validate();
  v.validate(m.n);
  s.validate(m.support.size());
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must be in (0,1)");
  RegularityReport report;
  report.eps = eps;
  const double n = static_cast<double>(m.n);
  for (std::size_t i = 0; i < v.blocks.size(); ++i) {
    const double lambda = v.blocks[i].size() / n;
    for (std::size_t j = 0; j < s.blocks.size(); ++j) {
      const double mass = block_mass(m, s.blocks[j]);
      if (lambda * mass <= 0.0) continue;  // REG1
      // REG3: exact diameter of the block averages.
      std::vector<SimplexPoint> avgs;
      for (int c : s.blocks[j])
        avgs.push_back(config_block_average(m, c, v.blocks[i]));
      double diameter = 0.0;
      for (std::size_t a = 0; a < avgs.size(); ++a)
        for (std::size_t b = a + 1; b < avgs.size(); ++b)
          diameter = std::max(diameter, tv_distance(avgs[a], avgs[b]));
      if (diameter >= eps) continue;  // REG3 fails; not good, no witness
      // REG4 witness search.
      WitnessSearch search{m,   v.blocks[i], s.blocks[j], eps,
                           weighted_block_average(m, s.blocks[j], v.blocks[i]),
                           mass};
      const double log_cost = static_cast<double>(v.blocks[i].size()) +
                              static_cast<double>(s.blocks[j].size());
      Reg4Witness w;
      if (log_cost <= std::log2(static_cast<double>(budget)))
        w = search.exhaustive();
      else
        w = search.randomized(seed + i * 7919 + j, 6);
      if (w.tv >= eps) {
        w.i = static_cast<int>(i);
        w.j = static_cast<int>(j);
        report.witnesses.push_back(std::move(w));
      } else {
        report.good_pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
        report.good_mass += lambda * mass;
        report.reg3_diameter.push_back(diameter);
      }
    }
  }
  report.regular = report.good_mass > 1.0 - eps;
  return report;
}

namespace {

std::vector<std::vector<int>> split_block(const std::vector<int>& block,
                                          const std::vector<int>& part) {
  std::vector<int> inside, outside;
  for (int x : block) {
    if (std::find(part.begin(), part.end(), x) != part.end())
      inside.push_back(x);
    else
      outside.push_back(x);
  }
  std::vector<std::vector<int>> out;
  if (!inside.empty()) out.push_back(std::move(inside));
  if (!outside.empty()) out.push_back(std::move(outside));
  return out;
}

// Axis-aligned grid of mesh eps/|Omega| on the simplex, so each cell has TV
// diameter at most eps/2.
std::vector<int> q_cell_key(const SimplexPoint& p, double eps) {
  const double mesh = eps / static_cast<double>(p.size());
  std::vector<int> key(p.size());
  for (std::size_t w = 0; w < p.size(); ++w) {
    const int cells = static_cast<int>(std::ceil(1.0 / mesh));
    key[w] = std::min(static_cast<int>(p[w] / mesh), cells - 1);
  }
  return key;
}

ConfigPartition q_resplit(const DiscreteMeasure& m, const CoordinatePartition& v,
                          const ConfigPartition& s, double eps) {
  ConfigPartition out;
  for (const auto& block : s.blocks) {
    std::map<std::vector<int>, std::vector<int>> by_key;
    for (int c : block) {
      std::vector<int> key;
      for (const auto& vb : v.blocks) {
        const auto cell = q_cell_key(config_block_average(m, c, vb), eps);
        key.insert(key.end(), cell.begin(), cell.end());
      }
      by_key[key].push_back(c);
    }
    for (auto& [key, configs] : by_key) out.blocks.push_back(std::move(configs));
  }
  return out;
}

}  // namespace

std::pair<CoordinatePartition, ConfigPartition> refine_once(
    const DiscreteMeasure& m, const CoordinatePartition& v,
    const ConfigPartition& s, const RegularityReport& report) {
  if (report.witnesses.empty())
    throw std::invalid_argument("refine_once needs at least one witness");
  CoordinatePartition v_new;
  for (std::size_t i = 0; i < v.blocks.size(); ++i) {
    std::vector<std::vector<int>> pieces{v.blocks[i]};
    for (const auto& w : report.witnesses) {
      if (w.i != static_cast<int>(i)) continue;
      std::vector<std::vector<int>> next;
      for (const auto& piece : pieces)
        for (auto& part : split_block(piece, w.u_cells)) next.push_back(std::move(part));
      pieces = std::move(next);
    }
    for (auto& piece : pieces) v_new.blocks.push_back(std::move(piece));
  }
  ConfigPartition s_mid;
  for (std::size_t j = 0; j < s.blocks.size(); ++j) {
    std::vector<std::vector<int>> pieces{s.blocks[j]};
    for (const auto& w : report.witnesses) {
      if (w.j != static_cast<int>(j)) continue;
      std::vector<std::vector<int>> next;
      for (const auto& piece : pieces)
        for (auto& part : split_block(piece, w.t_configs)) next.push_back(std::move(part));
      pieces = std::move(next);
    }
    for (auto& piece : pieces) s_mid.blocks.push_back(std::move(piece));
  }
  return {std::move(v_new), q_resplit(m, v_new, s_mid, report.eps)};
}

DecompositionResult regularity_decomposition(const DiscreteMeasure& m, double eps,
                                             const CoordinatePartition& v0,
                                             const ConfigPartition& s0,
                                             std::uint64_t budget,
                                             std::uint64_t seed) {
  m.validate();
  v0.validate(m.n);
  s0.validate(m.support.size());
  const double q = static_cast<double>(m.q());
  const long max_steps =
      static_cast<long>(std::ceil(std::pow(eps, -5.0) * q * q * q));
  DecompositionResult result;
  result.v = v0;
  result.s = q_resplit(m, v0, s0, eps);
  for (long step = 0;; ++step) {
    result.index_trace.push_back(partition_index(m, result.v, result.s));
    result.report = check_regularity(m, result.v, result.s, eps, budget,
                                     seed + static_cast<std::uint64_t>(step));
    if (result.report.regular || result.report.witnesses.empty()) break;
    if (step >= max_steps) break;
    auto [v_next, s_next] = refine_once(m, result.v, result.s, result.report);
    result.v = std::move(v_next);
    result.s = std::move(s_next);
    result.steps = static_cast<int>(step) + 1;
  }
  return result;
}

EmbeddedMeasure conditional_measure(const DiscreteMeasure& m,
                                    const CoordinatePartition& v,
                                    const ConfigPartition& s) {
  m.validate();
  v.validate(m.n);
  s.validate(m.support.size());
  EmbeddedMeasure out;
  out.alphabet = m.alphabet;
  out.n = m.n;
  for (const auto& sb : s.blocks) {
    const double mass = block_mass(m, sb);
    if (mass <= 0.0) continue;
    EmbeddedMeasure::Atom atom;
    atom.weight = mass;
    atom.step.assign(m.n, SimplexPoint());
    for (const auto& vb : v.blocks) {
      const SimplexPoint avg = weighted_block_average(m, sb, vb);
      for (int x : vb) atom.step[x] = avg;
    }
    out.atoms.push_back(std::move(atom));
  }
  return out;
}

}  // namespace fgl
