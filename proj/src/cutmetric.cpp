#include "fgl/cutmetric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fgl/lp.hpp"
#include "fgl/rng.hpp"
#include "fgl/transport.hpp"

namespace fgl {

Coupling Coupling::independent(const EmbeddedMeasure& mu, const EmbeddedMeasure& nu) {
  Coupling g;
  g.rows = static_cast<int>(mu.atoms.size());
  g.cols = static_cast<int>(nu.atoms.size());
  g.w.resize(static_cast<std::size_t>(g.rows) * g.cols);
  for (int i = 0; i < g.rows; ++i)
    for (int j = 0; j < g.cols; ++j)
      g.at(i, j) = mu.atoms[i].weight * nu.atoms[j].weight;
  return g;
}

namespace {

// delta[(pair, x, w)] = (mu_i(x,w) - nu_j(x,w)) / n for pair = (i,j).
struct PairDeltas {
  int n = 0;
  std::size_t q = 0;
  int rows = 0, cols = 0;
  std::vector<double> delta;  // pair-major, then cell, then spin

  static PairDeltas build(const EmbeddedMeasure& mu, const EmbeddedMeasure& nu) {
    PairDeltas pd;
    pd.n = mu.n;
    pd.q = mu.q();
    pd.rows = static_cast<int>(mu.atoms.size());
    pd.cols = static_cast<int>(nu.atoms.size());
    pd.delta.resize(static_cast<std::size_t>(pd.rows) * pd.cols * pd.n * pd.q);
    const double inv_n = 1.0 / static_cast<double>(pd.n);
    std::size_t idx = 0;
    for (int i = 0; i < pd.rows; ++i)
      for (int j = 0; j < pd.cols; ++j)
        for (int x = 0; x < pd.n; ++x)
          for (std::size_t w = 0; w < pd.q; ++w)
            pd.delta[idx++] =
                (mu.atoms[i].step[x][w] - nu.atoms[j].step[x][w]) * inv_n;
    return pd;
  }

  std::size_t pair_count() const {
    return static_cast<std::size_t>(rows) * cols;
  }

  // e[pair][x] = (1/2) sum_w s_w delta[pair][x][w]
  std::vector<double> signed_cells(const std::vector<int>& signs) const {
    std::vector<double> e(pair_count() * n);
    std::size_t src = 0;
    std::size_t dst = 0;
    for (std::size_t p = 0; p < pair_count(); ++p)
      for (int x = 0; x < n; ++x) {
        double v = 0.0;
        for (std::size_t w = 0; w < q; ++w) v += signs[w] * delta[src++];
        e[dst++] = 0.5 * v;
      }
    return e;
  }
};

std::vector<std::vector<int>> sign_patterns(std::size_t q) {
  // All of {+1,-1}^Omega.  The positive-part collapse of B breaks the s/-s
  // symmetry, so both halves genuinely matter.
  std::vector<std::vector<int>> out;
  const std::size_t count = std::size_t{1} << q;
  for (std::size_t bits = 0; bits < count; ++bits) {
    std::vector<int> s(q, 1);
    for (std::size_t w = 0; w < q; ++w)
      if ((bits >> w) & 1) s[w] = -1;
    out.push_back(std::move(s));
  }
  return out;
}

CutSupResult exact_sup(const Coupling& gamma, const PairDeltas& pd,
                       const CutOptions& opts) {
  std::vector<std::size_t> live;  // pairs with positive coupling weight
  for (std::size_t p = 0; p < pd.pair_count(); ++p)
    if (gamma.w[p] > 0.0) live.push_back(p);
  if (static_cast<int>(live.size()) > opts.pairs_cap)
    throw CapExceeded("exact cut_sup: too many coupled atom pairs");
  if (pd.n > opts.n_cap) throw CapExceeded("exact cut_sup: too many coordinates");

  CutSupResult best;
  best.exact = true;
  best.signs.assign(pd.q, 1);
  for (const auto& signs : sign_patterns(pd.q)) {
    const auto e = pd.signed_cells(signs);
    std::vector<double> d(live.size(), 0.0);
    std::vector<char> in_u(pd.n, 0);
    std::uint64_t gray = 0;
    const std::uint64_t total = std::uint64_t{1} << pd.n;
    for (std::uint64_t it = 1; it < total; ++it) {
      const std::uint64_t next = it ^ (it >> 1);
      const int x = std::countr_zero(gray ^ next);
      const double flip = in_u[x] ? -1.0 : 1.0;
      in_u[x] ^= 1;
      gray = next;
      for (std::size_t li = 0; li < live.size(); ++li)
        d[li] += flip * e[live[li] * pd.n + x];
      double value = 0.0;
      for (std::size_t li = 0; li < live.size(); ++li)
        if (d[li] > 0.0) value += gamma.w[live[li]] * d[li];
      if (value > best.value) {
        best.value = value;
        best.signs = signs;
        best.u_cells.clear();
        for (int c = 0; c < pd.n; ++c)
          if (in_u[c]) best.u_cells.push_back(c);
        best.b_pairs.clear();
        for (std::size_t li = 0; li < live.size(); ++li)
          if (d[li] > 0.0)
            best.b_pairs.emplace_back(static_cast<int>(live[li]) / pd.cols,
                                      static_cast<int>(live[li]) % pd.cols);
      }
    }
  }
  return best;
}

CutSupResult evaluate_functional(const Coupling& gamma, const PairDeltas& pd,
                                 const std::vector<int>& u_cells,
                                 const std::vector<int>& signs) {
  const auto e = pd.signed_cells(signs);
  CutSupResult r;
  r.signs = signs;
  r.u_cells = u_cells;
  for (std::size_t p = 0; p < pd.pair_count(); ++p) {
    if (gamma.w[p] <= 0.0) continue;
    double d = 0.0;
    for (int x : u_cells) d += e[p * pd.n + x];
    if (d > 0.0) {
      r.value += gamma.w[p] * d;
      r.b_pairs.emplace_back(static_cast<int>(p) / pd.cols,
                             static_cast<int>(p) % pd.cols);
    }
  }
  return r;
}

// Cache of the signed per-cell tables, keyed by the sign pattern bits.
struct SignedCellCache {
  const PairDeltas* pd;
  std::map<std::vector<int>, std::vector<double>> cache;

  const std::vector<double>& get(const std::vector<int>& signs) {
    auto it = cache.find(signs);
    if (it == cache.end())
      it = cache.emplace(signs, pd->signed_cells(signs)).first;
    return it->second;
  }
};

CutSupResult alternating_sup(const Coupling& gamma, const PairDeltas& pd,
                             const CutOptions& opts, std::uint64_t seed) {
  const std::size_t pairs = pd.pair_count();
  CutSupResult best;
  best.signs.assign(pd.q, 1);
  SignedCellCache cells{&pd, {}};

  auto ascend = [&](std::vector<int> signs, std::vector<char> in_u) {
    std::vector<char> in_b(pairs, 0);
    double value = 0.0;
    for (int round = 0; round < 40; ++round) {
      const auto& e = cells.get(signs);
      // B-step: keep pairs whose signed mass over U is positive.
      for (std::size_t p = 0; p < pairs; ++p) {
        if (gamma.w[p] <= 0.0) {
          in_b[p] = 0;
          continue;
        }
        double d = 0.0;
        const double* ep = &e[p * pd.n];
        for (int x = 0; x < pd.n; ++x)
          if (in_u[x]) d += ep[x];
        in_b[p] = d > 0.0;
      }
      // U-step: keep cells with positive weighted contribution over B.
      std::vector<double> cell_gain(pd.n, 0.0);
      for (std::size_t p = 0; p < pairs; ++p) {
        if (!in_b[p]) continue;
        const double* ep = &e[p * pd.n];
        for (int x = 0; x < pd.n; ++x) cell_gain[x] += gamma.w[p] * ep[x];
      }
      for (int x = 0; x < pd.n; ++x) in_u[x] = cell_gain[x] > 0.0;
      // Sign step from the raw spin components.
      std::vector<double> comp(pd.q, 0.0);
      for (std::size_t p = 0; p < pairs; ++p) {
        if (!in_b[p]) continue;
        for (int x = 0; x < pd.n; ++x) {
          if (!in_u[x]) continue;
          const double* d = &pd.delta[(p * pd.n + x) * pd.q];
          for (std::size_t w = 0; w < pd.q; ++w) comp[w] += gamma.w[p] * d[w];
        }
      }
      std::vector<int> next_signs(pd.q);
      for (std::size_t w = 0; w < pd.q; ++w)
        next_signs[w] = comp[w] >= 0.0 ? 1 : -1;
      double next_value = 0.0;
      for (std::size_t w = 0; w < pd.q; ++w)
        next_value += 0.5 * next_signs[w] * comp[w];
      const bool done = next_signs == signs && next_value <= value + 1e-14;
      signs = std::move(next_signs);
      value = next_value;
      if (done) break;
    }
    if (value > best.value) {
      best.value = value;
      best.signs = signs;
      best.u_cells.clear();
      for (int x = 0; x < pd.n; ++x)
        if (in_u[x]) best.u_cells.push_back(x);
      best.b_pairs.clear();
      for (std::size_t p = 0; p < pairs; ++p)
        if (in_b[p])
          best.b_pairs.emplace_back(static_cast<int>(p) / pd.cols,
                                    static_cast<int>(p) % pd.cols);
    }
  };

  // Deterministic starts per sign pattern: the full cell set, plus the best
  // cell set of each heavy pair on its own.
  std::vector<std::size_t> heavy;
  for (std::size_t p = 0; p < pairs; ++p)
    if (gamma.w[p] > 0.0) heavy.push_back(p);
  std::sort(heavy.begin(), heavy.end(),
            [&](std::size_t a, std::size_t b) { return gamma.w[a] > gamma.w[b]; });
  if (heavy.size() > 24) heavy.resize(24);
  for (const auto& signs : sign_patterns(pd.q)) {
    ascend(signs, std::vector<char>(pd.n, 1));
    const auto& e = cells.get(signs);
    for (std::size_t p : heavy) {
      std::vector<char> in_u(pd.n, 0);
      bool any = false;
      for (int x = 0; x < pd.n; ++x) {
        in_u[x] = e[p * pd.n + x] > 0.0;
        any |= in_u[x];
      }
      if (any) ascend(signs, std::move(in_u));
    }
  }

  Rng rng = Rng::substream(seed, "cut_sup_restarts");
  for (int restart = 0; restart < opts.restarts; ++restart) {
    std::vector<int> signs(pd.q);
    for (std::size_t w = 0; w < pd.q; ++w) signs[w] = rng.below(2) ? 1 : -1;
    std::vector<char> in_u(pd.n);
    for (int x = 0; x < pd.n; ++x) in_u[x] = static_cast<char>(rng.below(2));
    ascend(std::move(signs), std::move(in_u));
  }
  return best;
}

// One accumulated cut constraint for the coupling LP: the positive part of
// the per-pair signed mass, which is the tight B for any nonnegative gamma.
struct CutRow {
  std::vector<int> u_cells;
  std::vector<int> signs;
  std::vector<double> coeff;  // per pair, >= 0
};

CutRow make_cut_row(const PairDeltas& pd, const std::vector<int>& u_cells,
                    const std::vector<int>& signs) {
  CutRow row;
  row.u_cells = u_cells;
  row.signs = signs;
  row.coeff.assign(pd.pair_count(), 0.0);
  const auto e = pd.signed_cells(signs);
  for (std::size_t p = 0; p < pd.pair_count(); ++p) {
    double d = 0.0;
    for (int x : u_cells) d += e[p * pd.n + x];
    row.coeff[p] = std::max(d, 0.0);
  }
  return row;
}

// min over couplings of the max over the accumulated cut rows.
struct CouplingLp {
  const EmbeddedMeasure* mu;
  const EmbeddedMeasure* nu;

  std::pair<Coupling, double> solve(const std::vector<CutRow>& cuts) const {
    const int rows = static_cast<int>(mu->atoms.size());
    const int cols = static_cast<int>(nu->atoms.size());
    const std::size_t pairs = static_cast<std::size_t>(rows) * cols;
    if (rows == 1 || cols == 1) {
      // The coupling is forced by the marginals.
      Coupling g = Coupling::independent(*mu, *nu);
      double value = 0.0;
      for (const auto& cut : cuts) {
        double v = 0.0;
        for (std::size_t p = 0; p < pairs; ++p) v += cut.coeff[p] * g.w[p];
        value = std::max(value, v);
      }
      return {std::move(g), value};
    }
    LpProblem lp;
    lp.num_vars = static_cast<int>(pairs) + 1;  // gamma entries then t
    lp.objective.assign(lp.num_vars, 0.0);
    lp.objective.back() = 1.0;
    for (int i = 0; i < rows; ++i) {
      LpProblem::Row row;
      row.coeff.assign(lp.num_vars, 0.0);
      for (int j = 0; j < cols; ++j) row.coeff[i * cols + j] = 1.0;
      row.rhs = mu->atoms[i].weight;
      row.equality = true;
      lp.rows.push_back(std::move(row));
    }
    for (int j = 0; j < cols; ++j) {
      LpProblem::Row row;
      row.coeff.assign(lp.num_vars, 0.0);
      for (int i = 0; i < rows; ++i) row.coeff[i * cols + j] = 1.0;
      row.rhs = nu->atoms[j].weight;
      row.equality = true;
      lp.rows.push_back(std::move(row));
    }
    for (const auto& cut : cuts) {
      LpProblem::Row row;
      row.coeff.assign(lp.num_vars, 0.0);
      for (std::size_t p = 0; p < pairs; ++p) row.coeff[p] = cut.coeff[p];
      row.coeff.back() = -1.0;
      row.rhs = 0.0;
      lp.rows.push_back(std::move(row));
    }
    const LpSolution sol = solve_lp(lp);
    if (sol.status != LpSolution::Status::kOptimal)
      throw std::runtime_error("coupling LP failed");
    Coupling g;
    g.rows = rows;
    g.cols = cols;
    g.w.assign(sol.x.begin(), sol.x.end() - 1);
    return {std::move(g), sol.x.back()};
  }
};

}  // namespace

CutSupResult cut_sup(const Coupling& gamma, const EmbeddedMeasure& mu,
                     const EmbeddedMeasure& nu, CutMode mode,
                     const CutOptions& opts) {
  mu.validate();
  nu.validate();
  if (mu.n != nu.n || mu.alphabet.symbols != nu.alphabet.symbols)
    throw std::invalid_argument("cut_sup requires matching spaces");
  const PairDeltas pd = PairDeltas::build(mu, nu);
  if (mode == CutMode::kExact) return exact_sup(gamma, pd, opts);
  return alternating_sup(gamma, pd, opts, opts.seed);
}

CutDistanceResult strong_cut_distance(const EmbeddedMeasure& mu,
                                      const EmbeddedMeasure& nu, CutMode mode,
                                      const CutOptions& opts) {
  mu.validate();
  nu.validate();
  if (mu.n != nu.n || mu.alphabet.symbols != nu.alphabet.symbols)
    throw std::invalid_argument("cut distance requires matching spaces");
  const PairDeltas pd = PairDeltas::build(mu, nu);
  if (mode == CutMode::kExact) {
    if (static_cast<int>(pd.pair_count()) > opts.pairs_cap)
      throw CapExceeded("exact strong distance: too many atom pairs");
    if (pd.n > opts.n_cap)
      throw CapExceeded("exact strong distance: too many coordinates");
  }
  if (pd.pair_count() > opts.lp_pairs_cap &&
      mu.atoms.size() > 1 && nu.atoms.size() > 1)
    throw CapExceeded("strong distance: coupling LP would be too large");

  CouplingLp lp{&mu, &nu};
  std::vector<CutRow> cuts;
  CutDistanceResult result;
  std::uint64_t sup_seed = opts.seed;
  for (int round = 0; round < opts.max_rounds; ++round) {
    auto [gamma, lp_value] = lp.solve(cuts);
    CutOptions sup_opts = opts;
    sup_opts.seed = sup_seed++;
    CutSupResult sup;
    if (mode == CutMode::kExact) {
      sup = exact_sup(gamma, pd, sup_opts);
    } else {
      sup = alternating_sup(gamma, pd, sup_opts, sup_opts.seed);
      // Never report below the LP value: the working cuts are exact
      // functionals of this coupling.
      for (const auto& cut : cuts) {
        const CutSupResult known = evaluate_functional(gamma, pd, cut.u_cells, cut.signs);
        if (known.value > sup.value) sup = known;
      }
    }
    result.rounds = round + 1;
    result.coupling = std::move(gamma);
    result.value = sup.value;
    result.sup_exact = sup.exact;
    if (sup.value <= lp_value + opts.tol) {
      result.coupling_optimal = true;
      break;
    }
    cuts.push_back(make_cut_row(pd, sup.u_cells, sup.signs));
  }
  result.cut_count = static_cast<int>(cuts.size());
  return result;
}

namespace {

EmbeddedMeasure apply_coordinate_permutation(const EmbeddedMeasure& m,
                                             const std::vector<int>& perm) {
  EmbeddedMeasure out = m;
  for (std::size_t a = 0; a < m.atoms.size(); ++a)
    for (int x = 0; x < m.n; ++x) out.atoms[a].step[x] = m.atoms[a].step[perm[x]];
  return out;
}

}  // namespace

CutDistanceResult weak_cut_distance(const EmbeddedMeasure& mu,
                                    const EmbeddedMeasure& nu, CutMode mode,
                                    const CutOptions& opts) {
  mu.validate();
  nu.validate();
  if (mu.n != nu.n) throw std::invalid_argument("weak distance requires equal n");
  const int n = mu.n;
  CutDistanceResult best;
  best.value = std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<int>& perm) {
    const EmbeddedMeasure permuted = apply_coordinate_permutation(nu, perm);
    CutDistanceResult r = strong_cut_distance(mu, permuted, mode, opts);
    if (r.value < best.value) {
      best = std::move(r);
      best.permutation = perm;
    }
  };

  if (mode == CutMode::kExact) {
    if (n > opts.weak_n_cap)
      throw CapExceeded("exact weak distance: too many coordinates to permute");
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      consider(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    std::vector<int> identity(n);
    std::iota(identity.begin(), identity.end(), 0);
    consider(identity);
    // Match coordinates by their marginals, then try local swaps.
    std::vector<std::vector<double>> cost(n, std::vector<double>(n));
    for (int x = 0; x < n; ++x) {
      SimplexPoint mx(mu.q(), 0.0);
      for (const auto& a : mu.atoms)
        for (std::size_t w = 0; w < mu.q(); ++w) mx[w] += a.weight * a.step[x][w];
      for (int y = 0; y < n; ++y) {
        SimplexPoint ny(nu.q(), 0.0);
        for (const auto& a : nu.atoms)
          for (std::size_t w = 0; w < nu.q(); ++w) ny[w] += a.weight * a.step[y][w];
        cost[x][y] = tv_distance(mx, ny);
      }
    }
    const AssignmentResult match = solve_assignment(cost);
    std::vector<int> matched(n);
    for (int y = 0; y < n; ++y) matched[match.row_of_col[y]] = y;
    if (matched != identity) consider(matched);
    Rng rng = Rng::substream(opts.seed, "weak_swaps");
    std::vector<int> current = best.permutation;
    for (int prop = 0; prop < opts.swap_proposals; ++prop) {
      std::vector<int> cand = current;
      const int a = static_cast<int>(rng.below(n));
      const int b = static_cast<int>(rng.below(n));
      if (a == b) continue;
      std::swap(cand[a], cand[b]);
      const double before = best.value;
      consider(cand);
      if (best.value < before) current = cand;
    }
  }
  best.permutation_restricted = true;
  return best;
}

}  // namespace fgl
