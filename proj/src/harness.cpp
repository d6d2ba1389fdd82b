#include "fgl/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include "fgl/bethe.hpp"
#include "fgl/bp.hpp"
#include "fgl/cutmetric.hpp"
#include "fgl/diagnostics.hpp"
#include "fgl/gibbs.hpp"
#include "fgl/io.hpp"
#include "fgl/regularity.hpp"

namespace fgl {

namespace {

struct ConfigError : std::runtime_error {
  std::string field;
  ConfigError(const std::string& field_, const std::string& msg)
      : std::runtime_error(msg), field(field_) {}
};

Json error_payload(int code, const std::string& message,
                   const std::string& field = "") {
  Json err{{"code", code}, {"message", message}};
  if (!field.empty()) err["field"] = field;
  return Json{{"error", err}};
}

std::uint64_t require_seed(const Json& config) {
  if (!config.contains("seed"))
    throw ConfigError("seed", "stochastic operation requires an explicit seed");
  return config.at("seed").get<std::uint64_t>();
}

ModelSpec resolve_model(const Json& config) {
  if (config.contains("preset"))
    return parse_preset(config.at("preset").get<std::string>());
  if (config.contains("model")) return model_spec_from_json(config.at("model"));
  if (config.contains("model_file"))
    return model_spec_from_json(load_json_file(config.at("model_file")));
  throw ConfigError("model", "operation needs 'preset', 'model' or 'model_file'");
}

FactorGraph resolve_graph(const Json& config, const Json& params) {
  if (params.contains("graph")) return factor_graph_from_json(params.at("graph"));
  if (params.contains("graph_file"))
    return factor_graph_from_json(load_json_file(params.at("graph_file")));
  if (config.contains("preset") || config.contains("model") ||
      config.contains("model_file")) {
    const ModelSpec spec = resolve_model(config);
    if (!params.contains("n"))
      throw ConfigError("params.n", "sampling a graph needs 'n'");
    return sample_factor_graph(spec, params.at("n").get<int>(),
                               require_seed(config));
  }
  throw ConfigError("params.graph", "operation needs a graph or a model");
}

EmbeddedMeasure resolve_measure(const Json& params, const std::string& key) {
  if (params.contains(key)) return embedded_measure_from_json(params.at(key));
  const std::string file_key = key + "_file";
  if (params.contains(file_key))
    return embedded_measure_from_json(load_json_file(params.at(file_key)));
  throw ConfigError("params." + key, "operation needs '" + key + "'");
}

std::string hex_encode(const std::string& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 15]);
  }
  return out;
}

std::string hex_decode(const std::string& hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("bad hex digit");
  };
  std::string out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2)
    out.push_back(static_cast<char>((nibble(hex[i]) << 4) | nibble(hex[i + 1])));
  return out;
}

Json population_to_json(const Population& pop) {
  Json members = Json::array();
  for (const auto& m : pop.members) {
    Json row = Json::array();
    for (double v : m) row.push_back(double_to_string(v));
    members.push_back(row);
  }
  return Json{{"generation", pop.generation}, {"members", members}};
}

Population population_from_json(const Json& j) {
  Population pop;
  pop.generation = j.value("generation", 0);
  for (const auto& row : j.at("members")) {
    SimplexPoint p;
    for (const auto& v : row) p.push_back(double_from_json(v));
    pop.members.push_back(std::move(p));
  }
  return pop;
}

Population resolve_boundary(const Json& config, const Json& params,
                            const ModelSpec& spec) {
  if (params.contains("boundary_file"))
    return population_from_json(load_json_file(params.at("boundary_file")));
  const std::size_t q = spec.alphabet.size();
  const std::size_t size = params.value("pop_size", 10000);
  const int sweeps = params.value("pop_sweeps", 100);
  Population init =
      params.contains("jitter_alpha")
          ? Population::jittered_init(size, q,
                                      params.at("jitter_alpha").get<double>(),
                                      require_seed(config))
          : Population::uniform_init(size, q);
  if (sweeps <= 0) return init;
  return population_dynamics(spec, init, sweeps,
                             Rng::substream(require_seed(config), "boundary")
                                 .next_u64());
}

Json estimate_to_json(const FreeEnergyEstimate& est) {
  return Json{{"value", est.value},
              {"se", est.std_error},
              {"samples", est.samples},
              {"method", est.method}};
}

Json diagnostic_to_json(const DiagnosticResult& r) {
  return Json{
      {"statistic", r.statistic}, {"se", r.std_error}, {"samples", r.samples}};
}

Json dispatch(const Json& config) {
  const std::string op = config.at("op").get<std::string>();
  const Json params = config.value("params", Json::object());

  if (op == "gen") {
    const ModelSpec spec = resolve_model(config);
    if (!params.contains("n")) throw ConfigError("params.n", "gen needs 'n'");
    return Json{{"graph", to_json(sample_factor_graph(
                              spec, params.at("n").get<int>(),
                              require_seed(config)))}};
  }

  if (op == "exact") {
    const FactorGraph g = resolve_graph(config, params);
    const std::uint64_t cap = params.value("cap", kDefaultStateCap);
    const std::string what = params.value("what", "logz");
    if (what == "logz") {
      const PartitionFunction pf = partition_function(g, cap);
      Json out{{"log_z", pf.log_z}};
      if (pf.z) out["z"] = *pf.z;
      return out;
    }
    if (what == "marginal") {
      const auto vars = params.at("vars").get<std::vector<int>>();
      return Json{{"vars", vars}, {"marginal", gibbs_marginal(g, vars, cap)}};
    }
    if (what == "sample") {
      const int count = params.value("count", 1);
      Json rows = Json::array();
      for (const auto& s : gibbs_sample(g, count, require_seed(config), cap))
        rows.push_back(s);
      return Json{{"samples", rows}};
    }
    if (what == "conditional") {
      const int target = params.at("target").get<int>();
      std::vector<Clamp> clamps;
      for (const auto& c : params.value("clamped", Json::array()))
        clamps.push_back({c.at(0).get<int>(), c.at(1).get<int>()});
      return Json{{"target", target},
                  {"distribution", conditional_marginal(g, target, clamps, cap)}};
    }
    throw ConfigError("params.what", "unknown exact computation: " + what);
  }

  if (op == "bp") {
    const FactorGraph g = resolve_graph(config, params);
    const BpResult r =
        bp_run(g, params.value("damping", 0.5), params.value("tol", 1e-10),
               params.value("max_iters", 10000));
    Json marginals = Json::array();
    for (const auto& m : r.marginals) marginals.push_back(m);
    return Json{{"marginals", marginals},
                {"converged", r.converged},
                {"residual", r.residual},
                {"iterations", r.iterations}};
  }

  if (op == "popdyn") {
    const ModelSpec spec = resolve_model(config);
    const std::size_t q = spec.alphabet.size();
    const std::size_t size = params.value("pop_size", 10000);
    const int sweeps = params.value("sweeps", 100);
    const std::uint64_t seed = require_seed(config);
    Population init =
        params.contains("jitter_alpha")
            ? Population::jittered_init(
                  size, q, params.at("jitter_alpha").get<double>(), seed)
            : Population::uniform_init(size, q);
    const Population out = population_dynamics(spec, init, sweeps, seed);
    SimplexPoint mean(q, 0.0);
    for (const auto& m : out.members)
      for (std::size_t w = 0; w < q; ++w) mean[w] += m[w] / out.members.size();
    Json payload{{"generation", out.generation},
                 {"pop_size", out.members.size()},
                 {"mean_point", mean}};
    if (params.contains("pop_out"))
      write_json_file(params.at("pop_out"), population_to_json(out));
    else if (params.value("emit_members", false))
      payload["population"] = population_to_json(out);
    return payload;
  }

  if (op == "bethe") {
    const ModelSpec spec = resolve_model(config);
    const Population boundary = resolve_boundary(config, params, spec);
    const long samples = params.value("samples", 100000L);
    const std::uint64_t seed =
        Rng::substream(require_seed(config), "bethe").next_u64();
    const std::string form = params.value("form", "tree");
    if (form == "tree")
      return estimate_to_json(bethe_free_energy(spec, boundary, samples, seed));
    if (form == "poisson")
      return estimate_to_json(poissonized_bethe(spec, boundary, samples, seed));
    throw ConfigError("params.form", "unknown bethe form: " + form);
  }

  if (op == "ass") {
    const ModelSpec spec = resolve_model(config);
    const int n_max = params.value("n_max", 10);
    const int seeds_per_n = params.value("seeds_per_n", 200);
    const auto incs =
        ass_increments(spec, n_max, seeds_per_n, require_seed(config),
                       params.value("cap", kDefaultStateCap));
    Json rows = Json::array();
    double total = 0.0, var = 0.0;
    for (const auto& inc : incs) {
      rows.push_back(Json{{"n", inc.n},
                          {"increment", inc.increment},
                          {"se", inc.std_error},
                          {"ln_z31", inc.ln_z31},
                          {"ln_z31_se", inc.ln_z31_se},
                          {"ln_z21", inc.ln_z21},
                          {"ln_z21_se", inc.ln_z21_se},
                          {"samples", inc.samples}});
      total += inc.increment;
      var += inc.std_error * inc.std_error;
    }
    return Json{{"increments", rows},
                {"telescoped_mean", total / n_max},
                {"telescoped_se", std::sqrt(var) / n_max}};
  }

  if (op == "fexact") {
    const ModelSpec spec = resolve_model(config);
    if (!params.contains("n")) throw ConfigError("params.n", "fexact needs 'n'");
    const int n = params.at("n").get<int>();
    const int count = params.value("seeds", 1);
    const std::uint64_t seed = require_seed(config);
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < count; ++i)
      seeds.push_back(Rng::substream(seed, "fexact", i).next_u64());
    return estimate_to_json(
        free_energy_exact(spec, n, seeds, params.value("cap", kDefaultStateCap)));
  }

  if (op == "cutdist") {
    const EmbeddedMeasure a = resolve_measure(params, "measure_a");
    const EmbeddedMeasure b = resolve_measure(params, "measure_b");
    CutOptions opts;
    opts.restarts = params.value("restarts", opts.restarts);
    opts.max_rounds = params.value("max_rounds", opts.max_rounds);
    opts.seed = config.value("seed", 0);
    const std::string metric = params.value("metric", "strong");
    const CutMode mode = params.value("mode", std::string("heuristic")) == "exact"
                             ? CutMode::kExact
                             : CutMode::kHeuristic;
    const CutDistanceResult r = metric == "weak"
                                    ? weak_cut_distance(a, b, mode, opts)
                                    : strong_cut_distance(a, b, mode, opts);
    Json out{{"value", r.value},
             {"metric", metric},
             {"mode", mode == CutMode::kExact ? "exact" : "heuristic"},
             {"coupling_optimal", r.coupling_optimal},
             {"sup_exact", r.sup_exact},
             {"cut_count", r.cut_count},
             {"rounds", r.rounds}};
    if (metric == "weak") {
      out["permutation"] = r.permutation;
      out["permutation_restricted"] = r.permutation_restricted;
    }
    return out;
  }

  if (op == "regularity") {
    const EmbeddedMeasure em = resolve_measure(params, "measure");
    // The decomposition operates on discrete measures.
    DiscreteMeasure m;
    m.alphabet = em.alphabet;
    m.n = em.n;
    for (const auto& atom : em.atoms) {
      Assignment sigma(em.n);
      for (int x = 0; x < em.n; ++x) {
        int arg = 0;
        for (std::size_t w = 1; w < em.q(); ++w)
          if (atom.step[x][w] > atom.step[x][arg]) arg = static_cast<int>(w);
        if (atom.step[x][arg] < 1.0 - 1e-9)
          throw ConfigError("params.measure",
                            "regularity needs a discrete (point-mass) measure");
        sigma[x] = arg;
      }
      m.support.emplace_back(std::move(sigma), atom.weight);
    }
    const double eps = params.value("eps", 0.1);
    const std::uint64_t budget = params.value("budget", std::uint64_t{1} << 20);
    const auto result = regularity_decomposition(
        m, eps, trivial_coordinate_partition(m.n),
        trivial_config_partition(m.support.size()), budget,
        config.value("seed", 0));
    Json v_blocks = Json::array();
    for (const auto& b : result.v.blocks) v_blocks.push_back(b);
    Json s_blocks = Json::array();
    for (const auto& b : result.s.blocks) s_blocks.push_back(b);
    return Json{{"steps", result.steps},
                {"regular", result.report.regular},
                {"good_mass", result.report.good_mass},
                {"index_trace", result.index_trace},
                {"coordinate_blocks", v_blocks},
                {"config_blocks", s_blocks}};
  }

  if (op == "diagnose") {
    const std::string which = params.value("which", "");
    if (which == "factorization") {
      const FactorGraph g = resolve_graph(config, params);
      return diagnostic_to_json(factorization_statistic(
          g, params.value("k", 2), params.value("tuples", 50),
          Rng::substream(require_seed(config), "diag").next_u64()));
    }
    if (which == "nonrec") {
      const FactorGraph g = resolve_graph(config, params);
      return diagnostic_to_json(nonreconstruction_statistic(
          g, params.value("root", 0), params.value("ell", 1),
          params.value("samples", 200L),
          Rng::substream(require_seed(config), "diag").next_u64()));
    }
    if (which == "census") {
      const ModelSpec spec = resolve_model(config);
      const DiagnosticResult r = census_distance(
          spec, params.value("n", 1000), params.value("ell", 1),
          params.value("graph_seeds", 10), params.value("tree_samples", 10000L),
          require_seed(config));
      return diagnostic_to_json(r);
    }
    if (which == "census_table") {
      const FactorGraph g = resolve_graph(config, params);
      Json rows = Json::array();
      for (const auto& [code, f] : local_census(g, params.value("ell", 1)))
        rows.push_back(Json{{"code_hex", hex_encode(code)}, {"frequency", f}});
      return Json{{"census", rows}};
    }
    if (which == "bpdist") {
      const FactorGraph g = resolve_graph(config, params);
      const ModelSpec spec = resolve_model(config);
      const Population reference = resolve_boundary(config, params, spec);
      CanonicalCode code;
      if (params.contains("tree_code_hex"))
        code = hex_decode(params.at("tree_code_hex").get<std::string>());
      else
        code = params.value("tree_code", std::string("V()"));
      return diagnostic_to_json(
          bp_empirical_distance(g, code, params.value("ell", 1), reference));
    }
    if (which == "cavity") {
      const FactorGraph g = resolve_graph(config, params);
      return diagnostic_to_json(cavity_consistency(g));
    }
    throw ConfigError("params.which", "unknown diagnostic: " + which);
  }

  throw ConfigError("op", "unknown operation: " + op);
}

}  // namespace

RunOutcome run_config(const nlohmann::json& config) {
  RunOutcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    if (!config.contains("op"))
      throw ConfigError("op", "config is missing 'op'");
    if (config.at("op").get<std::string>() == "sweep") return run_sweep(config);
    const Json payload = dispatch(config);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    out.record = Json{{"config", config},
                      {"version", kVersion},
                      {"wall_time_sec", wall},
                      {"results", payload}};
    if (config.contains("out")) write_json_file(config.at("out"), out.record);
  } catch (const ConfigError& e) {
    out.exit_code = kBadConfig;
    out.record = error_payload(kBadConfig, e.what(), e.field);
  } catch (const StateCapExceeded& e) {
    out.exit_code = kCapExceeded;
    out.record = error_payload(kCapExceeded, e.what());
  } catch (const CapExceeded& e) {
    out.exit_code = kCapExceeded;
    out.record = error_payload(kCapExceeded, e.what());
  } catch (const nlohmann::json::exception& e) {
    out.exit_code = kBadConfig;
    out.record = error_payload(kBadConfig, e.what());
  } catch (const std::invalid_argument& e) {
    out.exit_code = kBadConfig;
    out.record = error_payload(kBadConfig, e.what());
  } catch (const std::exception& e) {
    out.exit_code = kRuntimeError;
    out.record = error_payload(kRuntimeError, e.what());
  }
  return out;
}

RunOutcome run_sweep(const nlohmann::json& config) {
  RunOutcome out;
  const auto start = std::chrono::steady_clock::now();
  if (!config.contains("entries") || !config.at("entries").is_array() ||
      config.at("entries").empty()) {
    out.exit_code = kBadConfig;
    out.record = error_payload(kBadConfig, "sweep needs a non-empty 'entries' array",
                               "entries");
    return out;
  }
  const auto& entries = config.at("entries");
  std::string op0 = entries.front().value("op", "");
  for (const auto& e : entries)
    if (e.value("op", "") != op0 || op0 == "sweep") {
      out.exit_code = kBadConfig;
      out.record = error_payload(
          kBadConfig, "sweep entries must share one non-sweep operation", "entries");
      return out;
    }

  const int threads =
      std::max(1, config.value("threads", 1));
  std::vector<RunOutcome> results(entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= entries.size()) break;
      results[i] = run_config(entries.at(i));
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < results.size(); ++i)
    if (results[i].exit_code != kOk) {
      out.exit_code = results[i].exit_code;
      out.record = Json{{"error", results[i].record.at("error")},
                        {"entry", i}};
      return out;
    }

  const std::string merge = config.value("merge", "concat");
  Json payload;
  if (merge == "mean") {
    double sum = 0.0, sum_sq = 0.0;
    const double k = static_cast<double>(results.size());
    for (const auto& r : results) {
      const Json& res = r.record.at("results");
      const double v = res.contains("value") ? res.at("value").get<double>()
                                             : res.at("statistic").get<double>();
      sum += v;
      sum_sq += v * v;
    }
    const double mean = sum / k;
    const double var =
        results.size() > 1
            ? std::max(0.0, (sum_sq - k * mean * mean) / (k - 1.0))
            : 0.0;
    payload = Json{{"value", mean},
                   {"se", std::sqrt(var / k)},
                   {"entries", results.size()}};
  } else if (merge == "concat") {
    Json list = Json::array();
    for (const auto& r : results) list.push_back(r.record.at("results"));
    payload = Json{{"entries", list}};
  } else {
    out.exit_code = kBadConfig;
    out.record = error_payload(kBadConfig, "unknown merge policy: " + merge, "merge");
    return out;
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  out.record = Json{{"config", config},
                    {"version", kVersion},
                    {"wall_time_sec", wall},
                    {"results", payload}};
  if (config.contains("out")) write_json_file(config.at("out"), out.record);
  return out;
}

namespace {

void flatten(const Json& j, const std::string& prefix,
             std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items())
      flatten(value, prefix.empty() ? key : prefix + "." + key, out);
  } else if (j.is_array()) {
    bool scalars = true;
    for (const auto& v : j)
      if (v.is_object() || v.is_array()) scalars = false;
    if (scalars) {
      std::string joined;
      for (const auto& v : j) {
        if (!joined.empty()) joined += ";";
        joined += v.is_string() ? v.get<std::string>() : v.dump();
      }
      out.emplace_back(prefix, joined);
    }
  } else {
    out.emplace_back(prefix, j.is_string() ? j.get<std::string>() : j.dump());
  }
}

}  // namespace

std::string record_to_csv(const nlohmann::json& record) {
  std::ostringstream csv;
  const Json& results = record.contains("results") ? record.at("results") : record;
  const bool concat = results.contains("entries") && results.at("entries").is_array() &&
                      !results.at("entries").empty() &&
                      results.at("entries").front().is_object();
  std::vector<Json> rows;
  if (concat)
    for (const auto& e : results.at("entries")) rows.push_back(e);
  else
    rows.push_back(results);
  std::vector<std::pair<std::string, std::string>> first;
  flatten(rows.front(), "", first);
  for (std::size_t i = 0; i < first.size(); ++i)
    csv << (i ? "," : "") << first[i].first;
  csv << '\n';
  for (const auto& row : rows) {
    std::vector<std::pair<std::string, std::string>> cells;
    flatten(row, "", cells);
    for (std::size_t i = 0; i < cells.size(); ++i)
      csv << (i ? "," : "") << cells[i].second;
    csv << '\n';
  }
  return csv.str();
}

}  // namespace fgl
