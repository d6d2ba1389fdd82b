// Command-line front end: every subcommand builds an experiment config and
// hands it to the harness, so CLI runs and config-file runs are identical.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fgl/harness.hpp"
#include "fgl/io.hpp"

namespace {

struct CommonArgs {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string config_file;
  std::string preset;
  std::string model_file;
  int threads = 1;
  bool csv = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--seed", args.seed, "random seed (required for stochastic ops)");
  cmd->add_option("--out", args.out, "write the run record to this file");
  cmd->add_option("--config", args.config_file, "JSON config file; flags override");
  cmd->add_option("--preset", args.preset,
                  "model preset, e.g. ksat:k=3,beta=1.0,density=2.5");
  cmd->add_option("--model", args.model_file, "model spec JSON file");
  cmd->add_option("--threads", args.threads, "worker threads for sweeps");
  cmd->add_flag("--csv", args.csv, "emit flattened CSV instead of JSON");
}

fgl::Json base_config(const CommonArgs& args, const std::string& op) {
  fgl::Json config = fgl::Json::object();
  if (!args.config_file.empty()) config = fgl::load_json_file(args.config_file);
  config["op"] = op;
  if (args.seed) config["seed"] = *args.seed;
  if (!args.out.empty()) config["out"] = args.out;
  if (!args.preset.empty()) config["preset"] = args.preset;
  if (!args.model_file.empty()) config["model_file"] = args.model_file;
  if (args.threads != 1) config["threads"] = args.threads;
  if (!config.contains("params")) config["params"] = fgl::Json::object();
  return config;
}

int emit(const fgl::RunOutcome& outcome, bool csv) {
  if (outcome.exit_code == fgl::kOk && csv)
    std::cout << fgl::record_to_csv(outcome.record);
  else
    std::cout << outcome.record.dump(2) << '\n';
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"factor-graph Gibbs measures, cut metrics and Bethe estimators"};
  app.require_subcommand(1);

  struct Sub {
    CLI::App* cmd;
    CommonArgs args;
    fgl::Json params = fgl::Json::object();
  };
  std::map<std::string, Sub> subs;
  auto make = [&](const std::string& name, const std::string& desc) -> Sub& {
    Sub& sub = subs[name];
    sub.cmd = app.add_subcommand(name, desc);
    add_common(sub.cmd, sub.args);
    return sub;
  };

  auto& gen = make("gen", "sample a random factor graph");
  int gen_n = 100;
  gen.cmd->add_option("--n", gen_n, "number of variables");

  auto& exact = make("exact", "exact computations on a factor graph");
  std::string exact_what = "logz", exact_graph;
  exact.cmd->add_option("--what", exact_what, "logz|marginal|sample|conditional");
  exact.cmd->add_option("--graph", exact_graph, "factor graph JSON file");
  std::vector<int> exact_vars;
  exact.cmd->add_option("--vars", exact_vars, "variables for --what marginal");
  int exact_count = 1, exact_n = 0;
  exact.cmd->add_option("--count", exact_count, "samples for --what sample");
  exact.cmd->add_option("--n", exact_n, "variables when sampling from a model");

  auto& bp = make("bp", "loopy belief propagation");
  std::string bp_graph;
  double bp_damping = 0.5, bp_tol = 1e-10;
  int bp_iters = 10000, bp_n = 0;
  bp.cmd->add_option("--graph", bp_graph, "factor graph JSON file");
  bp.cmd->add_option("--damping", bp_damping, "damping in [0,1)");
  bp.cmd->add_option("--tol", bp_tol, "residual tolerance");
  bp.cmd->add_option("--max-iters", bp_iters, "iteration cap");
  bp.cmd->add_option("--n", bp_n, "variables when sampling from a model");

  auto& popdyn = make("popdyn", "population dynamics for the BP fixed point");
  int pd_size = 10000, pd_sweeps = 100;
  double pd_jitter = 0.0;
  std::string pd_out;
  popdyn.cmd->add_option("--pop-size", pd_size, "population size");
  popdyn.cmd->add_option("--sweeps", pd_sweeps, "number of sweeps");
  popdyn.cmd->add_option("--jitter", pd_jitter, "Dirichlet jitter alpha (0 = off)");
  popdyn.cmd->add_option("--pop-out", pd_out, "write the population to this file");

  auto& bethe = make("bethe", "Bethe free energy estimators");
  std::string bethe_form = "tree", bethe_boundary;
  long bethe_samples = 100000;
  int bethe_pop = 10000, bethe_sweeps = 100;
  bethe.cmd->add_option("--form", bethe_form, "tree|poisson");
  bethe.cmd->add_option("--samples", bethe_samples, "Monte Carlo samples");
  bethe.cmd->add_option("--boundary", bethe_boundary, "population JSON file");
  bethe.cmd->add_option("--pop-size", bethe_pop, "boundary population size");
  bethe.cmd->add_option("--pop-sweeps", bethe_sweeps, "warmup sweeps");

  auto& ass = make("ass", "Aizenman-Simms-Starr increments");
  int ass_nmax = 10, ass_seeds = 200;
  ass.cmd->add_option("--n-max", ass_nmax, "telescope up to this n");
  ass.cmd->add_option("--seeds-per-n", ass_seeds, "Monte Carlo seeds per level");

  auto& fexact = make("fexact", "exact free energy by enumeration");
  int fx_n = 10, fx_seeds = 100;
  fexact.cmd->add_option("--n", fx_n, "variables per sampled graph");
  fexact.cmd->add_option("--seeds", fx_seeds, "number of sampled graphs");

  auto& cutdist = make("cutdist", "cut distance between embedded measures");
  std::string cd_a, cd_b, cd_metric = "strong", cd_mode = "heuristic";
  cutdist.cmd->add_option("--measure-a", cd_a, "measure JSON file")->required();
  cutdist.cmd->add_option("--measure-b", cd_b, "measure JSON file")->required();
  cutdist.cmd->add_option("--metric", cd_metric, "strong|weak");
  cutdist.cmd->add_option("--mode", cd_mode, "exact|heuristic");

  auto& reg = make("regularity", "regularity decomposition of a measure");
  std::string reg_measure;
  double reg_eps = 0.1;
  std::uint64_t reg_budget = std::uint64_t{1} << 20;
  reg.cmd->add_option("--measure", reg_measure, "measure JSON file")->required();
  reg.cmd->add_option("--eps", reg_eps, "regularity epsilon");
  reg.cmd->add_option("--budget", reg_budget, "exact witness-search budget");

  auto& diag = make("diagnose", "limit-theorem diagnostics");
  std::string dg_which, dg_graph;
  int dg_k = 2, dg_ell = 1, dg_root = 0, dg_n = 0, dg_graph_seeds = 10;
  long dg_samples = 200, dg_tree_samples = 10000;
  int dg_tuples = 50;
  diag.cmd
      ->add_option("--which", dg_which,
                   "factorization|nonrec|census|census_table|bpdist|cavity")
      ->required();
  diag.cmd->add_option("--graph", dg_graph, "factor graph JSON file");
  diag.cmd->add_option("--k", dg_k, "tuple size (factorization)");
  diag.cmd->add_option("--tuples", dg_tuples, "sampled tuples (factorization)");
  diag.cmd->add_option("--ell", dg_ell, "neighborhood depth");
  diag.cmd->add_option("--root", dg_root, "root variable (nonrec)");
  diag.cmd->add_option("--samples", dg_samples, "boundary samples (nonrec)");
  diag.cmd->add_option("--n", dg_n, "graph size when sampling from a model");
  diag.cmd->add_option("--graph-seeds", dg_graph_seeds, "graphs to average (census)");
  diag.cmd->add_option("--tree-samples", dg_tree_samples, "GW samples (census)");

  auto& sweep = make("sweep", "run a config sweep");
  std::string sweep_merge;
  sweep.cmd->add_option("--merge", sweep_merge, "mean|concat");

  CLI11_PARSE(app, argc, argv);

  for (auto& [name, sub] : subs) {
    if (!sub.cmd->parsed()) continue;
    fgl::Json config = base_config(sub.args, name);
    fgl::Json& params = config["params"];
    if (name == "gen") params["n"] = gen_n;
    if (name == "exact") {
      params["what"] = exact_what;
      if (!exact_graph.empty()) params["graph_file"] = exact_graph;
      if (!exact_vars.empty()) params["vars"] = exact_vars;
      if (exact_what == "sample") params["count"] = exact_count;
      if (exact_n > 0) params["n"] = exact_n;
    }
    if (name == "bp") {
      if (!bp_graph.empty()) params["graph_file"] = bp_graph;
      params["damping"] = bp_damping;
      params["tol"] = bp_tol;
      params["max_iters"] = bp_iters;
      if (bp_n > 0) params["n"] = bp_n;
    }
    if (name == "popdyn") {
      params["pop_size"] = pd_size;
      params["sweeps"] = pd_sweeps;
      if (pd_jitter > 0.0) params["jitter_alpha"] = pd_jitter;
      if (!pd_out.empty()) params["pop_out"] = pd_out;
    }
    if (name == "bethe") {
      params["form"] = bethe_form;
      params["samples"] = bethe_samples;
      if (!bethe_boundary.empty()) params["boundary_file"] = bethe_boundary;
      params["pop_size"] = bethe_pop;
      params["pop_sweeps"] = bethe_sweeps;
    }
    if (name == "ass") {
      params["n_max"] = ass_nmax;
      params["seeds_per_n"] = ass_seeds;
    }
    if (name == "fexact") {
      params["n"] = fx_n;
      params["seeds"] = fx_seeds;
    }
    if (name == "cutdist") {
      params["measure_a_file"] = cd_a;
      params["measure_b_file"] = cd_b;
      params["metric"] = cd_metric;
      params["mode"] = cd_mode;
    }
    if (name == "regularity") {
      params["measure_file"] = reg_measure;
      params["eps"] = reg_eps;
      params["budget"] = reg_budget;
    }
    if (name == "diagnose") {
      params["which"] = dg_which;
      if (!dg_graph.empty()) params["graph_file"] = dg_graph;
      params["k"] = dg_k;
      params["tuples"] = dg_tuples;
      params["ell"] = dg_ell;
      params["root"] = dg_root;
      params["samples"] = dg_samples;
      if (dg_n > 0) params["n"] = dg_n;
      params["graph_seeds"] = dg_graph_seeds;
      params["tree_samples"] = dg_tree_samples;
    }
    if (name == "sweep" && !sweep_merge.empty()) config["merge"] = sweep_merge;
    return emit(fgl::run_config(config), sub.args.csv);
  }
  return fgl::kBadConfig;
}
