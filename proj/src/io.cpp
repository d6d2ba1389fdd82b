#include "fgl/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace fgl {

std::string double_to_string(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double double_from_json(const Json& j) {
  if (j.is_string()) return std::stod(j.get<std::string>());
  return j.get<double>();
}

Json to_json(const SpinAlphabet& a) { return Json(a.symbols); }

SpinAlphabet alphabet_from_json(const Json& j) {
  SpinAlphabet a;
  if (!j.is_array() || j.empty())
    throw std::invalid_argument("field 'alphabet' must be a non-empty array");
  a.symbols = j.get<std::vector<std::string>>();
  for (std::size_t i = 0; i < a.symbols.size(); ++i)
    for (std::size_t k = i + 1; k < a.symbols.size(); ++k)
      if (a.symbols[i] == a.symbols[k])
        throw std::invalid_argument("field 'alphabet' has duplicate symbols");
  return a;
}

Json to_json(const WeightFunction& wf) {
  Json table = Json::array();
  for (double v : wf.table) table.push_back(double_to_string(v));
  return Json{{"name", wf.name}, {"arity", wf.arity}, {"table", table}};
}

WeightFunction weight_function_from_json(const Json& j) {
  WeightFunction wf;
  if (!j.contains("name")) throw std::invalid_argument("weight function missing 'name'");
  if (!j.contains("arity")) throw std::invalid_argument("weight function missing 'arity'");
  if (!j.contains("table")) throw std::invalid_argument("weight function missing 'table'");
  wf.name = j.at("name").get<std::string>();
  wf.arity = j.at("arity").get<int>();
  for (const auto& v : j.at("table")) wf.table.push_back(double_from_json(v));
  return wf;
}

Json to_json(const FactorGraph& g) {
  Json wfs = Json::array();
  for (const auto& wf : g.weight_functions) wfs.push_back(to_json(wf));
  Json cons = Json::array();
  for (const auto& c : g.constraints)
    cons.push_back(Json{{"wf", c.wf}, {"neighbors", c.neighbors}});
  return Json{{"alphabet", to_json(g.alphabet)},
              {"weight_functions", wfs},
              {"constraints", cons},
              {"n", g.n}};
}

FactorGraph factor_graph_from_json(const Json& j) {
  FactorGraph g;
  if (!j.contains("alphabet")) throw std::invalid_argument("graph missing 'alphabet'");
  if (!j.contains("n")) throw std::invalid_argument("graph missing 'n'");
  g.alphabet = alphabet_from_json(j.at("alphabet"));
  g.n = j.at("n").get<int>();
  for (const auto& w : j.value("weight_functions", Json::array()))
    g.weight_functions.push_back(weight_function_from_json(w));
  for (const auto& c : j.value("constraints", Json::array())) {
    FactorGraph::Constraint nc;
    if (!c.contains("wf") || !c.contains("neighbors"))
      throw std::invalid_argument("constraint missing 'wf' or 'neighbors'");
    nc.wf = c.at("wf").get<int>();
    nc.neighbors = c.at("neighbors").get<std::vector<int>>();
    g.constraints.push_back(std::move(nc));
  }
  g.validate();
  return g;
}

Json to_json(const ModelSpec& spec) {
  Json fams = Json::array();
  for (const auto& f : spec.families)
    fams.push_back(Json{{"wf", to_json(f.wf)}, {"rho", double_to_string(f.rho)}});
  return Json{{"alphabet", to_json(spec.alphabet)}, {"families", fams}};
}

ModelSpec model_spec_from_json(const Json& j) {
  ModelSpec spec;
  if (!j.contains("alphabet")) throw std::invalid_argument("model missing 'alphabet'");
  if (!j.contains("families")) throw std::invalid_argument("model missing 'families'");
  spec.alphabet = alphabet_from_json(j.at("alphabet"));
  for (const auto& f : j.at("families")) {
    if (!f.contains("wf") || !f.contains("rho"))
      throw std::invalid_argument("family missing 'wf' or 'rho'");
    spec.families.push_back(
        {weight_function_from_json(f.at("wf")), double_from_json(f.at("rho"))});
  }
  spec.validate();
  return spec;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  Json j;
  in >> j;
  return j;
}

void write_json_file(const std::string& path, const Json& j) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace fgl
