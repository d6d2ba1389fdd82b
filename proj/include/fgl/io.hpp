#pragma once

#include <string>

#include <json.hpp>

#include "fgl/factor_graph.hpp"
#include "fgl/model.hpp"

namespace fgl {

using Json = nlohmann::json;

// Doubles that must round-trip bit-exactly are emitted as decimal strings
// with 17 significant digits; the readers accept numbers or strings.
std::string double_to_string(double v);
double double_from_json(const Json& j);

Json to_json(const SpinAlphabet& a);
SpinAlphabet alphabet_from_json(const Json& j);

Json to_json(const WeightFunction& wf);
WeightFunction weight_function_from_json(const Json& j);

Json to_json(const FactorGraph& g);
FactorGraph factor_graph_from_json(const Json& j);

Json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const Json& j);

Json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);  // atomic

}  // namespace fgl
