#pragma once

#include <string>

#include <json.hpp>

namespace fgl {

inline constexpr const char* kVersion = "fgl 0.1.0";

// Exit codes shared by the library entry point and the CLI.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;
inline constexpr int kBadConfig = 2;
inline constexpr int kCapExceeded = 3;

struct RunOutcome {
  int exit_code = kOk;
  nlohmann::json record;  // RunRecord on success, error payload otherwise
};

// Dispatches a single experiment config.  The record snapshots the config,
// code version, wall time and the operation payload.
RunOutcome run_config(const nlohmann::json& config);

// Runs entries concurrently (bounded by config["threads"]) and merges
// payloads by mean (with combined standard errors) or concatenation.
RunOutcome run_sweep(const nlohmann::json& config);

// Flatten a run record into CSV (one row, dotted keys; sweeps in concat mode
// get one row per entry).
std::string record_to_csv(const nlohmann::json& record);

}  // namespace fgl
