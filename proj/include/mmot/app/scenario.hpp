#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mmot/app/io.hpp"

namespace mmot::scenario {

using io::json;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr double kDefaultTol = 1e-8;

// Exit codes shared by single runs and the suite.
inline constexpr int kPass = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kInputError = 2;

// Every subcommand a scenario may name.
const std::vector<std::string>& subcommands();

struct Scenario {
  std::string name;
  std::string subcommand;
  json inputs = json::object();
  json options = json::object();
  json checks = json::array();
  std::uint64_t seed = 0;
  std::filesystem::path dir;  // relative input paths resolve here
  std::string config_hash;    // FNV-1a of the canonical config text
};

// Throws InputError naming the file on any problem.
Scenario load(const std::filesystem::path& path);
Scenario from_json(const json& config, const std::filesystem::path& dir, const std::string& origin);

struct RunConfig {
  std::filesystem::path out_dir = ".";
  double tol = kDefaultTol;
};

struct Outcome {
  std::string name;
  int exit_code = kPass;
  std::vector<std::string> messages;  // failing checks or the input error
  json report;
};

// Runs the pipeline, evaluates checks and writes <name>.report.json plus any
// CSV tables into cfg.out_dir.
Outcome run(const Scenario& s, const RunConfig& cfg);
// load + run; input errors come back as an Outcome with exit code 2.
Outcome run_file(const std::filesystem::path& path, const RunConfig& cfg);

struct SuiteSummary {
  std::vector<Outcome> outcomes;  // sorted by file name
  std::size_t passed = 0, failed = 0, errors = 0;
  int exit_code = kPass;  // max over scenarios
};

// Every *.json directly inside `dir` is a scenario. Data files belong in
// subdirectories.
SuiteSummary regression_suite(const std::filesystem::path& dir, const RunConfig& cfg, unsigned workers = 1);

}  // namespace mmot::scenario
