// Command-line front end: one scenario per invocation, or a whole directory.
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mmot/app/scenario.hpp"
#include "mmot/error.hpp"

namespace sc = mmot::scenario;

namespace {

void print(const sc::Outcome& o) {
  const char* status = o.exit_code == sc::kPass ? "pass" : o.exit_code == sc::kCheckFailed ? "FAIL" : "ERROR";
  std::printf("%-40s %s\n", o.name.c_str(), status);
  for (const auto& m : o.messages) std::fprintf(stderr, "%s: %s\n", o.name.c_str(), m.c_str());
}

int run_one(const std::string& config, const std::string& expect, const sc::RunConfig& cfg) {
  sc::Outcome o;
  try {
    const auto s = sc::load(config);
    if (!expect.empty() && s.subcommand != expect) {
      std::fprintf(stderr, "%s: scenario is a \"%s\" scenario, not \"%s\"\n", config.c_str(), s.subcommand.c_str(),
                   expect.c_str());
      return sc::kInputError;
    }
    o = sc::run(s, cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return sc::kInputError;
  }
  print(o);
  return o.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-marginal transport and symmetric polar toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sc::kVersion);

  sc::RunConfig cfg;
  std::string config, out = ".", dir;
  unsigned workers = 1;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", out, "Directory for reports")->capture_default_str();
    sub->add_option("--tol", cfg.tol, "Report tolerance for approx checks")->capture_default_str();
  };

  auto* run = app.add_subcommand("run", "Run the scenario named in --config");
  run->add_option("--config", config, "Scenario file")->required();
  common(run);

  std::vector<std::pair<std::string, CLI::App*>> direct;
  for (const auto& name : sc::subcommands()) {
    auto* sub = app.add_subcommand(name, "Run a scenario whose subcommand is " + name);
    sub->add_option("--config", config, "Scenario file")->required();
    common(sub);
    direct.emplace_back(name, sub);
  }

  auto* regress = app.add_subcommand("regress", "Run every scenario in a directory");
  regress->add_option("dir", dir, "Scenario directory");
  regress->add_option("--config", dir, "Scenario directory (same as the positional argument)");
  regress->add_option("--workers", workers, "Scenarios run concurrently")->capture_default_str();
  common(regress);

  CLI11_PARSE(app, argc, argv);
  cfg.out_dir = out;

  if (run->parsed()) return run_one(config, "", cfg);
  for (const auto& [name, sub] : direct)
    if (sub->parsed()) return run_one(config, name, cfg);

  if (dir.empty()) {
    std::fprintf(stderr, "regress needs a scenario directory\n");
    return sc::kInputError;
  }
  try {
    const auto sum = sc::regression_suite(dir, cfg, workers);
    for (const auto& o : sum.outcomes) print(o);
    std::printf("%zu scenarios: %zu passed, %zu failed, %zu input errors\n", sum.outcomes.size(), sum.passed,
                sum.failed, sum.errors);
    return sum.exit_code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return sc::kInputError;
  }
}
