#pragma once

#include <exception>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fraclab/acceptance.hpp"
#include "fraclab/config.hpp"
#include "json.hpp"

namespace fraclab::cli {

enum ExitCode { kPass = 0, kCheckFailed = 1, kConfigError = 2, kNumericalError = 3 };

struct CliOptions {
  bool quick = false;
  bool serial = false;
  std::vector<std::filesystem::path> snapshots;  // diagnose input
  std::vector<int> criteria;                     // verify subset, empty for all
};

/// Result of one subcommand: checks plus output files held in memory until commit.
struct RunReport {
  std::string command;
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, std::string>> files;  // name relative to the output directory, content
  nlohmann::json summary = nlohmann::json::object();

  bool pass() const;
  void le(std::string name, double v, double thr);
  void ge(std::string name, double v, double thr);
  void info(std::string name, double v);
  nlohmann::json to_json(const std::filesystem::path& out_dir) const;
};

RunReport cmd_solve(const RunConfig& cfg, const CliOptions& opts);
RunReport cmd_sweep(const RunConfig& cfg, const CliOptions& opts);
RunReport cmd_diagnose(const RunConfig& cfg, const CliOptions& opts);
RunReport cmd_eigen(const RunConfig& cfg, const CliOptions& opts);
RunReport cmd_nuacf(const RunConfig& cfg, const CliOptions& opts);
RunReport cmd_oracle(const RunConfig& cfg, const CliOptions& opts);
RunReport cmd_verify(const RunConfig& cfg, const CliOptions& opts);

RunReport run_command(const std::string& name, const RunConfig& cfg, const CliOptions& opts);

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);

/// Writes every staged file and report.json; on failure removes what was written.
void commit(const RunReport& report, const std::filesystem::path& out_dir);

}  // namespace fraclab::cli
