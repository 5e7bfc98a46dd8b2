#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

using namespace fraclab;

namespace {

void print_text(const cli::RunReport& rep, const std::filesystem::path& out, bool wrote) {
  if (rep.command == "verify") {
    std::cout << rep.files.front().second;
  } else {
    for (const auto& c : rep.checks) {
      char buf[320];
      if (c.relation == "info") {
        std::snprintf(buf, sizeof buf, "  %-4s %-56s %14.8g\n", "", c.name.c_str(), c.value);
      } else {
        std::snprintf(buf, sizeof buf, "  %-4s %-56s %14.8g %s %g\n", c.pass ? "ok" : "FAIL", c.name.c_str(), c.value,
                      c.relation.c_str(), c.threshold);
      }
      std::cout << buf;
    }
  }
  if (wrote) {
    for (const auto& f : rep.files) std::cout << "wrote " << (out / f.first).string() << "\n";
    std::cout << "wrote " << (out / "report.json").string() << "\n";
  }
  std::cout << rep.command << ": " << (rep.pass() ? "PASS" : "FAIL") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fraclab: fractional segregation experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir;
  cli::CliOptions opts;
  bool json = false;
  app.add_option("--config", config_path, "run configuration (JSON)");
  app.add_option("--out", out_dir, "output directory (overrides output.directory)");
  app.add_flag("--quick", opts.quick, "reduced-resolution acceptance run");
  app.add_flag("--json", json, "print the run report as JSON");
  app.add_flag("--serial", opts.serial, "no concurrent work; byte-identical outputs");
  app.add_subcommand("solve", "solve the coupled system for one beta");
  app.add_subcommand("sweep", "solve over problem.betas and record overlap");
  app.add_subcommand("eigen", "first eigenvalue on the hemisphere for each region");
  app.add_subcommand("nuacf", "cap scan for the optimal partition exponent");
  app.add_subcommand("oracle", "fractional Laplacian of a periodic trace");
  app.add_subcommand("verify", "run the acceptance checks")
      ->add_option("criteria", opts.criteria, "criterion ids (default: all)");
  app.add_subcommand("diagnose", "frequency and ACF diagnostics on snapshots")
      ->add_option("--snapshot", opts.snapshots, "field snapshot (repeatable)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kPass : cli::kConfigError;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    RunConfig cfg = config_path.empty() ? parse_run_config(nlohmann::json::object()) : load_run_config(config_path);
    const bool write = cmd != "verify" || !out_dir.empty();
    const std::filesystem::path out = out_dir.empty() ? cfg.output.directory : out_dir;
    const auto rep = cli::run_command(cmd, cfg, opts);
    if (write) cli::commit(rep, out);
    if (json) {
      std::cout << rep.to_json(out).dump(2) << "\n";
    } else {
      print_text(rep, out, write);
    }
    return rep.pass() ? cli::kPass : cli::kCheckFailed;
  } catch (const std::exception& e) {
    const int code = cli::exit_code_for(e);
    std::cerr << (code == cli::kConfigError ? "configuration error: " : "numerical failure: ") << e.what() << "\n";
    return code;
  }
}
