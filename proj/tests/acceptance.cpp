// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 on any failure.
#include <iostream>
#include <numeric>

#include "CLI11.hpp"
#include "fraclab/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> ids;
  bool quick = false, json = false, verbose = false;
  app.add_option("criteria", ids, "criterion numbers (default: all)")->check(CLI::Range(1, fraclab::kNumCriteria));
  app.add_flag("--quick", quick, "reduced resolution, tolerances widened by 2");
  app.add_flag("--json", json, "print the JSON report");
  app.add_flag("-v,--verbose", verbose, "print every check");
  CLI11_PARSE(app, argc, argv);
  if (ids.empty()) {
    ids.resize(fraclab::kNumCriteria);
    std::iota(ids.begin(), ids.end(), 1);
  }
  fraclab::AcceptanceOptions opts;
  opts.quick = quick;
  std::vector<fraclab::CriterionResult> results;
  bool ok = true;
  for (int id : ids) {
    results.push_back(fraclab::run_criterion(id, opts));
    const auto& r = results.back();
    ok = ok && r.pass();
    if (json) continue;
    if (verbose) {
      std::cout << fraclab::acceptance_table({r});
    } else {
      std::cout << fraclab::criterion_line(r) << std::endl;
    }
  }
  if (json) std::cout << fraclab::acceptance_json(results, quick).dump(2) << "\n";
  return ok ? 0 : 1;
}
