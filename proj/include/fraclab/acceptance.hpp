#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace fraclab {

/// One measured quantity compared against a threshold.
struct CheckResult {
  std::string name;
  double value = 0.0;
  std::string relation;  // "<=", ">=" or "info"
  double threshold = 0.0;
  bool pass = true;
  bool mandatory = true;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<CheckResult> checks;
  double seconds = 0.0;
  double runtime_limit = 0.0;
  std::string error;  // set when the criterion threw

  bool pass() const;
  /// Failing mandatory checks, or the error.
  std::string summary() const;
};

struct AcceptanceOptions {
  /// Reduced resolution with error tolerances widened by 2.
  bool quick = false;
};

constexpr int kNumCriteria = 11;

CriterionResult run_criterion(int id, const AcceptanceOptions& opts = {});
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids, const AcceptanceOptions& opts = {});

/// "[PASS] 3  hemisphere eigenvalues  (12.3 s)" style line.
std::string criterion_line(const CriterionResult& r);
/// One line per criterion followed by indented check rows.
std::string acceptance_table(const std::vector<CriterionResult>& results);
nlohmann::json to_json(const CriterionResult& r);
nlohmann::json acceptance_json(const std::vector<CriterionResult>& results, bool quick);

}  // namespace fraclab
