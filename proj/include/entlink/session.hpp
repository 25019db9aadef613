#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "entlink/optics.hpp"
#include "entlink/scenario.hpp"

namespace entlink::harness {

inline constexpr std::string_view kVersion = "entlink 0.1.0";

struct TrialResult {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string failure;  // empty when ok
  double s = 0.0;       // signed
  double sigma = 0.0;
  double abs_s = 0.0;
  double violation_sigmas = 0.0;
  double jitter_alice_m = 0.0;
  double jitter_bob_m = 0.0;
  optics::LinkBudget budget_alice;
  optics::LinkBudget budget_bob;
  double accidental_fraction = 0.0;
};

struct Aggregate {
  std::uint64_t completed = 0;
  std::uint64_t failed = 0;
  double mean_abs_s = 0.0;
  double std_abs_s = 0.0;   // sample spread of |S| across trials
  double mean_sigma = 0.0;  // mean per-trial one-sigma error
  double violation_sigmas = 0.0;  // (mean |S| - 2) / mean sigma
};

struct RunReport {
  std::string scenario_name;
  std::vector<TrialResult> trials;
  Aggregate aggregate;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string scenario_text;
};

/// One trial: tracking -> jitter -> link budgets -> four CHSH records -> S.
/// Lock loss and empty records yield ok == false; divergence throws.
TrialResult run_trial(const Scenario& scenario, std::uint64_t index);

Aggregate aggregate(const std::vector<TrialResult>& trials);

/// Trials run on OpenMP threads; output equals run_chsh_session_serial.
RunReport run_chsh_session(const Scenario& scenario);
RunReport run_chsh_session_serial(const Scenario& scenario);

nlohmann::json report_to_json(const RunReport& report);
std::string report_to_csv(const RunReport& report);

/// Re-runs the scenario embedded in a JSON report and returns the result.
RunReport rerun_from_report(const nlohmann::json& report);

}  // namespace entlink::harness
