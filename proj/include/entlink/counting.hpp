#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "entlink/qstate.hpp"

namespace entlink::counting {

inline constexpr double kDefaultWindow = 3e-9;

struct CountingConfig {
  double pair_rate = 0.0;   // pairs/s leaving the source
  double eta_a = 1.0;       // end-to-end transmittance incl. detection
  double eta_b = 1.0;
  double bg_a = 0.0;        // background singles, counts/s
  double bg_b = 0.0;
  double window = kDefaultWindow;  // coincidence window, s
  double integration = 1.0;  // s per projector combination

  void validate() const;
};

struct Setting {
  double theta_a = 0.0;
  double theta_b = 0.0;
  bool operator==(const Setting&) const = default;
};

/// Coincidences for (a, b), (a, b+), (a+, b), (a+, b+), where x+ = x + pi/2.
struct CoincidenceRecord {
  std::uint64_t n_ab = 0;
  std::uint64_t n_ab_perp = 0;
  std::uint64_t n_aperp_b = 0;
  std::uint64_t n_aperp_bperp = 0;
  Setting setting;

  std::uint64_t total() const noexcept { return n_ab + n_ab_perp + n_aperp_b + n_aperp_bperp; }
  bool operator==(const CoincidenceRecord&) const = default;
};

struct EstimateWithError {
  double value = 0.0;
  double sigma = 0.0;
};

double accidental_rate(double singles_a, double singles_b, double window);

/// Detected singles at each station with the analyzers at (thetaA, thetaB).
std::pair<double, double> singles_rates(const qstate::TwoQubitState& state, double theta_a,
                                        double theta_b, const CountingConfig& config);

/// Expected coincidence count for one projector pair over `config.integration`.
double expected_counts(const qstate::TwoQubitState& state, double theta_a, double theta_b,
                       const CountingConfig& config);

CoincidenceRecord simulate_record(const qstate::TwoQubitState& state, double theta_a,
                                  double theta_b, const CountingConfig& config,
                                  std::uint64_t seed);

/// Noise-free record: each count is its rounded expectation.
CoincidenceRecord expected_record(const qstate::TwoQubitState& state, double theta_a,
                                  double theta_b, const CountingConfig& config);

EstimateWithError estimate_E(const CoincidenceRecord& record);

/// Records must be ordered (a,b), (a,b'), (a',b), (a',b'). Returns signed S.
EstimateWithError estimate_S(std::span<const CoincidenceRecord> records);

/// The four Bell settings in estimate_S order.
std::array<Setting, 4> chsh_settings(const qstate::AnalyzerAngles& angles);

/// Simulates all four settings; record i uses seed derive_seed(seed, i).
std::array<CoincidenceRecord, 4> simulate_chsh(const qstate::TwoQubitState& state,
                                               const qstate::AnalyzerAngles& angles,
                                               const CountingConfig& config, std::uint64_t seed);

double violation_sigmas(const EstimateWithError& s);

double effective_visibility(double v_src, double true_cc_rate, double acc_cc_rate);

struct FringePoint {
  double angle = 0.0;
  EstimateWithError counts;
};

struct Fringe {
  std::vector<FringePoint> points;
  double visibility = 0.0;
};

/// Coincidences at (theta_fixed, theta) for each sweep angle, then a
/// least-squares fit of c0 + c1 cos 2theta + c2 sin 2theta; V = hypot(c1, c2)/c0.
Fringe visibility_fringe(const qstate::TwoQubitState& state, double theta_fixed,
                         std::span<const double> sweep, const CountingConfig& config,
                         std::uint64_t seed);

// Monte Carlo ensembles. The OpenMP and serial versions return identical
// vectors; trial i always uses derive_seed(seed, i).
std::vector<EstimateWithError> simulate_E_ensemble(const qstate::TwoQubitState& state,
                                                   Setting setting, const CountingConfig& config,
                                                   std::uint64_t seed, std::size_t trials);
std::vector<EstimateWithError> simulate_E_ensemble_serial(const qstate::TwoQubitState& state,
                                                          Setting setting,
                                                          const CountingConfig& config,
                                                          std::uint64_t seed, std::size_t trials);
std::vector<EstimateWithError> simulate_S_ensemble(const qstate::TwoQubitState& state,
                                                   const qstate::AnalyzerAngles& angles,
                                                   const CountingConfig& config,
                                                   std::uint64_t seed, std::size_t trials);
std::vector<EstimateWithError> simulate_S_ensemble_serial(const qstate::TwoQubitState& state,
                                                          const qstate::AnalyzerAngles& angles,
                                                          const CountingConfig& config,
                                                          std::uint64_t seed, std::size_t trials);

}  // namespace entlink::counting
