#include "entlink/counting.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "entlink/errors.hpp"
#include "entlink/parallel.hpp"
#include "entlink/seeding.hpp"

namespace entlink::counting {
namespace {

constexpr double kPerp = std::numbers::pi / 2.0;

std::uint64_t draw_poisson(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(rng);
}

}  // namespace

void CountingConfig::validate() const {
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ValidationError(std::string(name) + " must be a finite nonnegative number");
  };
  nonneg(pair_rate, "pair_rate");
  nonneg(bg_a, "bg_a");
  nonneg(bg_b, "bg_b");
  if (!(eta_a >= 0.0 && eta_a <= 1.0)) throw ValidationError("eta_a must lie in [0, 1]");
  if (!(eta_b >= 0.0 && eta_b <= 1.0)) throw ValidationError("eta_b must lie in [0, 1]");
  if (!(window > 0.0)) throw ValidationError("window must be positive");
  if (!(integration > 0.0)) throw ValidationError("integration must be positive");
}

double accidental_rate(double singles_a, double singles_b, double window) {
  if (singles_a < 0.0 || singles_b < 0.0 || window < 0.0)
    throw ValidationError("accidental_rate inputs must be nonnegative");
  return singles_a * singles_b * window;
}

std::pair<double, double> singles_rates(const qstate::TwoQubitState& state, double theta_a,
                                        double theta_b, const CountingConfig& config) {
  const double sa = config.pair_rate * config.eta_a * qstate::marginal_a(state, theta_a) + config.bg_a;
  const double sb = config.pair_rate * config.eta_b * qstate::marginal_b(state, theta_b) + config.bg_b;
  return {sa, sb};
}

double expected_counts(const qstate::TwoQubitState& state, double theta_a, double theta_b,
                       const CountingConfig& config) {
  const auto [sa, sb] = singles_rates(state, theta_a, theta_b, config);
  const double true_rate =
      config.pair_rate * config.eta_a * config.eta_b * qstate::joint_probability(state, theta_a, theta_b);
  return config.integration * (true_rate + accidental_rate(sa, sb, config.window));
}

CoincidenceRecord simulate_record(const qstate::TwoQubitState& state, double theta_a,
                                  double theta_b, const CountingConfig& config,
                                  std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  CoincidenceRecord r;
  r.setting = {theta_a, theta_b};
  r.n_ab = draw_poisson(rng, expected_counts(state, theta_a, theta_b, config));
  r.n_ab_perp = draw_poisson(rng, expected_counts(state, theta_a, theta_b + kPerp, config));
  r.n_aperp_b = draw_poisson(rng, expected_counts(state, theta_a + kPerp, theta_b, config));
  r.n_aperp_bperp = draw_poisson(rng, expected_counts(state, theta_a + kPerp, theta_b + kPerp, config));
  return r;
}

CoincidenceRecord expected_record(const qstate::TwoQubitState& state, double theta_a,
                                  double theta_b, const CountingConfig& config) {
  config.validate();
  auto n = [&](double ta, double tb) {
    return static_cast<std::uint64_t>(std::llround(expected_counts(state, ta, tb, config)));
  };
  CoincidenceRecord r;
  r.setting = {theta_a, theta_b};
  r.n_ab = n(theta_a, theta_b);
  r.n_ab_perp = n(theta_a, theta_b + kPerp);
  r.n_aperp_b = n(theta_a + kPerp, theta_b);
  r.n_aperp_bperp = n(theta_a + kPerp, theta_b + kPerp);
  return r;
}

EstimateWithError estimate_E(const CoincidenceRecord& record) {
  const double total = static_cast<double>(record.total());
  if (total <= 0.0) throw ValidationError("estimate_E: record has zero total counts");
  const double same = static_cast<double>(record.n_ab + record.n_aperp_bperp);
  const double diff = static_cast<double>(record.n_ab_perp + record.n_aperp_b);
  const double e = (same - diff) / total;
  // Independent Poisson counts, first-order propagation:
  // dE/dn = (+-1 - E)/N, so var = (same (1-E)^2 + diff (1+E)^2) / N^2 = (1 - E^2)/N.
  const double var = (same * (1.0 - e) * (1.0 - e) + diff * (1.0 + e) * (1.0 + e)) / (total * total);
  return {e, std::sqrt(var)};
}

EstimateWithError estimate_S(std::span<const CoincidenceRecord> records) {
  if (records.size() != 4) throw ValidationError("estimate_S needs exactly four records");
  constexpr std::array<double, 4> sign{1.0, -1.0, 1.0, 1.0};
  double s = 0.0;
  double var = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (records[i].total() == 0)
      throw ValidationError("estimate_S: record " + std::to_string(i) + " is empty");
    const auto e = estimate_E(records[i]);
    s += sign[i] * e.value;
    var += e.sigma * e.sigma;
  }
  return {s, std::sqrt(var)};
}

std::array<Setting, 4> chsh_settings(const qstate::AnalyzerAngles& angles) {
  return {Setting{angles.a, angles.b}, Setting{angles.a, angles.b_prime},
          Setting{angles.a_prime, angles.b}, Setting{angles.a_prime, angles.b_prime}};
}

std::array<CoincidenceRecord, 4> simulate_chsh(const qstate::TwoQubitState& state,
                                               const qstate::AnalyzerAngles& angles,
                                               const CountingConfig& config, std::uint64_t seed) {
  const auto settings = chsh_settings(angles);
  std::array<CoincidenceRecord, 4> out;
  for (std::size_t i = 0; i < 4; ++i)
    out[i] = simulate_record(state, settings[i].theta_a, settings[i].theta_b, config,
                             derive_seed(seed, i));
  return out;
}

double violation_sigmas(const EstimateWithError& s) {
  if (!(s.sigma > 0.0)) throw ValidationError("violation_sigmas: sigma must be positive");
  return (std::abs(s.value) - 2.0) / s.sigma;
}

double effective_visibility(double v_src, double true_cc_rate, double acc_cc_rate) {
  if (!(v_src >= 0.0 && v_src <= 1.0)) throw ValidationError("v_src must lie in [0, 1]");
  if (true_cc_rate < 0.0 || acc_cc_rate < 0.0) throw ValidationError("rates must be nonnegative");
  if (true_cc_rate + acc_cc_rate <= 0.0)
    throw ValidationError("effective_visibility: both coincidence rates are zero");
  return v_src * true_cc_rate / (true_cc_rate + acc_cc_rate);
}

Fringe visibility_fringe(const qstate::TwoQubitState& state, double theta_fixed,
                         std::span<const double> sweep, const CountingConfig& config,
                         std::uint64_t seed) {
  if (sweep.size() < 8) throw ValidationError("visibility_fringe needs at least 8 sweep angles");
  config.validate();
  std::mt19937_64 rng(seed);
  Fringe fringe;
  Eigen::MatrixXd design(sweep.size(), 3);
  Eigen::VectorXd counts(sweep.size());
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const double n = static_cast<double>(draw_poisson(rng, expected_counts(state, theta_fixed, sweep[i], config)));
    fringe.points.push_back({sweep[i], {n, std::sqrt(n)}});
    const auto row = static_cast<Eigen::Index>(i);
    design(row, 0) = 1.0;
    design(row, 1) = std::cos(2.0 * sweep[i]);
    design(row, 2) = std::sin(2.0 * sweep[i]);
    counts(row) = n;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 3) throw ValidationError("fringe fit failed: sweep angles do not span a period");
  const Eigen::Vector3d c = qr.solve(counts);
  if (!(c(0) > 0.0)) throw ValidationError("fringe fit failed: no counts in sweep");
  fringe.visibility = std::hypot(c(1), c(2)) / c(0);
  return fringe;
}

std::vector<EstimateWithError> simulate_E_ensemble(const qstate::TwoQubitState& state,
                                                   Setting setting, const CountingConfig& config,
                                                   std::uint64_t seed, std::size_t trials) {
  config.validate();
  std::vector<EstimateWithError> out(trials);
  parallel_for(trials, [&](std::size_t i) {
    out[i] = estimate_E(
        simulate_record(state, setting.theta_a, setting.theta_b, config, derive_seed(seed, i)));
  });
  return out;
}

std::vector<EstimateWithError> simulate_E_ensemble_serial(const qstate::TwoQubitState& state,
                                                          Setting setting,
                                                          const CountingConfig& config,
                                                          std::uint64_t seed, std::size_t trials) {
  std::vector<EstimateWithError> out;
  out.reserve(trials);
  for (std::size_t i = 0; i < trials; ++i)
    out.push_back(estimate_E(
        simulate_record(state, setting.theta_a, setting.theta_b, config, derive_seed(seed, i))));
  return out;
}

std::vector<EstimateWithError> simulate_S_ensemble(const qstate::TwoQubitState& state,
                                                   const qstate::AnalyzerAngles& angles,
                                                   const CountingConfig& config,
                                                   std::uint64_t seed, std::size_t trials) {
  config.validate();
  std::vector<EstimateWithError> out(trials);
  parallel_for(trials, [&](std::size_t i) {
    out[i] = estimate_S(simulate_chsh(state, angles, config, derive_seed(seed, i)));
  });
  return out;
}

std::vector<EstimateWithError> simulate_S_ensemble_serial(const qstate::TwoQubitState& state,
                                                          const qstate::AnalyzerAngles& angles,
                                                          const CountingConfig& config,
                                                          std::uint64_t seed, std::size_t trials) {
  std::vector<EstimateWithError> out;
  out.reserve(trials);
  for (std::size_t i = 0; i < trials; ++i)
    out.push_back(estimate_S(simulate_chsh(state, angles, config, derive_seed(seed, i))));
  return out;
}

}  // namespace entlink::counting
