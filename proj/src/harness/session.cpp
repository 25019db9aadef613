#include "entlink/session.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <numbers>
#include <sstream>

#include "entlink/apt.hpp"
#include "entlink/counting.hpp"
#include "entlink/errors.hpp"
#include "entlink/format.hpp"
#include "entlink/parallel.hpp"
#include "entlink/seeding.hpp"

namespace entlink::harness {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Channel {
  optics::LinkBudget budget;
  double jitter = 0.0;
};

Channel run_channel(const StationLink& link, std::uint64_t trial_seed, std::uint64_t station,
                    double apt_duration) {
  Channel ch;
  const optics::FiberMode fiber{link.mfd_m};
  const auto condition = optics::parse_condition(link.condition);
  if (link.distance_m > 0.0) {
    auto p = apt::preset(link.apt_preset);
    p.disturbance.seed = derive_seed(trial_seed, station, 10);
    const auto trace = apt::simulate_apt(p.system, p.disturbance, link.distance_m, apt_duration, p.dt,
                                         derive_seed(trial_seed, station, 11));
    ch.jitter = apt::jitter_summary(trace);
  }
  ch.budget = optics::total_link_budget(link.geometry(), link.distance_m, condition, ch.jitter, fiber,
                                        link.static_db);
  return ch;
}

}  // namespace

TrialResult run_trial(const Scenario& scenario, std::uint64_t index) {
  TrialResult r;
  r.index = index;
  r.seed = derive_seed(scenario.seed, index);
  try {
    const auto alice = run_channel(scenario.alice, r.seed, 0, scenario.apt_duration_s);
    const auto bob = run_channel(scenario.bob, r.seed, 1, scenario.apt_duration_s);
    r.jitter_alice_m = alice.jitter;
    r.jitter_bob_m = bob.jitter;
    r.budget_alice = alice.budget;
    r.budget_bob = bob.budget;

    const auto state = qstate::apply_local(qstate::werner(scenario.visibility),
                                           qstate::rotation_unitary(scenario.alice.rotation_deg * kDeg),
                                           qstate::rotation_unitary(scenario.bob.rotation_deg * kDeg));
    counting::CountingConfig cfg;
    cfg.pair_rate = scenario.pair_rate;
    cfg.eta_a = alice.budget.transmittance();
    cfg.eta_b = bob.budget.transmittance();
    cfg.bg_a = scenario.alice.background(scenario.illuminance_lx);
    cfg.bg_b = scenario.bob.background(scenario.illuminance_lx);
    cfg.window = scenario.window_s;
    cfg.integration = scenario.integration_s;

    const auto angles = scenario.angles();
    const auto records = counting::simulate_chsh(state, angles, cfg, derive_seed(r.seed, 2));
    const auto s = counting::estimate_S(records);
    r.s = s.value;
    r.sigma = s.sigma;
    r.abs_s = std::abs(s.value);
    r.violation_sigmas = s.sigma > 0.0 ? counting::violation_sigmas(s) : 0.0;

    double acc = 0.0;
    double all = 0.0;
    for (const auto& setting : counting::chsh_settings(angles))
      for (double da : {0.0, std::numbers::pi / 2.0})
        for (double db : {0.0, std::numbers::pi / 2.0}) {
          const auto [sa, sb] = counting::singles_rates(state, setting.theta_a + da, setting.theta_b + db, cfg);
          acc += counting::accidental_rate(sa, sb, cfg.window) * cfg.integration;
          all += counting::expected_counts(state, setting.theta_a + da, setting.theta_b + db, cfg);
        }
    r.accidental_fraction = all > 0.0 ? acc / all : 0.0;
    r.ok = true;
  } catch (const LockLostError& e) {
    r.failure = e.what();
  } catch (const ValidationError& e) {
    r.failure = e.what();
  }
  return r;
}

Aggregate aggregate(const std::vector<TrialResult>& trials) {
  Aggregate a;
  double sum = 0.0;
  double sum_sigma = 0.0;
  for (const auto& t : trials) {
    if (!t.ok) {
      ++a.failed;
      continue;
    }
    ++a.completed;
    sum += t.abs_s;
    sum_sigma += t.sigma;
  }
  if (a.completed == 0) return a;
  const double n = static_cast<double>(a.completed);
  a.mean_abs_s = sum / n;
  a.mean_sigma = sum_sigma / n;
  double ss = 0.0;
  for (const auto& t : trials)
    if (t.ok) ss += (t.abs_s - a.mean_abs_s) * (t.abs_s - a.mean_abs_s);
  a.std_abs_s = a.completed > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  a.violation_sigmas = a.mean_sigma > 0.0 ? (a.mean_abs_s - 2.0) / a.mean_sigma : 0.0;
  return a;
}

namespace {

RunReport make_report(const Scenario& scenario, std::vector<TrialResult> trials) {
  RunReport report;
  report.scenario_name = scenario.name;
  report.aggregate = aggregate(trials);
  report.trials = std::move(trials);
  report.config_hash = config_hash(scenario);
  report.seed = scenario.seed;
  report.scenario_text = serialize_scenario(scenario);
  return report;
}

}  // namespace

RunReport run_chsh_session(const Scenario& scenario) {
  scenario.validate();
  std::vector<TrialResult> trials(scenario.trials);
  parallel_for(trials.size(), [&](std::size_t i) { trials[i] = run_trial(scenario, i); });
  return make_report(scenario, std::move(trials));
}

RunReport run_chsh_session_serial(const Scenario& scenario) {
  scenario.validate();
  std::vector<TrialResult> trials;
  trials.reserve(scenario.trials);
  for (std::uint64_t i = 0; i < scenario.trials; ++i) trials.push_back(run_trial(scenario, i));
  return make_report(scenario, std::move(trials));
}

namespace {

nlohmann::json budget_json(const optics::LinkBudget& b) {
  return {{"diffraction_db", b.diffraction_db()},
          {"atmospheric_db", b.atmospheric_db()},
          {"pointing_db", b.pointing_db()},
          {"static_coupling_db", b.static_coupling_db()},
          {"total_db", b.total_db()}};
}

}  // namespace

nlohmann::json report_to_json(const RunReport& report) {
  using nlohmann::json;
  json trials = json::array();
  for (const auto& t : report.trials) {
    json row{{"index", t.index}, {"seed", t.seed}, {"ok", t.ok}};
    if (!t.ok) {
      row["failure"] = t.failure;
    } else {
      row["s"] = t.s;
      row["sigma"] = t.sigma;
      row["abs_s"] = t.abs_s;
      row["violation_sigmas"] = t.violation_sigmas;
      row["accidental_fraction"] = t.accidental_fraction;
      row["jitter_alice_m"] = t.jitter_alice_m;
      row["jitter_bob_m"] = t.jitter_bob_m;
      row["budget_alice"] = budget_json(t.budget_alice);
      row["budget_bob"] = budget_json(t.budget_bob);
    }
    trials.push_back(std::move(row));
  }
  const auto& a = report.aggregate;
  return json{{"scenario", report.scenario_name},
              {"aggregate",
               {{"completed", a.completed},
                {"failed", a.failed},
                {"mean_abs_s", a.mean_abs_s},
                {"std_abs_s", a.std_abs_s},
                {"mean_sigma", a.mean_sigma},
                {"violation_sigmas", a.violation_sigmas}}},
              {"trials", trials},
              {"provenance",
               {{"config_hash", report.config_hash},
                {"seed", report.seed},
                {"trials", report.trials.size()},
                {"version", kVersion},
                {"scenario", report.scenario_text}}}};
}

std::string report_to_csv(const RunReport& report) {
  std::ostringstream out;
  out << "trial,seed,ok,s,sigma,abs_s,violation_sigmas,jitter_alice_m,jitter_bob_m,loss_alice_db,loss_bob_db\n";
  for (const auto& t : report.trials) {
    out << t.index << ',' << t.seed << ',' << (t.ok ? 1 : 0) << ',' << format_number(t.s) << ','
        << format_number(t.sigma) << ',' << format_number(t.abs_s) << ',' << format_number(t.violation_sigmas)
        << ',' << format_number(t.jitter_alice_m) << ',' << format_number(t.jitter_bob_m) << ','
        << format_number(t.budget_alice.total_db()) << ',' << format_number(t.budget_bob.total_db()) << '\n';
  }
  return out.str();
}

RunReport rerun_from_report(const nlohmann::json& report) {
  const auto& prov = report.at("provenance");
  const Scenario scenario = parse_scenario(prov.at("scenario").get<std::string>());
  if (config_hash(scenario) != prov.at("config_hash").get<std::string>())
    throw ValidationError("report provenance: config hash does not match the embedded scenario");
  if (scenario.seed != prov.at("seed").get<std::uint64_t>() ||
      scenario.trials != prov.at("trials").get<std::uint64_t>())
    throw ValidationError("report provenance: seed or trial count disagrees with the scenario");
  return run_chsh_session(scenario);
}

}  // namespace entlink::harness
