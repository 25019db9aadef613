// entlink: command-line front end for the session, sweep, tracking and
// planning tools.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "entlink/apt.hpp"
#include "entlink/builtin.hpp"
#include "entlink/errors.hpp"
#include "entlink/format.hpp"
#include "entlink/plan_spec.hpp"
#include "entlink/scenario.hpp"
#include "entlink/session.hpp"
#include "entlink/sweep.hpp"

namespace {

using namespace entlink;
using harness::BuiltinKind;

constexpr int kOk = 0;
constexpr int kMismatch = 1;
constexpr int kInvalid = 2;
constexpr int kDiverged = 3;

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::string out;
  std::string format;
};

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + c.out + "'");
  f << text;
}

int cmd_chsh(const std::string& name, const Common& c) {
  auto s = harness::parse_scenario(harness::resolve_input(BuiltinKind::Scenario, name));
  if (c.seed) s.seed = *c.seed;
  if (c.trials) s.trials = *c.trials;
  const auto report = harness::run_chsh_session(s);
  emit(c, c.format == "csv" ? harness::report_to_csv(report) : dump(harness::report_to_json(report)));
  const auto& a = report.aggregate;
  std::cerr << s.name << ": " << a.completed << " trial(s), " << a.failed << " failed, |S| = "
            << format_number(a.mean_abs_s) << " +/- " << format_number(a.mean_sigma) << " ("
            << format_number(a.violation_sigmas) << " sigma)\n";
  return kOk;
}

int cmd_linkbudget(const std::string& name, const Common& c) {
  const auto sweep = harness::parse_sweep(harness::resolve_input(BuiltinKind::Sweep, name));
  const auto table = harness::run_linkbudget(sweep);
  emit(c, c.format == "json" ? dump(harness::sweep_to_json(sweep, table)) : harness::sweep_to_csv(table));
  return kOk;
}

int cmd_apt(const std::string& name, const Common& c, double duration) {
  auto p = apt::preset(name);
  if (duration > 0.0) p.duration = duration;
  const std::uint64_t seed = c.seed.value_or(1);
  const auto trace = apt::simulate_apt(p.system, p.disturbance, p.link_distance, p.duration, p.dt, seed);
  if (c.format == "json") {
    nlohmann::json j{{"preset", name},
                     {"seed", seed},
                     {"duration_s", p.duration},
                     {"dt_s", p.dt},
                     {"locked_fraction", trace.locked_fraction},
                     {"fine_rms_x_m", apt::rms(trace.axes[0].fine_error)},
                     {"fine_rms_y_m", apt::rms(trace.axes[1].fine_error)}};
    try {
      j["jitter_m"] = apt::jitter_summary(trace);
    } catch (const LockLostError& e) {
      j["jitter_m"] = nullptr;
      j["failure"] = e.what();
    }
    emit(c, dump(j));
  } else {
    std::ostringstream out;
    apt::write_trace_csv(out, trace, 0);
    emit(c, out.str());
  }
  return kOk;
}

int cmd_plan(const std::string& name, const Common& c) {
  const auto spec = harness::parse_plan_spec(harness::resolve_input(BuiltinKind::Plan, name));
  const auto result = harness::run_plan(spec);
  std::cerr << result.summary;
  if (c.format == "csv") {
    std::ostringstream out;
    out << "from,to,distance_m,diffraction_db,atmospheric_db,pointing_db,static_db,total_db\n";
    for (const auto& l : result.plan.links())
      out << l.from << ',' << l.to << ',' << format_number(l.distance) << ','
          << format_number(l.budget.diffraction_db()) << ',' << format_number(l.budget.atmospheric_db()) << ','
          << format_number(l.budget.pointing_db()) << ',' << format_number(l.budget.static_coupling_db()) << ','
          << format_number(l.budget.total_db()) << '\n';
    emit(c, out.str());
  } else {
    emit(c, dump(harness::plan_to_json(spec, result)));
  }
  return kOk;
}

int cmd_report(const std::string& path, const Common& c) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read report '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string original = buf.str();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(original);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report is not valid JSON: ") + e.what(), 0);
  }
  const auto again = harness::rerun_from_report(j);
  const std::string text = dump(harness::report_to_json(again));
  if (!c.out.empty()) emit(c, c.format == "csv" ? harness::report_to_csv(again) : text);
  if (text != original) {
    std::cerr << path << ": re-run does not reproduce the report\n";
    return kMismatch;
  }
  std::cerr << path << ": reproduced (" << again.config_hash << ")\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entangled-photon link simulator"};
  app.set_version_flag("--version", std::string(entlink::harness::kVersion));
  app.require_subcommand(1);

  Common c;
  std::string target;
  double apt_duration = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "root seed (overrides the file)");
    sub->add_option("--trials", c.trials, "trial count (overrides the file)")->check(CLI::PositiveNumber);
    sub->add_option("--out", c.out, "write output here instead of stdout");
    sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };

  auto* chsh = app.add_subcommand("chsh", "run a CHSH session from a scenario");
  chsh->add_option("scenario", target, "built-in name or INI path")->required();
  auto* lb = app.add_subcommand("linkbudget", "diffraction-loss sweep");
  lb->add_option("sweep", target, "built-in name or INI path")->required();
  auto* aptc = app.add_subcommand("apt", "simulate a tracking preset, trace of axis x");
  aptc->add_option("preset", target, "ground or flight")->required();
  aptc->add_option("--duration", apt_duration, "seconds (default: preset)");
  auto* plan = app.add_subcommand("plan", "plan a relay chain");
  plan->add_option("spec", target, "built-in name or INI path")->required();
  auto* report = app.add_subcommand("report", "re-run a JSON report and compare bytes");
  report->add_option("path", target, "report file")->required();
  for (auto* sub : {chsh, lb, aptc, plan, report}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  try {
    if (chsh->parsed()) {
      if (c.format.empty()) c.format = "json";
      return cmd_chsh(target, c);
    }
    if (lb->parsed()) {
      if (c.format.empty()) c.format = "csv";
      return cmd_linkbudget(target, c);
    }
    if (aptc->parsed()) {
      if (c.format.empty()) c.format = "csv";
      return cmd_apt(target, c, apt_duration);
    }
    if (plan->parsed()) {
      if (c.format.empty()) c.format = "json";
      return cmd_plan(target, c);
    }
    if (c.format.empty()) c.format = "json";
    return cmd_report(target, c);
  } catch (const DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kDiverged;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible (" << e.binding() << "): " << e.what() << '\n';
    return kInvalid;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kInvalid;
  } catch (const LockLostError& e) {
    std::cerr << "lock lost: " << e.what() << '\n';
    return kInvalid;
  } catch (const ValidationError& e) {
    std::cerr << "invalid: " << e.what() << '\n';
    return kInvalid;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "invalid report: " << e.what() << '\n';
    return kInvalid;
  }
}
