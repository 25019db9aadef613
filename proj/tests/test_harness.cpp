#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "entlink/builtin.hpp"
#include "entlink/errors.hpp"
#include "entlink/plan_spec.hpp"
#include "entlink/scenario.hpp"
#include "entlink/session.hpp"
#include "entlink/sweep.hpp"
#include "ini.hpp"

using namespace entlink;
using namespace entlink::harness;

namespace {

Scenario builtin_scenario(std::string_view name) {
  const auto text = builtin_text(BuiltinKind::Scenario, name);
  REQUIRE(text.has_value());
  return parse_scenario(*text);
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("built-in files") {
  for (auto name : {"lab", "field-day", "field-clear-night", "field-rainy-night", "widearea-hap"})
    CHECK(builtin_text(BuiltinKind::Scenario, name).has_value());
  for (auto name : {"widearea", "local", "aperture"}) CHECK(builtin_text(BuiltinKind::Sweep, name).has_value());
  for (auto name : {"plan-local-200m", "plan-widearea-300km"}) CHECK(builtin_text(BuiltinKind::Plan, name).has_value());
  CHECK_FALSE(builtin_text(BuiltinKind::Sweep, "lab").has_value());
  CHECK_THROWS_AS(resolve_input(BuiltinKind::Scenario, "/nonexistent/file.ini"), ValidationError);
  CHECK_THROWS_AS(load_scenario("/nonexistent/file.ini"), ValidationError);
}

TEST_CASE("lab scenario") {
  const auto s = builtin_scenario("lab");
  CHECK(s.visibility == 0.974);
  CHECK(s.alice.distance_m == 0.0);
  CHECK(s.bob.distance_m == 0.0);
  CHECK(s.alice.static_db == 0.0);
  CHECK(s.bob.static_db == 0.0);
  const auto t = run_trial(s, 0);
  REQUIRE(t.ok);
  CHECK(t.budget_alice.total_db() == 0.0);
  CHECK(t.budget_bob.total_db() == 0.0);
  CHECK(t.accidental_fraction == doctest::Approx(0.003).epsilon(0.05));
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_scenario(""), ParseError);
  CHECK_THROWS_AS(parse_scenario("  \n\t\n"), ParseError);
  auto lab = std::string(*builtin_text(BuiltinKind::Scenario, "lab"));

  auto typo = lab;
  typo.replace(typo.find("window_s"), 8, "windw");
  const auto msg = message_of([&] { parse_scenario(typo); });
  CHECK(msg.find("windw") != std::string::npos);
  CHECK_THROWS_AS(parse_scenario(typo), ValidationError);

  CHECK(message_of([&] { parse_scenario(lab + "\n[weather]\nfog = 1\n"); }).find("weather") != std::string::npos);
  CHECK(message_of([&] { parse_scenario(lab + "\ncolour = blue\n"); }).find("colour") != std::string::npos);

  try {
    parse_scenario("name = x\n[source\npair_rate = 1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }

  auto bad = lab;
  bad.replace(bad.find("trials = 20"), 11, "trials = 0");
  CHECK(message_of([&] { parse_scenario(bad); }).find("trials") != std::string::npos);
  bad = lab;
  bad.replace(bad.find("pair_rate = 2400000"), 19, "pair_rate = 2.4e6x");
  CHECK(message_of([&] { parse_scenario(bad); }).find("source.pair_rate") != std::string::npos);
  bad = lab;
  bad.replace(bad.find("apt_preset = none"), 17, "apt_preset = hover");
  CHECK_THROWS_AS(parse_scenario(bad), ValidationError);
  bad = lab;
  bad.replace(bad.find("integration_s = 0.003"), 21, "integration_s = 200");
  CHECK(message_of([&] { parse_scenario(bad); }).find("integration_s") != std::string::npos);

  CHECK_THROWS_AS(ini::to_double("1.5x", "f"), ValidationError);
  CHECK_THROWS_AS(ini::to_uint("-3", "f"), ValidationError);
  CHECK(ini::to_double("3e-9", "f") == 3e-9);
}

TEST_CASE("config round trip") {
  for (const auto& f : builtin_files()) {
    if (f.kind != BuiltinKind::Scenario) continue;
    const auto s = parse_scenario(f.text);
    const auto text = serialize_scenario(s);
    const auto again = parse_scenario(text);
    CHECK(again == s);
    CHECK(serialize_scenario(again) == text);
    CHECK(config_hash(again) == config_hash(s));
    CHECK(config_hash(s).size() == 64);
    // key set is preserved
    const auto t1 = ini::parse(text);
    const auto t2 = ini::parse(f.text);
    for (const auto& [section, node] : t2)
      for (const auto& [key, leaf] : node) CHECK(t1.get_child_optional(section + "." + key).has_value());
  }
  auto s = builtin_scenario("lab");
  const auto h = config_hash(s);
  s.seed += 1;
  CHECK(config_hash(s) != h);
}

TEST_CASE("lab session reproduces the bench value") {
  auto s = builtin_scenario("lab");
  s.trials = 100;
  const auto r = run_chsh_session(s);
  CHECK(r.aggregate.completed == 100);
  CHECK(std::abs(r.aggregate.mean_abs_s - 2.725) <= 0.05);
}

TEST_CASE("sessions are deterministic and independent of threading") {
  auto s = builtin_scenario("field-day");
  s.trials = 1;
  CHECK(report_to_json(run_chsh_session(s)).dump() == report_to_json(run_chsh_session(s)).dump());
  s.trials = 6;
  const auto par = run_chsh_session(s);
  const auto ser = run_chsh_session_serial(s);
  CHECK(report_to_json(par).dump() == report_to_json(ser).dump());
  CHECK(report_to_csv(par) == report_to_csv(ser));
}

TEST_CASE("reports") {
  auto s = builtin_scenario("field-rainy-night");
  s.trials = 5;
  const auto r = run_chsh_session(s);
  const auto j = report_to_json(r);
  CHECK(j["provenance"]["config_hash"] == config_hash(s));
  CHECK(j["provenance"]["seed"] == s.seed);
  CHECK(j["provenance"]["version"] == std::string(kVersion));
  CHECK(j["trials"].size() == 5);

  // aggregate recomputable from rows
  std::vector<TrialResult> rows;
  for (const auto& t : j["trials"]) {
    TrialResult x;
    x.ok = t["ok"];
    x.abs_s = t["abs_s"];
    x.sigma = t["sigma"];
    rows.push_back(x);
  }
  const auto a = aggregate(rows);
  CHECK(a.mean_abs_s == doctest::Approx(j["aggregate"]["mean_abs_s"].get<double>()).epsilon(1e-14));
  CHECK(a.std_abs_s == doctest::Approx(j["aggregate"]["std_abs_s"].get<double>()).epsilon(1e-14));
  CHECK(a.violation_sigmas == doctest::Approx(j["aggregate"]["violation_sigmas"].get<double>()).epsilon(1e-14));

  // provenance block reproduces the report
  CHECK(report_to_json(rerun_from_report(j)).dump() == j.dump());
  auto tampered = j;
  tampered["provenance"]["seed"] = s.seed + 1;
  CHECK_THROWS_AS(rerun_from_report(tampered), ValidationError);

  const auto csv = report_to_csv(r);
  CHECK(csv.rfind("trial,seed,ok,s,sigma,abs_s", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}

TEST_CASE("daylight raises accidentals") {
  const auto day = builtin_scenario("field-day");
  const auto night = builtin_scenario("field-clear-night");
  CHECK(day.alice.background_per_lx == night.alice.background_per_lx);
  CHECK(day.illuminance_lx > night.illuminance_lx);
  auto dark_day = day;
  dark_day.illuminance_lx = 0.0;
  const auto a = run_trial(day, 0);
  const auto b = run_trial(dark_day, 0);
  REQUIRE(a.ok);
  REQUIRE(b.ok);
  CHECK(a.accidental_fraction > b.accidental_fraction);
  CHECK(day.alice.background(day.illuminance_lx) > night.alice.background(night.illuminance_lx));
}

TEST_CASE("field link budgets") {
  const auto s = builtin_scenario("field-clear-night");
  for (std::uint64_t i = 0; i < 5; ++i) {
    const auto t = run_trial(s, i);
    REQUIRE(t.ok);
    CHECK(std::abs(t.budget_alice.total_db() - 12.0) <= 1.0);
    CHECK(std::abs(t.budget_bob.total_db() - 14.0) <= 1.0);
    CHECK(t.jitter_alice_m > 0.0);
  }
}

TEST_CASE("lock loss is a failed trial") {
  auto s = builtin_scenario("field-clear-night");
  s.alice.distance_m = 2.0;  // airframe sway becomes a huge angle
  const auto t = run_trial(s, 0);
  CHECK_FALSE(t.ok);
  CHECK_FALSE(t.failure.empty());
  s.trials = 3;
  const auto r = run_chsh_session(s);
  CHECK(r.aggregate.failed == 3);
  CHECK(report_to_json(r)["trials"][0]["ok"] == false);
}

TEST_CASE("link budget sweeps") {
  const auto wide = parse_sweep(*builtin_text(BuiltinKind::Sweep, "widearea"));
  const auto table = run_linkbudget(wide);
  bool found = false;
  for (const auto& r : table.rows)
    if (std::abs(r.x - 100e3) < 1e-6) {
      found = true;
      CHECK(std::abs(r.loss_db - 2.79) <= 0.75);
    }
  CHECK(found);
  const auto ap = run_linkbudget(parse_sweep(*builtin_text(BuiltinKind::Sweep, "aperture")));
  CHECK(ap.x_column == "aperture_m");
  for (std::size_t i = 1; i < ap.rows.size(); ++i) CHECK(ap.rows[i].loss_db <= ap.rows[i - 1].loss_db);
  const auto local = run_linkbudget(parse_sweep(*builtin_text(BuiltinKind::Sweep, "local")));
  for (std::size_t i = 1; i < local.rows.size(); ++i) CHECK(local.rows[i].loss_db >= local.rows[i - 1].loss_db);

  LinkSweep fixed = wide;
  fixed.kind = "distance";
  fixed.aperture_m = 0.0264;
  fixed.waist = "fixed";
  fixed.waist_w0_m = 0.0264 / std::sqrt(2 * std::log(2.0));
  fixed.start = 10;
  fixed.stop = 1000;
  fixed.spacing = "log";
  const auto ft = run_linkbudget(fixed);
  for (std::size_t i = 1; i < ft.rows.size(); ++i) CHECK(ft.rows[i].loss_db >= ft.rows[i - 1].loss_db);

  CHECK(sweep_to_csv(table).rfind("distance_m,loss_db\n", 0) == 0);
  CHECK(sweep_to_json(wide, table)["rows"].size() == table.rows.size());
  CHECK_THROWS_AS(parse_sweep("[sweep]\nname = x\nkind = height\n"), ValidationError);
  CHECK_THROWS_AS(parse_sweep("[sweep]\nname = x\nstart = 5\nstop = 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_sweep("[sweep]\nname = x\nstep = 1\n"), ValidationError);
}

TEST_CASE("plans") {
  const auto local = run_plan(parse_plan_spec(*builtin_text(BuiltinKind::Plan, "plan-local-200m")));
  REQUIRE(local.plan.nodes().size() == 3);
  CHECK(local.plan.nodes()[1].kind == network::NodeKind::Drone);
  CHECK(local.plan.links()[0].distance == 100.0);
  CHECK(local.plan.links()[1].distance == 100.0);
  CHECK(local.plan.predicted().has_value());
  CHECK(local.summary.find("feasible") != std::string::npos);

  auto trivial = parse_plan_spec(*builtin_text(BuiltinKind::Plan, "plan-widearea-300km"));
  trivial.total_distance_m = 100.0;
  const auto t = run_plan(trivial);
  CHECK(t.plan.relay_count() == 0);
  CHECK(t.plan.links().size() == 1);

  const auto spec = parse_plan_spec(*builtin_text(BuiltinKind::Plan, "plan-widearea-300km"));
  const auto wide = run_plan(spec);
  CHECK(wide.plan.relay_count() == 3);
  const auto j = plan_to_json(spec, wide);
  CHECK(j["links"].size() == 4);
  CHECK(j["feasibility"][0]["feasible"] == true);
  CHECK(j["predicted"]["abs_s"].get<double>() > 2.0);

  auto tight = spec;
  tight.k_max = 2;
  try {
    run_plan(tight);
    FAIL("expected infeasible");
  } catch (const InfeasibleError& e) {
    CHECK(e.binding() == "loss");
  }
  CHECK_THROWS_AS(parse_plan_spec("[plan]\nname = x\ntopology = mesh\n"), ValidationError);
  CHECK_THROWS_AS(parse_plan_spec("[plan]\nname = x\n[hop]\ncondition = fog\n"), ValidationError);
}
