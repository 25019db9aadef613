#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "entlink/apt.hpp"
#include "entlink/errors.hpp"

using namespace entlink;
using namespace entlink::apt;

namespace {

AptTrace run(const Preset& p, std::uint64_t seed, double duration = 10.0, double dt = 0.0) {
  return simulate_apt(p.system, p.disturbance, p.link_distance, duration, dt > 0 ? dt : p.dt, seed);
}

double fine_rms(const AptTrace& t) {
  const double x = rms(t.axes[0].fine_error), y = rms(t.axes[1].fine_error);
  return std::sqrt((x * x + y * y) / 2);
}

}  // namespace

TEST_CASE("rms") {
  const std::vector<double> c(17, -3.0);
  CHECK(rms(c) == doctest::Approx(3.0));
  std::vector<double> s;
  for (int i = 0; i < 4000; ++i) s.push_back(2.0 * std::sin(2 * std::numbers::pi * 5 * i / 1000.0));
  CHECK(rms(s) == doctest::Approx(2.0 / std::sqrt(2.0)).epsilon(0.01));
  std::vector<double> twice = s;
  twice.insert(twice.end(), s.begin(), s.end());
  CHECK(rms(twice) == doctest::Approx(rms(s)).epsilon(1e-12));
  CHECK_THROWS_AS(rms(std::vector<double>{}), ValidationError);
}

TEST_CASE("presets") {
  CHECK(preset_names().size() == 2);
  for (auto name : preset_names()) CHECK_NOTHROW(preset(name).system.validate());
  CHECK_THROWS_AS(preset("hover"), ValidationError);
}

TEST_CASE("quiet system stays at zero") {
  auto p = preset("flight");
  p.disturbance = {};
  p.system.coarse.plant.sensor_noise_rms = 0.0;
  p.system.fine.plant.sensor_noise_rms = 0.0;
  p.system.initial_offset = 0.0;
  const auto t = run(p, 3, 1.0);
  for (const auto& ax : t.axes)
    for (double v : ax.fine_error) REQUIRE(v == 0.0);
  CHECK(t.locked_fraction == 1.0);
}

TEST_CASE("calibrated bands and ordering") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const double g = jitter_summary(run(preset("ground"), seed));
    const double f = jitter_summary(run(preset("flight"), seed));
    CHECK(g >= 0.3e-6);
    CHECK(g <= 1.4e-6);
    CHECK(f >= 0.4e-6);
    CHECK(f <= 1.6e-6);
    CHECK(f > g);
  }
}

TEST_CASE("closed loop beats open loop by 20x") {
  for (auto name : preset_names()) {
    const auto p = preset(name);
    auto open = p;
    open.system.coarse.gains = {0.0, 0.0, 0.0, 1.0};
    open.system.fine.gains = {0.0, 0.0, 0.0, 1.0};
    const double closed_rms = fine_rms(run(p, 4));
    const double open_rms = fine_rms(run(open, 4));
    CHECK(closed_rms * 20.0 <= open_rms);
  }
}

TEST_CASE("determinism") {
  const auto p = preset("flight");
  const auto a = run(p, 11, 1.0);
  const auto b = run(p, 11, 1.0);
  for (int ax = 0; ax < 2; ++ax) {
    CHECK(a.axes[ax].fine_error == b.axes[ax].fine_error);
    CHECK(a.axes[ax].coarse_error == b.axes[ax].coarse_error);
    CHECK(a.axes[ax].gimbal == b.axes[ax].gimbal);
    CHECK(a.axes[ax].fsm == b.axes[ax].fsm);
  }
  CHECK(a.locked_fraction == b.locked_fraction);
  CHECK_FALSE(run(p, 12, 1.0).axes[0].fine_error == a.axes[0].fine_error);
}

TEST_CASE("stable up to five times the calibrated disturbance") {
  for (auto name : preset_names()) {
    auto p = preset(name);
    p.disturbance.broadband_rms *= 5;
    for (auto& s : p.disturbance.sinusoids) s.amplitude *= 5;
    AptTrace t;
    CHECK_NOTHROW(t = run(p, 5));
    CHECK(t.locked_fraction >= kMinLockedFraction);
  }
}

TEST_CASE("loop separation") {
  for (auto name : preset_names()) {
    const auto p = preset(name);
    auto no_fine = p;
    no_fine.system.fine.gains = {0.0, 0.0, 0.0, 1.0};
    CHECK(fine_rms(run(no_fine, 6)) > fine_rms(run(p, 6)));

    auto no_coarse = p;
    no_coarse.system.coarse.gains = {0.0, 0.0, 0.0, 1.0};
    no_coarse.disturbance.broadband_rms *= 3;
    const auto t = run(no_coarse, 6);
    CHECK(t.locked_fraction < kMinLockedFraction);
    CHECK_THROWS_AS(jitter_summary(t), LockLostError);
  }
}

TEST_CASE("dt refinement") {
  for (auto name : preset_names()) {
    const auto p = preset(name);
    const double coarse_dt = fine_rms(run(p, 7, 10.0, p.dt));
    const double fine_dt = fine_rms(run(p, 7, 10.0, p.dt / 2));
    CHECK(std::abs(fine_dt - coarse_dt) < 0.05 * coarse_dt);
  }
}

TEST_CASE("broadband linearity") {
  auto p = preset("flight");
  const double base = jitter_summary(run(p, 8));
  p.disturbance.broadband_rms *= 2;
  const double doubled = jitter_summary(run(p, 8));
  CHECK(doubled / base == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("actuator limits hold") {
  for (auto name : preset_names()) {
    auto p = preset(name);
    p.disturbance.broadband_rms *= 5;
    const auto t = run(p, 9, 5.0);
    const auto& c = p.system.coarse.plant;
    const auto& f = p.system.fine.plant;
    for (const auto& ax : t.axes) {
      for (std::size_t k = 0; k < ax.gimbal.size(); ++k) {
        REQUIRE(std::abs(ax.fsm[k]) <= f.range);
        if (k > 0) {
          REQUIRE(std::abs(ax.gimbal[k] - ax.gimbal[k - 1]) <= c.rate_limit * t.dt * (1 + 1e-9));
          REQUIRE(std::abs(ax.fsm[k] - ax.fsm[k - 1]) <= f.rate_limit * t.dt * (1 + 1e-9));
        }
      }
      for (double g : ax.gimbal) REQUIRE(std::abs(g) <= c.range);
    }
  }
}

TEST_CASE("divergence is reported") {
  // positive feedback on an unsaturated gimbal grows without bound
  auto p = preset("ground");
  p.system.coarse.gains = {-5.0, 0.0, 0.0, 1.0};
  p.system.coarse.plant.range = 1e12;
  p.system.coarse.plant.rate_limit = 1e15;
  CHECK_THROWS_AS(run(p, 1, 1.0), DivergenceError);
}

TEST_CASE("preconditions") {
  const auto p = preset("ground");
  CHECK_THROWS_AS(run(p, 1, 1.0, 1e-3), ValidationError);  // slower than 10x the FSM bandwidth
  CHECK_THROWS_AS(run(p, 1, 0.05), ValidationError);       // shorter than 1000 steps
  auto bad = p;
  bad.system.fine.plant.bandwidth_hz = 0.0;
  CHECK_THROWS_AS(run(bad, 1, 1.0), ValidationError);
  bad = p;
  bad.disturbance.sinusoids.push_back({-1.0, 1.0, 0.0});
  CHECK_THROWS_AS(run(bad, 1, 1.0), ValidationError);
  bad = p;
  bad.system.coarse.gains.integrator_clamp = 0.0;
  CHECK_THROWS_AS(run(bad, 1, 1.0), ValidationError);
}

TEST_CASE("trace csv") {
  const auto t = run(preset("ground"), 1, 0.1);
  std::ostringstream out;
  write_trace_csv(out, t, 1);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t_s,coarse_error_rad,fine_error_m");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == t.size());
  CHECK(t.axes[0].coarse_error.size() == t.size());
  CHECK(t.locked_fraction >= 0.0);
  CHECK(t.locked_fraction <= 1.0);
}
