// Acceptance gates. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "entlink/apt.hpp"
#include "entlink/builtin.hpp"
#include "entlink/counting.hpp"
#include "entlink/errors.hpp"
#include "entlink/network.hpp"
#include "entlink/optics.hpp"
#include "entlink/qstate.hpp"
#include "entlink/scenario.hpp"
#include "entlink/session.hpp"
#include "oracle.hpp"
#include "planner_oracle.hpp"

using namespace entlink;

namespace {

constexpr double kTsirelson = 2.0 * std::numbers::sqrt2;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int id, const std::string& title, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0.0) o.require(secs < budget_s, "runtime " + std::to_string(secs) + " s");
  if (!o.pass) ++failures;
  std::printf("%s  %d. %s (%.2f s)%s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), secs, o.detail.str().c_str());
  std::fflush(stdout);
}

harness::Scenario shipped(std::string_view name) {
  return harness::parse_scenario(*harness::builtin_text(harness::BuiltinKind::Scenario, name));
}

std::string cli(const std::string& args, int& code) {
  const std::string cmd = std::string(ENTLINK_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) throw std::runtime_error("popen failed");
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  const int status = pclose(p);
  code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / v.size();
}

double sd_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

}  // namespace

int main() {
  criterion(1, "analytic CHSH at the canonical projection groups", 1.0, [](Outcome& o) {
    const auto ang = qstate::canonical_angles();
    const double s = std::abs(qstate::chsh_S_analytic(qstate::bell_psi_minus(), ang));
    const double m = std::abs(qstate::chsh_S_analytic(qstate::maximally_mixed(), ang));
    o.detail << " |S|(psi-) = " << s << ", |S|(I/4) = " << m;
    o.require(std::abs(s - kTsirelson) <= 1e-9, "singlet");
    o.require(m <= 1e-9, "mixed");
  });

  criterion(2, "Werner linearity and the lab value", 0.0, [](Outcome& o) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double v = u(rng);
      worst = std::max(worst, std::abs(std::abs(qstate::chsh_S_analytic(qstate::werner(v), qstate::canonical_angles())) - kTsirelson * v));
    }
    const double s974 = std::abs(qstate::chsh_S_analytic(qstate::werner(0.974), qstate::canonical_angles()));
    const auto trial = harness::run_trial(shipped("lab"), 0);
    const double folded = s974 * (1.0 - trial.accidental_fraction);
    o.detail << " max dev " << worst << ", |S|(0.974) = " << s974 << ", accidental fraction " << trial.accidental_fraction
             << ", folded " << folded;
    o.require(worst <= 1e-9, "linearity");
    o.require(std::abs(s974 - 2.7546) < 5e-4, "2.7546");
    o.require(std::abs(trial.accidental_fraction - 0.003) < 0.0005, "0.3% accidental fraction");
    o.require(std::abs(folded - 2.725) <= 0.05, "lab consistency");
  });

  criterion(3, "diffraction point and curve shapes", 5.0, [](Outcome& o) {
    const double wide = optics::diffraction_loss_db(optics::BeamGeometry::symmetric(0.3), 100e3);
    o.detail << " 300 mm @ 100 km = " << wide << " dB";
    o.require(std::abs(wide - 2.79) <= 0.75, "2.79 +/- 0.75 dB");
    const auto fixed = optics::WaistMode::fixed(optics::waist_from_fwhm(0.0264));
    for (const auto& mode : {optics::WaistMode::optimal(), fixed}) {
      double prev = -1.0;
      for (int i = 0; i <= 100; ++i) {
        const double z = 10.0 * std::pow(100.0, i / 100.0);
        const double l = optics::diffraction_loss_db(optics::BeamGeometry::symmetric(0.0264, mode), z);
        o.require(l >= prev, "distance shape at " + std::to_string(z));
        prev = l;
      }
    }
    double prev = 1e300;
    for (int i = 0; i <= 100; ++i) {
      const double a = 0.002 + 0.048 * i / 100.0;
      const double l = optics::diffraction_loss_db(optics::BeamGeometry::symmetric(a), 100.0);
      o.require(l <= prev, "aperture shape at " + std::to_string(a));
      prev = l;
    }
  });

  criterion(4, "field reproduction from the shipped scenarios", 120.0, [](Outcome& o) {
    struct Target {
      const char* name;
      double centre, half;
    };
    for (const Target t : {Target{"field-day", 2.41, 0.14}, Target{"field-clear-night", 2.41, 0.24},
                           Target{"field-rainy-night", 2.49, 0.09}}) {
      auto s = shipped(t.name);
      s.trials = 200;
      const auto r = harness::run_chsh_session(s);
      const auto& a = r.aggregate;
      o.detail << " " << t.name << " |S| = " << a.mean_abs_s << " +/- " << a.mean_sigma << " ("
               << a.violation_sigmas << " sigma, " << a.failed << " failed);";
      o.require(a.failed == 0, std::string(t.name) + " failed trials");
      o.require(std::abs(a.mean_abs_s - t.centre) <= t.half, t.name);
      if (std::string(t.name) == "field-rainy-night") o.require(a.violation_sigmas >= 5.0, "rainy violation >= 5 sigma");
    }
  });

  criterion(5, "tracking residual bands", 30.0, [](Outcome& o) {
    const std::uint64_t seed = 1;
    auto run = [&](const apt::Preset& p) {
      return apt::simulate_apt(p.system, p.disturbance, p.link_distance, p.duration, p.dt, seed);
    };
    const double g = apt::jitter_summary(run(apt::preset("ground")));
    const double f = apt::jitter_summary(run(apt::preset("flight")));
    o.detail << " ground " << g * 1e6 << " um, flight " << f * 1e6 << " um";
    o.require(g >= 0.3e-6 && g <= 1.4e-6, "ground band");
    o.require(f >= 0.4e-6 && f <= 1.6e-6, "flight band");
    o.require(f > g, "flight > ground");
    for (auto name : apt::preset_names()) {
      const auto p = apt::preset(name);
      auto open = p;
      open.system.coarse.gains = {0.0, 0.0, 0.0, 1.0};
      open.system.fine.gains = {0.0, 0.0, 0.0, 1.0};
      const auto closed_t = run(p);
      const auto open_t = run(open);
      double c = 0.0, u = 0.0;
      for (int ax = 0; ax < 2; ++ax) {
        c += std::pow(apt::rms(closed_t.axes[ax].fine_error), 2);
        u += std::pow(apt::rms(open_t.axes[ax].fine_error), 2);
      }
      const double ratio = std::sqrt(c / u);
      o.detail << ", " << name << " closed/open " << ratio;
      o.require(ratio <= 1.0 / 20.0, std::string(name) + " ratio");
    }
  });

  criterion(6, "pointing penalty vs Monte Carlo", 0.0, [](Outcome& o) {
    const optics::FiberMode smf{5e-6};
    const double wm = 2.5e-6;
    std::mt19937_64 rng(6);
    double worst = 0.0;
    for (int i = 0; i <= 8; ++i) {
      const double s = wm * 2.0 * i / 8.0;
      const double mc = -10.0 * std::log10(oracle::mean_overlap_mc(s, wm, 1000000, rng));
      worst = std::max(worst, std::abs(mc - optics::pointing_penalty_db(s, smf)));
    }
    const double p = optics::pointing_penalty_db(1.33e-6, smf);
    o.detail << " max |MC - closed| = " << worst << " dB, penalty(1.33 um) = " << p << " dB";
    o.require(worst < 0.02, "Monte Carlo agreement");
    o.require(std::abs(p - 3.29) <= 0.05, "3.29 dB");
  });

  criterion(7, "estimator statistics", 60.0, [](Outcome& o) {
    counting::CountingConfig c;
    c.pair_rate = 2.4e6;
    c.eta_a = 0.063;
    c.eta_b = 0.04;
    c.bg_a = 2000;
    c.bg_b = 2000;
    c.integration = 0.01;
    const auto w = qstate::werner(0.974);
    const auto es = counting::simulate_E_ensemble(w, {0.0, std::numbers::pi / 8}, c, 70, 10000);
    std::vector<double> vals, sig;
    for (const auto& e : es) {
      vals.push_back(e.value);
      sig.push_back(e.sigma);
    }
    const double ratio_e = mean_of(sig) / sd_of(vals);
    auto mean_sigma_s = [&](std::uint64_t seed) {
      std::vector<double> s;
      for (const auto& e : counting::simulate_S_ensemble(w, qstate::canonical_angles(), c, seed, 2000)) s.push_back(e.sigma);
      return mean_of(s);
    };
    const double s1 = mean_sigma_s(71);
    c.integration *= 2.0;
    const double s2 = mean_sigma_s(72);
    o.detail << " sigma_E / empirical = " << ratio_e << ", sigma_S(2T)/sigma_S(T) = " << s2 / s1;
    o.require(std::abs(ratio_e - 1.0) <= 0.10, "sigma_E within 10%");
    o.require(std::abs(s2 / s1 * std::numbers::sqrt2 - 1.0) <= 0.10, "1/sqrt(2) scaling");
  });

  criterion(8, "planner vs exhaustive grid, horizon", 30.0, [](Outcome& o) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0, feasible = 0;
    for (int inst = 0; inst < 24; ++inst) {
      network::HopModel hop;
      hop.condition = optics::Condition::ClearNight;
      const network::NodeSpec node{"x", network::NodeKind::Drone, 50.0 + 400.0 * u(rng), 0.02 + 0.1 * u(rng), 0.0};
      const double total = 2e3 + 40e3 * u(rng);
      const double max_db = 4.0 + 10.0 * u(rng);
      const auto g = oracle::grid_search(total, node, max_db, hop, 6, 60);
      ++checked;
      if (g.k == 0) {
        bool threw = false;
        try {
          network::plan_relay_chain(total, node, max_db, hop, 6);
        } catch (const InfeasibleError&) {
          threw = true;
        }
        o.require(threw, "instance " + std::to_string(inst) + " infeasible");
        continue;
      }
      ++feasible;
      const auto p = network::plan_relay_chain(total, node, max_db, hop, 6);
      o.require(p.relay_count() == g.k - 1, "instance " + std::to_string(inst) + " relay count");
      o.require(std::abs(p.max_link_db() - g.max_db) <= 1e-9 * std::max(1.0, g.max_db),
                "instance " + std::to_string(inst) + " max loss");
    }
    const double h = network::horizon_distance(20e3, 20e3);
    o.detail << " " << checked << " instances (" << feasible << " feasible), horizon " << h / 1e3 << " km";
    o.require(checked >= 20, "instance count");
    o.require(std::abs(h / 1e3 - 1009.0) < 1.0, "1009 km");
    o.require(h > 300e3, "300 km within the horizon");
  });

  criterion(9, "CLI determinism and provenance", 0.0, [](Outcome& o) {
    const std::vector<std::string> runs{
        "chsh lab --trials 5 --seed 3",        "chsh widearea-hap --trials 2 --format csv",
        "chsh field-day --trials 3 --seed 8",  "linkbudget widearea",
        "linkbudget local --format json",      "apt flight --duration 1 --seed 2",
        "apt ground --duration 1 --format json", "plan plan-local-200m",
        "plan plan-widearea-300km --format csv"};
    for (const auto& args : runs) {
      int c1 = 0, c2 = 0;
      const auto a = cli(args, c1);
      const auto b = cli(args, c2);
      o.require(c1 == 0 && c2 == 0, args + " exit code");
      o.require(!a.empty() && a == b, args + " bytes differ");
    }
    const std::string path = "acceptance_report.json";
    int code = 0;
    cli("chsh field-clear-night --trials 3 --seed 5 --out " + path, code);
    o.require(code == 0, "report written");
    cli("report " + path, code);
    o.require(code == 0, "report reproduced from provenance");
    std::remove(path.c_str());
    o.detail << " " << runs.size() << " commands run twice";
  });

  std::printf("%d of 9 criteria failed\n", failures);
  return failures;
}
