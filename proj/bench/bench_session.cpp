// Serial vs OpenMP timing for the two trial fan-outs. Checks that both
// paths produce identical results before printing times.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <omp.h>

#include "entlink/builtin.hpp"
#include "entlink/counting.hpp"
#include "entlink/session.hpp"

using namespace entlink;

namespace {

template <typename Fn>
double seconds(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const std::uint64_t trials = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 64;
  std::printf("threads: %d\n", omp_get_max_threads());

  auto s = harness::parse_scenario(*harness::builtin_text(harness::BuiltinKind::Scenario, "field-rainy-night"));
  s.trials = trials;
  harness::RunReport serial, parallel;
  const double ts = seconds([&] { serial = harness::run_chsh_session_serial(s); });
  const double tp = seconds([&] { parallel = harness::run_chsh_session(s); });
  const bool same = harness::report_to_json(serial).dump() == harness::report_to_json(parallel).dump();
  std::printf("chsh session  %4llu trials  serial %8.3f s  parallel %8.3f s  speedup %5.2f  identical %s\n",
              static_cast<unsigned long long>(trials), ts, tp, ts / tp, same ? "yes" : "NO");

  counting::CountingConfig c;
  c.pair_rate = 2.4e6;
  c.eta_a = 0.063;
  c.eta_b = 0.04;
  c.bg_a = 2000;
  c.bg_b = 2000;
  c.integration = 0.05;
  const std::size_t n = 200 * trials;
  std::vector<counting::EstimateWithError> a, b;
  const auto w = qstate::werner(0.974);
  const double es = seconds([&] { a = counting::simulate_S_ensemble_serial(w, qstate::canonical_angles(), c, 1, n); });
  const double ep = seconds([&] { b = counting::simulate_S_ensemble(w, qstate::canonical_angles(), c, 1, n); });
  bool same_s = a.size() == b.size();
  for (std::size_t i = 0; same_s && i < a.size(); ++i) same_s = a[i].value == b[i].value && a[i].sigma == b[i].sigma;
  std::printf("S ensemble   %6zu trials  serial %8.3f s  parallel %8.3f s  speedup %5.2f  identical %s\n", n, es, ep,
              es / ep, same_s ? "yes" : "NO");
  return same && same_s ? 0 : 1;
}
