#include "entlink/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <openssl/evp.h>
#include <sstream>

#include "entlink/apt.hpp"
#include "entlink/errors.hpp"
#include "ini.hpp"

namespace entlink::harness {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::vector<ini::Field<Scenario>> scenario_fields() {
  using S = Scenario;
  std::vector<ini::Field<S>> f{
      ini::number("", "name", &S::name),
      ini::number("", "seed", &S::seed),
      ini::number("", "trials", &S::trials),
      ini::number("source", "pair_rate", &S::pair_rate),
      ini::number("source", "visibility", &S::visibility),
      ini::number("counting", "window_s", &S::window_s),
      ini::number("counting", "integration_s", &S::integration_s),
      ini::number("counting", "session_s", &S::session_s),
      ini::number("counting", "illuminance_lx", &S::illuminance_lx),
      ini::number("angles", "a_deg", &S::a_deg),
      ini::number("angles", "a_prime_deg", &S::a_prime_deg),
      ini::number("angles", "b_deg", &S::b_deg),
      ini::number("angles", "b_prime_deg", &S::b_prime_deg),
      ini::number("apt", "duration_s", &S::apt_duration_s),
  };
  for (const auto* station : {"alice", "bob"}) {
    StationLink S::*link = std::string_view(station) == "alice" ? &S::alice : &S::bob;
    auto add = [&]<typename M>(const char* key, M StationLink::*m) {
      auto inner = ini::number<StationLink>(station, key, m);
      ini::Field<S> field;
      field.section = inner.section;
      field.key = inner.key;
      field.set = [inner, link](S& s, std::string_view v, const std::string& path) { inner.set(s.*link, v, path); };
      field.get = [inner, link](const S& s) { return inner.get(s.*link); };
      f.push_back(std::move(field));
    };
    add("distance_m", &StationLink::distance_m);
    add("aperture_m", &StationLink::aperture_m);
    add("wavelength_m", &StationLink::wavelength_m);
    add("waist", &StationLink::waist);
    add("waist_w0_m", &StationLink::waist_w0_m);
    add("condition", &StationLink::condition);
    add("static_db", &StationLink::static_db);
    add("apt_preset", &StationLink::apt_preset);
    add("mfd_m", &StationLink::mfd_m);
    add("rotation_deg", &StationLink::rotation_deg);
    add("dark_counts", &StationLink::dark_counts);
    add("background_per_lx", &StationLink::background_per_lx);
  }
  return f;
}

void validate_station(const StationLink& l, const std::string& who) {
  auto fail = [&](const std::string& key, const std::string& what) {
    throw ValidationError("field '" + who + "." + key + "': " + what);
  };
  if (!(l.distance_m >= 0.0)) fail("distance_m", "must be >= 0");
  if (!(l.aperture_m > 0.0)) fail("aperture_m", "must be > 0");
  if (!(l.wavelength_m > 0.0 && l.wavelength_m < l.aperture_m)) fail("wavelength_m", "must be in (0, aperture)");
  if (l.waist != "optimal" && l.waist != "fixed") fail("waist", "must be 'optimal' or 'fixed'");
  if (l.waist == "fixed" && !(l.waist_w0_m > 0.0)) fail("waist_w0_m", "must be > 0 for a fixed waist");
  try {
    optics::parse_condition(l.condition);
  } catch (const ValidationError& e) {
    fail("condition", e.what());
  }
  if (!(l.static_db >= 0.0)) fail("static_db", "must be >= 0");
  if (l.apt_preset == "none") {
    if (l.distance_m > 0.0) fail("apt_preset", "a free-space link needs a tracking preset");
  } else {
    try {
      apt::preset(l.apt_preset);
    } catch (const ValidationError&) {
      fail("apt_preset", "unknown preset '" + l.apt_preset + "'");
    }
  }
  if (!(l.mfd_m > 0.0)) fail("mfd_m", "must be > 0");
  if (!std::isfinite(l.rotation_deg)) fail("rotation_deg", "must be finite");
  if (!(l.dark_counts >= 0.0)) fail("dark_counts", "must be >= 0");
  if (!(l.background_per_lx >= 0.0)) fail("background_per_lx", "must be >= 0");
}

}  // namespace

optics::BeamGeometry StationLink::geometry() const {
  const auto mode = waist == "fixed" ? optics::WaistMode::fixed(waist_w0_m) : optics::WaistMode::optimal();
  return optics::BeamGeometry{wavelength_m, aperture_m, aperture_m, mode};
}

qstate::AnalyzerAngles Scenario::angles() const {
  return {a_deg * kDeg, a_prime_deg * kDeg, b_deg * kDeg, b_prime_deg * kDeg};
}

void Scenario::validate() const {
  auto fail = [](const std::string& key, const std::string& what) {
    throw ValidationError("field '" + key + "': " + what);
  };
  if (name.empty()) fail("name", "is required");
  if (trials < 1) fail("trials", "must be >= 1");
  if (!(pair_rate >= 0.0)) fail("source.pair_rate", "must be >= 0");
  if (!(visibility >= 0.0 && visibility <= 1.0)) fail("source.visibility", "must lie in [0, 1]");
  if (!(window_s > 0.0)) fail("counting.window_s", "must be > 0");
  if (!(integration_s > 0.0)) fail("counting.integration_s", "must be > 0");
  if (!(session_s > 0.0)) fail("counting.session_s", "must be > 0");
  if (16.0 * integration_s > session_s * (1.0 + 1e-12))
    fail("counting.integration_s", "16 projector combinations must fit in session_s");
  if (!(illuminance_lx >= 0.0)) fail("counting.illuminance_lx", "must be >= 0");
  for (auto [key, v] : {std::pair{"angles.a_deg", a_deg}, {"angles.a_prime_deg", a_prime_deg},
                        {"angles.b_deg", b_deg}, {"angles.b_prime_deg", b_prime_deg}})
    if (!(v >= 0.0 && v < 180.0)) fail(key, "must lie in [0, 180)");
  if (!(apt_duration_s > 0.0)) fail("apt.duration_s", "must be > 0");
  validate_station(alice, "alice");
  validate_station(bob, "bob");
}

Scenario parse_scenario(std::string_view text) {
  const auto tree = ini::parse(text);
  Scenario s;
  ini::apply(tree, scenario_fields(), s);
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) { return ini::write(scenario_fields(), s); }

std::string config_hash(const Scenario& s) {
  const std::string text = serialize_scenario(s);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

}  // namespace entlink::harness
