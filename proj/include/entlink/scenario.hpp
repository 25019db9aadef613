#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "entlink/optics.hpp"
#include "entlink/qstate.hpp"

namespace entlink::harness {

/// One source-to-station channel. distance_m == 0 is a fiber bench: no
/// free-space propagation and no tracking loop.
struct StationLink {
  double distance_m = 100.0;
  double aperture_m = 0.0264;
  double wavelength_m = optics::kSignalWavelength;
  std::string waist = "optimal";  // "optimal" or "fixed"
  double waist_w0_m = 0.0;        // fixed waists only
  std::string condition = "clear_night";
  double static_db = 0.0;
  std::string apt_preset = "flight";  // "none" on fiber benches
  double mfd_m = 5e-6;
  double rotation_deg = 0.0;          // residual polarization rotation
  double dark_counts = 0.0;           // counts/s
  double background_per_lx = 0.0;     // counts/s per lx of illuminance

  optics::BeamGeometry geometry() const;
  double background(double illuminance_lx) const { return dark_counts + background_per_lx * illuminance_lx; }

  bool operator==(const StationLink&) const = default;
};

/// Declarative CHSH session. Field values are stored exactly as written in
/// the scenario file (angles in degrees) so serialization round-trips.
struct Scenario {
  std::string name;
  std::uint64_t seed = 1;
  std::uint64_t trials = 1;

  double pair_rate = 2.4e6;
  double visibility = 0.974;

  double window_s = 3e-9;
  double integration_s = 1.0;  // per projector combination
  double session_s = 2400.0;   // 16 x integration must fit in the session
  double illuminance_lx = 0.0;

  double a_deg = 0.0;
  double a_prime_deg = 45.0;
  double b_deg = 22.5;
  double b_prime_deg = 67.5;

  double apt_duration_s = 1.0;

  StationLink alice;
  StationLink bob;

  qstate::AnalyzerAngles angles() const;
  void validate() const;

  bool operator==(const Scenario&) const = default;
};

/// Parses INI text: top-level name/seed/trials plus [source], [counting],
/// [angles], [apt], [alice], [bob] sections. Comments are whole lines
/// starting with ';'. Throws ParseError on syntax problems and
/// ValidationError naming the offending key otherwise.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical INI text; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& s);

/// Hex SHA-256 of the canonical serialization.
std::string config_hash(const Scenario& s);

}  // namespace entlink::harness
