#include "entlink/optics.hpp"

#include <boost/math/tools/minima.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "entlink/errors.hpp"
#include "entlink/format.hpp"

namespace entlink::optics {

double waist_from_fwhm(double fwhm) {
  if (!(fwhm > 0.0)) throw ValidationError("FWHM must be positive");
  return fwhm / std::sqrt(2.0 * std::numbers::ln2);
}

void BeamGeometry::validate() const {
  if (!(wavelength > 0.0 && tx_aperture > 0.0 && rx_aperture > 0.0))
    throw ValidationError("beam geometry lengths must be positive");
  if (!(wavelength < tx_aperture && wavelength < rx_aperture))
    throw ValidationError("wavelength must be smaller than the apertures");
  if (waist.kind == WaistMode::Kind::Fixed && !(waist.w0 > 0.0))
    throw ValidationError("fixed waist must be positive");
  if (waist.kind == WaistMode::Kind::Optimal && !(waist.bound > 0.0))
    throw ValidationError("waist bound must be positive");
}

BeamGeometry BeamGeometry::symmetric(double aperture, WaistMode waist, double wavelength) {
  BeamGeometry g{wavelength, aperture, aperture, waist};
  g.validate();
  return g;
}

LinkBudget::LinkBudget(double diffraction_db, double atmospheric_db, double pointing_db,
                       double static_coupling_db)
    : diffraction_db_(diffraction_db),
      atmospheric_db_(atmospheric_db),
      pointing_db_(pointing_db),
      static_coupling_db_(static_coupling_db),
      total_db_(diffraction_db + atmospheric_db + pointing_db + static_coupling_db) {
  for (double v : {diffraction_db, atmospheric_db, pointing_db, static_coupling_db})
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("link budget terms must be finite and >= 0 dB");
}

double LinkBudget::transmittance() const { return db_to_transmittance(total_db_); }

double db_to_transmittance(double db) { return std::pow(10.0, -db / 10.0); }

double transmittance_to_db(double transmittance) {
  if (!(transmittance > 0.0)) throw ValidationError("transmittance must be positive");
  return -10.0 * std::log10(transmittance);
}

double rayleigh_range(double w0, double wavelength) {
  return std::numbers::pi * w0 * w0 / wavelength;
}

double gaussian_radius(double w0, double z, double wavelength) {
  if (!(w0 > 0.0) || !(z >= 0.0)) throw ValidationError("gaussian_radius needs w0 > 0 and z >= 0");
  const double ratio = z / rayleigh_range(w0, wavelength);
  return w0 * std::sqrt(1.0 + ratio * ratio);
}

double collection_fraction(double aperture_radius, double beam_radius) {
  if (!(aperture_radius > 0.0 && beam_radius > 0.0))
    throw ValidationError("collection_fraction needs positive radii");
  const double x = aperture_radius / beam_radius;
  return -std::expm1(-2.0 * x * x);
}

double optimal_waist(double aperture_radius, double distance, double wavelength, double bound) {
  if (!(aperture_radius > 0.0 && distance > 0.0 && wavelength > 0.0 && bound > 0.0))
    throw ValidationError("optimal_waist inputs must be positive");
  const double upper = aperture_radius * bound;
  const double lower = upper * 1e-9;
  auto radius = [&](double w0) { return gaussian_radius(w0, distance, wavelength); };
  const auto [w0, w] = boost::math::tools::brent_find_minima(radius, lower, upper,
                                                             std::numeric_limits<double>::digits / 2);
  // Brent never evaluates the interval ends; the bound itself is often optimal.
  return radius(upper) <= w ? upper : w0;
}

double diffraction_loss_db(const BeamGeometry& geometry, double distance) {
  geometry.validate();
  if (!(distance > 0.0)) throw ValidationError("diffraction_loss_db needs distance > 0");
  const double w0 = geometry.waist.kind == WaistMode::Kind::Fixed
                        ? geometry.waist.w0
                        : optimal_waist(geometry.tx_aperture / 2.0, distance, geometry.wavelength,
                                        geometry.waist.bound);
  const double fraction =
      collection_fraction(geometry.rx_aperture / 2.0, gaussian_radius(w0, distance, geometry.wavelength));
  return std::max(0.0, -10.0 * std::log10(fraction));
}

Condition parse_condition(std::string_view name) {
  if (name == "clear_day") return Condition::ClearDay;
  if (name == "clear_night") return Condition::ClearNight;
  if (name == "rain") return Condition::Rain;
  if (name == "high_altitude") return Condition::HighAltitude;
  throw ValidationError("unknown condition '" + std::string(name) + "'");
}

std::string_view condition_name(Condition c) {
  switch (c) {
    case Condition::ClearDay: return "clear_day";
    case Condition::ClearNight: return "clear_night";
    case Condition::Rain: return "rain";
    case Condition::HighAltitude: return "high_altitude";
  }
  return "unknown";
}

double AtmosphereTable::coefficient(Condition c) const {
  switch (c) {
    case Condition::ClearDay: return clear_day;
    case Condition::ClearNight: return clear_night;
    case Condition::Rain: return rain;
    case Condition::HighAltitude: return high_altitude;
  }
  throw ValidationError("unknown condition");
}

double atmospheric_loss_db(double distance, Condition condition, const AtmosphereTable& table) {
  if (!(distance >= 0.0)) throw ValidationError("distance must be nonnegative");
  return table.coefficient(condition) * distance / 1000.0;
}

double pointing_penalty_db(double jitter_rms, const FiberMode& fiber) {
  if (!(jitter_rms >= 0.0)) throw ValidationError("jitter must be nonnegative");
  if (!(fiber.mode_field_diameter > 0.0)) throw ValidationError("mode field diameter must be positive");
  const double w = fiber.mode_field_diameter / 2.0;
  const double r = jitter_rms / w;
  return 10.0 * std::log10(1.0 + 4.0 * r * r);
}

LinkBudget total_link_budget(const BeamGeometry& geometry, double distance, Condition condition,
                             double jitter_rms, const FiberMode& fiber, double static_db,
                             const AtmosphereTable& table) {
  if (!(distance >= 0.0)) throw ValidationError("distance must be nonnegative");
  const double diffraction = distance > 0.0 ? diffraction_loss_db(geometry, distance) : 0.0;
  return LinkBudget(diffraction, atmospheric_loss_db(distance, condition, table),
                    pointing_penalty_db(jitter_rms, fiber), static_db);
}

std::vector<LossRow> distance_loss_table(const BeamGeometry& geometry, std::span<const double> distances) {
  std::vector<LossRow> rows;
  rows.reserve(distances.size());
  for (double d : distances) rows.push_back({d, diffraction_loss_db(geometry, d)});
  return rows;
}

std::vector<LossRow> aperture_loss_table(const BeamGeometry& base, double distance,
                                         std::span<const double> apertures) {
  std::vector<LossRow> rows;
  rows.reserve(apertures.size());
  for (double a : apertures) {
    BeamGeometry g = base;
    g.tx_aperture = a;
    g.rx_aperture = a;
    rows.push_back({a, diffraction_loss_db(g, distance)});
  }
  return rows;
}

void write_loss_csv(std::ostream& out, std::span<const LossRow> rows, std::string_view x_column) {
  out << x_column << ",loss_db\n";
  for (const auto& r : rows) out << format_number(r.x) << ',' << format_number(r.loss_db) << '\n';
}

}  // namespace entlink::optics
