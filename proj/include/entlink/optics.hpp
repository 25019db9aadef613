#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace entlink::optics {

inline constexpr double kSignalWavelength = 810e-9;

/// Largest admissible waist as a fraction of the transmit pupil radius.
/// At 1.0 the transmit pupil passes 1 - e^-2 of the Gaussian power.
inline constexpr double kDefaultWaistBound = 1.0;

/// 1/e^2 intensity radius of a Gaussian with the given intensity FWHM.
double waist_from_fwhm(double fwhm);

struct WaistMode {
  enum class Kind { Fixed, Optimal };
  Kind kind = Kind::Optimal;
  double w0 = 0.0;  // used when kind == Fixed
  double bound = kDefaultWaistBound;  // used when kind == Optimal

  static WaistMode fixed(double w0) { return {Kind::Fixed, w0, kDefaultWaistBound}; }
  static WaistMode optimal(double bound = kDefaultWaistBound) { return {Kind::Optimal, 0.0, bound}; }
};

/// Transmit/receive pupils are full diameters.
struct BeamGeometry {
  double wavelength = kSignalWavelength;
  double tx_aperture = 0.0;
  double rx_aperture = 0.0;
  WaistMode waist;

  void validate() const;
  static BeamGeometry symmetric(double aperture, WaistMode waist = WaistMode::optimal(),
                                double wavelength = kSignalWavelength);
};

struct FiberMode {
  double mode_field_diameter = 5e-6;
};

class LinkBudget {
 public:
  LinkBudget() = default;
  LinkBudget(double diffraction_db, double atmospheric_db, double pointing_db, double static_coupling_db);

  double diffraction_db() const noexcept { return diffraction_db_; }
  double atmospheric_db() const noexcept { return atmospheric_db_; }
  double pointing_db() const noexcept { return pointing_db_; }
  double static_coupling_db() const noexcept { return static_coupling_db_; }
  double total_db() const noexcept { return total_db_; }
  double transmittance() const;

 private:
  double diffraction_db_ = 0.0;
  double atmospheric_db_ = 0.0;
  double pointing_db_ = 0.0;
  double static_coupling_db_ = 0.0;
  double total_db_ = 0.0;
};

double db_to_transmittance(double db);
double transmittance_to_db(double transmittance);

double gaussian_radius(double w0, double z, double wavelength);
double rayleigh_range(double w0, double wavelength);

/// Power fraction of a centred Gaussian (1/e^2 radius w) inside radius a.
double collection_fraction(double aperture_radius, double beam_radius);

/// Waist in (0, bound * aperture_radius] that maximizes the power collected
/// by an equal receive pupil at `distance`. Brent search, ~1e-8 relative.
double optimal_waist(double aperture_radius, double distance, double wavelength,
                     double bound = kDefaultWaistBound);

double diffraction_loss_db(const BeamGeometry& geometry, double distance);

enum class Condition { ClearDay, ClearNight, Rain, HighAltitude };

Condition parse_condition(std::string_view name);
std::string_view condition_name(Condition c);

/// Extinction in dB/km per condition. Defaults are editable, not measured:
/// clear night 0.5, clear day 0.7, rain 3.0, high altitude 0.03.
struct AtmosphereTable {
  double clear_day = 0.7;
  double clear_night = 0.5;
  double rain = 3.0;
  double high_altitude = 0.03;

  double coefficient(Condition c) const;
};

double atmospheric_loss_db(double distance, Condition condition, const AtmosphereTable& table = {});

/// Mean single-mode coupling penalty for isotropic Gaussian lateral jitter
/// with per-axis standard deviation `jitter_rms`: the fiber-mode overlap
/// exp(-2 d^2 / w^2) averaged over the jitter gives 1 / (1 + 4 sigma^2 / w^2).
double pointing_penalty_db(double jitter_rms, const FiberMode& fiber);

/// distance == 0 denotes a fiber bench with no free-space channel: only the
/// static term contributes.
LinkBudget total_link_budget(const BeamGeometry& geometry, double distance, Condition condition,
                             double jitter_rms, const FiberMode& fiber, double static_db,
                             const AtmosphereTable& table = {});

struct LossRow {
  double x = 0.0;  // distance or aperture, m
  double loss_db = 0.0;
};

std::vector<LossRow> distance_loss_table(const BeamGeometry& geometry, std::span<const double> distances);

/// Symmetric apertures swept at a fixed distance; fixed waists are kept as given.
std::vector<LossRow> aperture_loss_table(const BeamGeometry& base, double distance,
                                         std::span<const double> apertures);

void write_loss_csv(std::ostream& out, std::span<const LossRow> rows, std::string_view x_column);

}  // namespace entlink::optics
