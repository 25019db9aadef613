#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "entlink/optics.hpp"

namespace entlink::harness {

/// Diffraction-loss sweep over distance (fixed aperture) or aperture
/// (fixed distance), written as a [sweep] INI section.
struct LinkSweep {
  std::string name;
  std::string kind = "distance";  // "distance" | "aperture"
  double wavelength_m = optics::kSignalWavelength;
  double aperture_m = 0.3;   // distance sweeps
  double distance_m = 100.0; // aperture sweeps
  double start = 1.0;
  double stop = 2.0;
  std::uint64_t points = 2;
  std::string spacing = "linear";  // "linear" | "log"
  std::string waist = "optimal";   // "optimal" | "fixed"
  double waist_w0_m = 0.0;
  double waist_bound = optics::kDefaultWaistBound;

  void validate() const;
  std::vector<double> grid() const;
  bool operator==(const LinkSweep&) const = default;
};

LinkSweep parse_sweep(std::string_view text);

struct SweepTable {
  std::string x_column;  // "distance_m" or "aperture_m"
  std::vector<optics::LossRow> rows;
};

/// Computes the loss table and checks the expected monotone shape:
/// nondecreasing in distance, nonincreasing in aperture. A violated shape
/// throws DivergenceError.
SweepTable run_linkbudget(const LinkSweep& sweep);

std::string sweep_to_csv(const SweepTable& table);
nlohmann::json sweep_to_json(const LinkSweep& sweep, const SweepTable& table);

}  // namespace entlink::harness
