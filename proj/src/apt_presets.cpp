#include <array>
#include <numbers>
#include <string>

#include "entlink/apt.hpp"
#include "entlink/errors.hpp"

namespace entlink::apt {
namespace {

constexpr std::array<std::string_view, 2> kPresetNames{"ground", "flight"};

// Shared hardware: camera-fed gimbal and PSD-fed fast steering mirror.
// Gains were tuned once against the ground/flight tracking-error bands.
AptSystem default_system() {
  AptSystem s;
  s.coarse.plant = {PlantKind::Gimbal, 20.0, 0.5, 1.0, 10e-6};
  s.coarse.gains = {0.5, 2.0 * std::numbers::pi * 6.0, 0.0, 0.05};
  s.fine.plant = {PlantKind::Fsm, 800.0, 300e-6, 0.5, 0.4e-6};
  s.fine.gains = {0.3, 2.0 * std::numbers::pi * 70.0, 0.0, 1e-6};
  s.focal_length = 0.05;
  s.psd_capture = 400e-6;
  return s;
}

}  // namespace

std::span<const std::string_view> preset_names() { return kPresetNames; }

Preset preset(std::string_view name) {
  Preset p;
  p.system = default_system();
  p.link_distance = 100.0;
  p.duration = 10.0;
  p.dt = 1e-4;
  if (name == "ground") {
    p.disturbance.broadband_rms = 0.25;
    p.disturbance.broadband_corner_hz = 1.0;
    p.disturbance.sinusoids = {{0.001, 6.0, 0.0}};
    p.disturbance.seed = 1;
  } else if (name == "flight") {
    p.disturbance.broadband_rms = 0.4;
    p.disturbance.broadband_corner_hz = 1.0;
    p.disturbance.sinusoids = {{0.006, 6.0, 0.0}, {0.002, 45.0, 1.0}};
    p.disturbance.seed = 1;
  } else {
    throw ValidationError("unknown APT preset '" + std::string(name) + "'");
  }
  return p;
}

}  // namespace entlink::apt
