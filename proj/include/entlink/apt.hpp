#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace entlink::apt {

enum class PlantKind { Gimbal, Fsm };

/// First-order servo with rate and range saturation. Units are rad for the
/// gimbal and m at the fiber plane for the FSM.
struct PlantParams {
  PlantKind kind = PlantKind::Gimbal;
  double bandwidth_hz = 1.0;
  double range = 1.0;         // |position| <= range
  double rate_limit = 1.0;    // |d position / dt| <= rate_limit
  // Sensor noise rms referred to a 1 kHz measurement band; the per-sample
  // deviation scales as 1/sqrt(dt) so the loop sees the same noise density
  // at any step size.
  double sensor_noise_rms = 0.0;

  void validate() const;
};

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;  // 1/s
  double kd = 0.0;  // s
  double integrator_clamp = 1.0;  // |integral of error| limit, units*s

  void validate() const;
};

struct Loop {
  PlantParams plant;
  PidGains gains;
};

struct Sinusoid {
  double amplitude = 0.0;  // m of apparent displacement at the link distance
  double frequency_hz = 1.0;
  double phase = 0.0;
};

/// Apparent beacon motion: sinusoidal lines plus a broadband component with
/// a second-order low-pass spectrum of the given rms and corner.
struct DisturbanceModel {
  std::vector<Sinusoid> sinusoids;
  double broadband_rms = 0.0;  // m
  double broadband_corner_hz = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  /// Sum of sinusoid amplitudes plus 3x the broadband rms, in m.
  double amplitude_scale() const;
};

struct AptSystem {
  Loop coarse;
  Loop fine;
  double focal_length = 0.05;   // m of fiber-plane shift per rad of residual
  double psd_capture = 200e-6;  // m, half-width of the PSD at the fiber plane
  double initial_offset = 0.0;  // rad, acquisition error at t = 0

  void validate() const;
};

struct AxisTrace {
  std::vector<double> coarse_error;  // rad
  std::vector<double> fine_error;    // m at fiber plane
  std::vector<double> gimbal;        // rad
  std::vector<double> fsm;           // m
};

struct AptTrace {
  double dt = 0.0;
  std::array<AxisTrace, 2> axes;
  double locked_fraction = 0.0;

  std::size_t size() const noexcept { return axes[0].fine_error.size(); }
};

struct Preset {
  AptSystem system;
  DisturbanceModel disturbance;
  double link_distance = 100.0;
  double duration = 10.0;
  double dt = 1e-4;
};

/// "ground" (airframe on its legs) or "flight" (hovering in wind).
Preset preset(std::string_view name);
std::span<const std::string_view> preset_names();

/// Nested two-stage tracking simulation over two orthogonal axes.
/// Throws ValidationError on bad parameters and DivergenceError when either
/// error exceeds 1e3 x the disturbance scale.
AptTrace simulate_apt(const AptSystem& system, const DisturbanceModel& disturbance,
                      double link_distance, double duration, double dt, std::uint64_t seed);

double rms(std::span<const double> series);

/// Per-axis residual sigma at the fiber plane, pooled over both axes.
/// Throws LockLostError when locked_fraction < 0.99.
double jitter_summary(const AptTrace& trace);

inline constexpr double kMinLockedFraction = 0.99;

/// CSV with columns t_s, coarse_error_rad, fine_error_m for one axis.
void write_trace_csv(std::ostream& out, const AptTrace& trace, std::size_t axis = 0);

}  // namespace entlink::apt
