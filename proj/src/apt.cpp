#include "entlink/apt.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <random>
#include <string>

#include "entlink/errors.hpp"
#include "entlink/format.hpp"
#include "entlink/seeding.hpp"

namespace entlink::apt {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNoiseReferenceBandHz = 1000.0;
constexpr std::size_t kBroadbandComponents = 96;
constexpr double kDivergenceFactor = 1e3;

// Spectral synthesis of the broadband component: random-phase tones with
// log-spaced jittered frequencies weighted by 1/(1 + (f/fc)^4). Evaluated
// by phasor rotation, so the waveform is a fixed function of time for a
// given seed regardless of dt.
class BroadbandSource {
 public:
  BroadbandSource(double rms, double corner_hz, std::uint64_t seed, double dt) {
    if (rms <= 0.0) return;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double f_lo = corner_hz / 50.0;
    const double f_hi = corner_hz * 30.0;
    const double step = std::log(f_hi / f_lo) / kBroadbandComponents;
    double power = 0.0;
    std::vector<double> amp(kBroadbandComponents);
    std::vector<double> freq(kBroadbandComponents);
    for (std::size_t i = 0; i < kBroadbandComponents; ++i) {
      const double lo = f_lo * std::exp(step * static_cast<double>(i));
      const double hi = lo * std::exp(step);
      freq[i] = lo + (hi - lo) * unit(rng);
      const double r = freq[i] / corner_hz;
      amp[i] = std::sqrt((hi - lo) / (1.0 + r * r * r * r));
      power += 0.5 * amp[i] * amp[i];
    }
    const double norm = rms / std::sqrt(power);
    for (std::size_t i = 0; i < kBroadbandComponents; ++i) {
      const double phase = kTwoPi * unit(rng);
      phasors_.push_back(std::polar(amp[i] * norm, phase));
      steps_.push_back(std::polar(1.0, kTwoPi * freq[i] * dt));
    }
  }

  // Value at the current sample, then advance by dt.
  double next() {
    double sum = 0.0;
    for (std::size_t i = 0; i < phasors_.size(); ++i) {
      sum += phasors_[i].imag();
      phasors_[i] *= steps_[i];
    }
    return sum;
  }

 private:
  std::vector<std::complex<double>> phasors_;
  std::vector<std::complex<double>> steps_;
};

class Pid {
 public:
  explicit Pid(const PidGains& g) : g_(g) {}

  double update(double error, double dt) {
    integral_ = std::clamp(integral_ + error * dt, -g_.integrator_clamp, g_.integrator_clamp);
    const double derivative = has_prev_ ? (error - prev_) / dt : 0.0;
    prev_ = error;
    has_prev_ = true;
    return g_.kp * error + g_.ki * integral_ + g_.kd * derivative;
  }

  // Bumpless start: integrator set so a zero error commands `output`.
  void preload(double output) {
    if (g_.ki != 0.0)
      integral_ = std::clamp(output / g_.ki, -g_.integrator_clamp, g_.integrator_clamp);
  }

 private:
  PidGains g_;
  double integral_ = 0.0;
  double prev_ = 0.0;
  bool has_prev_ = false;
};

class Servo {
 public:
  Servo(const PlantParams& p, double dt)
      : p_(p), alpha_(-std::expm1(-kTwoPi * p.bandwidth_hz * dt)), max_step_(p.rate_limit * dt) {}

  double position() const noexcept { return x_; }
  void reset(double x) { x_ = std::clamp(x, -p_.range, p_.range); }

  void step(double command) {
    const double delta = std::clamp(alpha_ * (command - x_), -max_step_, max_step_);
    x_ = std::clamp(x_ + delta, -p_.range, p_.range);
  }

 private:
  PlantParams p_;
  double alpha_;
  double max_step_;
  double x_ = 0.0;
};

double noise_sigma(const PlantParams& p, double dt) {
  return p.sensor_noise_rms * std::sqrt(1.0 / (2.0 * kNoiseReferenceBandHz * dt));
}

}  // namespace

void PlantParams::validate() const {
  if (!(bandwidth_hz > 0.0)) throw ValidationError("plant bandwidth must be positive");
  if (!(range > 0.0)) throw ValidationError("plant range must be positive");
  if (!(rate_limit > 0.0)) throw ValidationError("plant rate limit must be positive");
  if (!(sensor_noise_rms >= 0.0)) throw ValidationError("sensor noise must be nonnegative");
}

void PidGains::validate() const {
  if (!std::isfinite(kp) || !std::isfinite(ki) || !std::isfinite(kd))
    throw ValidationError("PID gains must be finite");
  if (!(integrator_clamp > 0.0)) throw ValidationError("integrator clamp must be positive");
}

void DisturbanceModel::validate() const {
  for (const auto& s : sinusoids) {
    if (!(s.amplitude >= 0.0)) throw ValidationError("disturbance amplitude must be nonnegative");
    if (!(s.frequency_hz > 0.0)) throw ValidationError("disturbance frequency must be positive");
  }
  if (!(broadband_rms >= 0.0)) throw ValidationError("broadband rms must be nonnegative");
  if (!(broadband_corner_hz > 0.0)) throw ValidationError("broadband corner must be positive");
}

double DisturbanceModel::amplitude_scale() const {
  double a = 3.0 * broadband_rms;
  for (const auto& s : sinusoids) a += s.amplitude;
  return a;
}

void AptSystem::validate() const {
  coarse.plant.validate();
  coarse.gains.validate();
  fine.plant.validate();
  fine.gains.validate();
  if (!(focal_length > 0.0)) throw ValidationError("focal length must be positive");
  if (!(psd_capture > 0.0)) throw ValidationError("PSD capture range must be positive");
  if (!std::isfinite(initial_offset)) throw ValidationError("initial offset must be finite");
}

AptTrace simulate_apt(const AptSystem& system, const DisturbanceModel& disturbance,
                      double link_distance, double duration, double dt, std::uint64_t seed) {
  system.validate();
  disturbance.validate();
  if (!(link_distance > 0.0)) throw ValidationError("link distance must be positive");
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  const double max_bw = std::max(system.coarse.plant.bandwidth_hz, system.fine.plant.bandwidth_hz);
  if (dt > 1.0 / (10.0 * max_bw) * (1.0 + 1e-12))
    throw ValidationError("dt must not exceed 1/(10 x the fastest plant bandwidth)");
  if (!(duration >= 1000.0 * dt * (1.0 - 1e-12)))
    throw ValidationError("duration must cover at least 1000 steps");

  const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
  const double coarse_noise = noise_sigma(system.coarse.plant, dt);
  const double fine_noise = noise_sigma(system.fine.plant, dt);
  // Everything that legitimately drives the loops, expressed as an angle.
  const double angle_scale = disturbance.amplitude_scale() / link_distance +
                             std::abs(system.initial_offset) + 3.0 * coarse_noise +
                             3.0 * fine_noise / system.focal_length;
  const double coarse_limit = kDivergenceFactor * angle_scale;
  const double fine_limit = coarse_limit * system.focal_length;

  AptTrace trace;
  trace.dt = dt;
  std::vector<char> locked(steps, 1);

  for (std::size_t axis = 0; axis < 2; ++axis) {
    AxisTrace& out = trace.axes[axis];
    out.coarse_error.resize(steps);
    out.fine_error.resize(steps);
    out.gimbal.resize(steps);
    out.fsm.resize(steps);

    BroadbandSource broadband(disturbance.broadband_rms, disturbance.broadband_corner_hz,
                              derive_seed(disturbance.seed, axis), dt);
    std::mt19937_64 rng(derive_seed(seed, axis, 1));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Pid coarse_pid(system.coarse.gains);
    Pid fine_pid(system.fine.gains);
    Servo gimbal(system.coarse.plant, dt);
    Servo fsm(system.fine.plant, dt);
    const double axis_phase = axis == 0 ? 0.0 : std::numbers::pi / 2.0;
    const double offset = axis == 0 ? system.initial_offset : 0.0;

    for (std::size_t k = 0; k < steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      double apparent = broadband.next();
      for (const auto& s : disturbance.sinusoids)
        apparent += s.amplitude * std::sin(kTwoPi * s.frequency_hz * t + s.phase + axis_phase);
      const double target = apparent / link_distance + offset;
      if (k == 0) {
        // Acquisition already brought the gimbal onto the beacon, up to the
        // configured initial offset.
        gimbal.reset(target - offset);
        coarse_pid.preload(gimbal.position());
      }

      const double coarse_error = target - gimbal.position();
      const double fine_error = system.focal_length * coarse_error - fsm.position();
      if (!std::isfinite(coarse_error) || !std::isfinite(fine_error) ||
          std::abs(coarse_error) > coarse_limit || std::abs(fine_error) > fine_limit)
        throw DivergenceError("tracking loop diverged at t = " + std::to_string(t) + " s");

      out.coarse_error[k] = coarse_error;
      out.fine_error[k] = fine_error;
      out.gimbal[k] = gimbal.position();
      out.fsm[k] = fsm.position();

      // Noise draws happen every step so the random stream does not depend
      // on the lock history.
      const double coarse_meas = coarse_error + coarse_noise * gauss(rng);
      const double fine_meas = fine_error + fine_noise * gauss(rng);
      const bool on_psd = std::abs(fine_error) <= system.psd_capture;
      if (!on_psd) locked[k] = 0;

      gimbal.step(coarse_pid.update(coarse_meas, dt));
      if (on_psd) fsm.step(fine_pid.update(fine_meas, dt));
      else fsm.step(0.0);
    }
  }
  std::size_t n_locked = 0;
  for (char c : locked) n_locked += c ? 1 : 0;
  trace.locked_fraction = steps ? static_cast<double>(n_locked) / static_cast<double>(steps) : 0.0;
  return trace;
}

double rms(std::span<const double> series) {
  if (series.empty()) throw ValidationError("rms of an empty series");
  double acc = 0.0;
  for (double v : series) acc += v * v;
  return std::sqrt(acc / static_cast<double>(series.size()));
}

double jitter_summary(const AptTrace& trace) {
  if (trace.locked_fraction < kMinLockedFraction)
    throw LockLostError("beacon lock lost: locked fraction " + std::to_string(trace.locked_fraction),
                        trace.locked_fraction);
  double var = 0.0;
  for (const auto& axis : trace.axes) {
    const auto& e = axis.fine_error;
    if (e.empty()) throw ValidationError("empty trace");
    double mean = 0.0;
    for (double v : e) mean += v;
    mean /= static_cast<double>(e.size());
    double acc = 0.0;
    for (double v : e) acc += (v - mean) * (v - mean);
    var += acc / static_cast<double>(e.size());
  }
  return std::sqrt(var / 2.0);
}

void write_trace_csv(std::ostream& out, const AptTrace& trace, std::size_t axis) {
  if (axis > 1) throw ValidationError("axis must be 0 or 1");
  const auto& a = trace.axes[axis];
  out << "t_s,coarse_error_rad,fine_error_m\n";
  for (std::size_t k = 0; k < a.fine_error.size(); ++k)
    out << format_number(static_cast<double>(k) * trace.dt) << ',' << format_number(a.coarse_error[k])
        << ',' << format_number(a.fine_error[k]) << '\n';
}

}  // namespace entlink::apt
