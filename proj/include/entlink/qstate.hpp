#pragma once

#include <Eigen/Dense>
#include <complex>

namespace entlink::qstate {

using Complex = std::complex<double>;
using Matrix4 = Eigen::Matrix4cd;
using Matrix2 = Eigen::Matrix2cd;

inline constexpr double kAlgebraTol = 1e-12;
inline constexpr double kEigenTol = 1e-10;

/// Two-photon polarization density operator in the (HH, HV, VH, VV) basis,
/// first factor = photon sent to Alice. Construction validates trace,
/// hermiticity and positivity, so every instance is a physical state.
class TwoQubitState {
 public:
  explicit TwoQubitState(const Matrix4& rho);

  const Matrix4& rho() const noexcept { return rho_; }
  double purity() const;

 private:
  Matrix4 rho_;
};

/// Unitary 2x2 Jones-like matrix acting on one photon's (H, V) amplitudes.
class OneQubitUnitary {
 public:
  explicit OneQubitUnitary(const Matrix2& u);
  static OneQubitUnitary identity();

  const Matrix2& matrix() const noexcept { return u_; }
  OneQubitUnitary operator*(const OneQubitUnitary& rhs) const;

 private:
  Matrix2 u_;
};

struct AnalyzerAngles {
  double a = 0.0;
  double a_prime = 0.0;
  double b = 0.0;
  double b_prime = 0.0;

  // Throws ValidationError unless every angle lies in [0, pi).
  void validate() const;
};

/// Settings (0, pi/8), (0, 3pi/8), (pi/4, pi/8), (pi/4, 3pi/8).
AnalyzerAngles canonical_angles();

enum class WaveplateKind { HalfWave, QuarterWave };
enum class Basis { HV, DA };

TwoQubitState bell_psi_minus();
TwoQubitState maximally_mixed();

/// V |psi-><psi-| + (1 - V) I/4.
TwoQubitState werner(double visibility);

/// Linear retarder with fast axis at `theta` from H.
///
/// Both plates are written R(theta) diag(1, e^{i delta}) R(-theta), with
/// delta = pi (HWP) or pi/2 (QWP). The fast-axis component keeps zero phase.
/// This is the only place the global phase convention is fixed; no exported
/// quantity depends on it.
OneQubitUnitary waveplate_unitary(WaveplateKind kind, double theta);

/// Real rotation by `theta` in the H/V plane (H -> cos H + sin V).
OneQubitUnitary rotation_unitary(double theta);

TwoQubitState apply_local(const TwoQubitState& state, const OneQubitUnitary& ua,
                          const OneQubitUnitary& ub);

/// Probability that both photons pass linear polarizers at thetaA / thetaB.
double joint_probability(const TwoQubitState& state, double theta_a, double theta_b);

/// Probability that photon A (or B) alone passes a polarizer at theta.
double marginal_a(const TwoQubitState& state, double theta);
double marginal_b(const TwoQubitState& state, double theta);

double correlation_E_analytic(const TwoQubitState& state, double theta_a, double theta_b);

/// Signed S = E(a,b) - E(a,b') + E(a',b) + E(a',b'). The singlet at the
/// canonical settings gives -2 sqrt(2); reports use |S|.
double chsh_S_analytic(const TwoQubitState& state, const AnalyzerAngles& angles);

/// Fringe visibility (max - min)/(max + min) of P(theta_fixed, theta) over a
/// full sweep of theta, with theta_fixed = 0 (HV) or pi/4 (DA).
double visibility(const TwoQubitState& state, Basis basis);

/// Same, for an arbitrary fixed analyzer angle on photon A.
double visibility_at(const TwoQubitState& state, double theta_fixed);

}  // namespace entlink::qstate
