#include "entlink/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "entlink/errors.hpp"

namespace entlink::qstate {
namespace {

Matrix2 polarizer(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Matrix2 p;
  p << c * c, c * s, c * s, s * s;
  return p;
}

Matrix4 kron(const Matrix2& a, const Matrix2& b) {
  Matrix4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

double expectation(const Matrix4& rho, const Matrix4& op) { return (rho * op).trace().real(); }

}  // namespace

TwoQubitState::TwoQubitState(const Matrix4& rho) : rho_(rho) {
  const Complex tr = rho.trace();
  if (std::abs(tr.real() - 1.0) > kAlgebraTol || std::abs(tr.imag()) > kAlgebraTol)
    throw ValidationError("density operator trace is " + std::to_string(tr.real()) + ", expected 1");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kAlgebraTol)
    throw ValidationError("density operator is not Hermitian");
  const Matrix4 herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix4> solver(herm, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -kEigenTol)
    throw ValidationError("density operator has a negative eigenvalue");
  rho_ = herm;
}

double TwoQubitState::purity() const { return (rho_ * rho_).trace().real(); }

OneQubitUnitary::OneQubitUnitary(const Matrix2& u) : u_(u) {
  if ((u * u.adjoint() - Matrix2::Identity()).cwiseAbs().maxCoeff() > kAlgebraTol)
    throw ValidationError("matrix is not unitary");
}

OneQubitUnitary OneQubitUnitary::identity() { return OneQubitUnitary(Matrix2::Identity()); }

OneQubitUnitary OneQubitUnitary::operator*(const OneQubitUnitary& rhs) const {
  return OneQubitUnitary(u_ * rhs.u_);
}

void AnalyzerAngles::validate() const {
  for (double v : {a, a_prime, b, b_prime})
    if (!(v >= 0.0 && v < std::numbers::pi))
      throw ValidationError("analyzer angle " + std::to_string(v) + " rad outside [0, pi)");
}

AnalyzerAngles canonical_angles() {
  constexpr double pi = std::numbers::pi;
  return AnalyzerAngles{0.0, pi / 4.0, pi / 8.0, 3.0 * pi / 8.0};
}

TwoQubitState bell_psi_minus() {
  Eigen::Vector4cd ket(0.0, 1.0, -1.0, 0.0);
  ket /= std::sqrt(2.0);
  return TwoQubitState(ket * ket.adjoint());
}

TwoQubitState maximally_mixed() { return TwoQubitState(Matrix4::Identity() / 4.0); }

TwoQubitState werner(double visibility) {
  if (!(visibility >= 0.0 && visibility <= 1.0))
    throw ValidationError("werner visibility must lie in [0, 1], got " + std::to_string(visibility));
  return TwoQubitState(visibility * bell_psi_minus().rho() +
                       (1.0 - visibility) * Matrix4::Identity() / 4.0);
}

OneQubitUnitary waveplate_unitary(WaveplateKind kind, double theta) {
  const double retardance = kind == WaveplateKind::HalfWave ? std::numbers::pi : std::numbers::pi / 2.0;
  const Matrix2 rot = rotation_unitary(theta).matrix();
  Matrix2 retarder = Matrix2::Zero();
  retarder(0, 0) = 1.0;
  retarder(1, 1) = std::polar(1.0, retardance);
  Matrix2 u = rot * retarder * rot.adjoint();
  // Remove rounding residue from the exact-real HWP so it stays involutory.
  if (kind == WaveplateKind::HalfWave) u = u.real().cast<Complex>();
  return OneQubitUnitary(u);
}

OneQubitUnitary rotation_unitary(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Matrix2 u;
  u << c, -s, s, c;
  return OneQubitUnitary(u);
}

TwoQubitState apply_local(const TwoQubitState& state, const OneQubitUnitary& ua,
                          const OneQubitUnitary& ub) {
  const Matrix4 u = kron(ua.matrix(), ub.matrix());
  return TwoQubitState(u * state.rho() * u.adjoint());
}

double joint_probability(const TwoQubitState& state, double theta_a, double theta_b) {
  return expectation(state.rho(), kron(polarizer(theta_a), polarizer(theta_b)));
}

double marginal_a(const TwoQubitState& state, double theta) {
  return expectation(state.rho(), kron(polarizer(theta), Matrix2::Identity()));
}

double marginal_b(const TwoQubitState& state, double theta) {
  return expectation(state.rho(), kron(Matrix2::Identity(), polarizer(theta)));
}

double correlation_E_analytic(const TwoQubitState& state, double theta_a, double theta_b) {
  constexpr double perp = std::numbers::pi / 2.0;
  return joint_probability(state, theta_a, theta_b) +
         joint_probability(state, theta_a + perp, theta_b + perp) -
         joint_probability(state, theta_a + perp, theta_b) -
         joint_probability(state, theta_a, theta_b + perp);
}

double chsh_S_analytic(const TwoQubitState& state, const AnalyzerAngles& angles) {
  return correlation_E_analytic(state, angles.a, angles.b) -
         correlation_E_analytic(state, angles.a, angles.b_prime) +
         correlation_E_analytic(state, angles.a_prime, angles.b) +
         correlation_E_analytic(state, angles.a_prime, angles.b_prime);
}

double visibility_at(const TwoQubitState& state, double theta_fixed) {
  // P(theta_fixed, t) = (m0 + mz cos 2t + mx sin 2t) / 2, so the sweep
  // extrema are (m0 +- hypot(mz, mx)) / 2.
  Matrix2 sz;
  sz << 1.0, 0.0, 0.0, -1.0;
  Matrix2 sx;
  sx << 0.0, 1.0, 1.0, 0.0;
  const Matrix2 pa = polarizer(theta_fixed);
  const double m0 = expectation(state.rho(), kron(pa, Matrix2::Identity()));
  const double mz = expectation(state.rho(), kron(pa, sz));
  const double mx = expectation(state.rho(), kron(pa, sx));
  if (m0 <= kAlgebraTol) throw ValidationError("visibility undefined: no coincidences at fixed analyzer");
  return std::min(1.0, std::hypot(mz, mx) / m0);
}

double visibility(const TwoQubitState& state, Basis basis) {
  return visibility_at(state, basis == Basis::HV ? 0.0 : std::numbers::pi / 4.0);
}

}  // namespace entlink::qstate
