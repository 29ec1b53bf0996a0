#ifndef WAVETRAIN_STABILITY_HPP
#define WAVETRAIN_STABILITY_HPP

#include "wavetrain/model.hpp"

#include <array>
#include <complex>
#include <optional>
#include <string>

namespace wavetrain {

/// Coefficients of lambda^4 + b1 lambda^3 + b2 lambda^2 + b3 lambda + b4.
struct CharCoeffs {
  double b1 = 0.0;
  double b2 = 0.0;
  double b3 = 0.0;
  double b4 = 0.0;

  std::complex<double> evaluate(std::complex<double> lambda) const;
  friend bool operator==(const CharCoeffs&, const CharCoeffs&) = default;
};

/// Principal-minor sums of J. b1 = -tr J, b4 = det J.
CharCoeffs char_coeffs(const Matrix4& J);

/// Convenience: char_coeffs(jacobian_at(spec, v, fp)).
CharCoeffs char_coeffs_at(const ModelSpec& spec, double v, const FixedPoint& fp);

struct RouthHurwitzReport {
  /// b1, b4, b1 b2 - b3, b1 (b2 b3 - b1 b4) - b3^2.
  std::array<double, 4> quantities{};
  std::array<bool, 4> satisfied{};
  bool stable = false;

  friend bool operator==(const RouthHurwitzReport&, const RouthHurwitzReport&) = default;
};

RouthHurwitzReport routh_hurwitz(const CharCoeffs& b);

/// The last Routh-Hurwitz quantity; zero on the Hopf curve.
double hopf_quantity(const CharCoeffs& b);

/// Coefficients of the Hopf condition h(v) = v^2 (A v^2 + B).
struct HopfCurve {
  double A = 0.0;
  double B = 0.0;
};

/// Samples h at v = 1, 2 to extract A and B, then verifies the quartic
/// even structure at five further speeds. |A| or |B| below 1e-12 of the
/// sample scale is snapped to exactly zero.
HopfCurve hopf_curve(const ModelSpec& spec, const FixedPoint& fp);

struct CriticalSpeeds {
  double v_minus = 0.0;
  double v_plus = 0.0;
};

/// +-sqrt(-B/A) when A B < 0; (0, 0) when A or B vanishes (f has only the
/// root v = 0); absent otherwise.
std::optional<CriticalSpeeds> critical_speeds(double A, double B);

enum class Regime { a, b, c, d, degenerate };

/// (a) A>0,B<0  (b) A<0,B>0  (c) A>=0,B>0  (d) A<=0,B<0; B = 0 is degenerate.
Regime classify_regime(double A, double B);
char regime_letter(Regime r);
/// Sign windows of the Hopf quantity f(v) = v^2 (A v^2 + B) for the regime.
/// f > 0 is necessary for stability; the other three conditions still apply.
std::string describe_regime(Regime r, const std::optional<CriticalSpeeds>& speeds);

/// sqrt(b3 / b1); throws NumericalError when b3 / b1 <= 0.
double hopf_frequency(const CharCoeffs& b);

/// Quartic lambda^4 + b4 that occurs when b1 = b2 = b3 = 0 at a zero
/// critical speed. `operational` is sqrt(-b4), `quartic_root` is the
/// modulus (-b4)^(1/4) of the actual imaginary roots.
struct DegenerateFrequency {
  double operational = 0.0;
  double quartic_root = 0.0;
};
std::optional<DegenerateFrequency> degenerate_frequency(const CharCoeffs& b);

struct EigenSet {
  std::array<std::complex<double>, 4> roots{};
  /// Product over i<j of (r_i - r_j)^2.
  double discriminant = 0.0;
  /// max |g(r_i)| / (1 + |r_i|^4).
  double residual = 0.0;

  double max_real_part() const;
};

/// Companion-matrix eigenvalues of the characteristic quartic.
EigenSet quartic_roots(const CharCoeffs& b);

/// Closed-form discriminant restricted to the Hopf curve,
/// -4 b3 (b1^3 - 4 b1 b2 + 4 b3)(b1^2 b2^2 + b1^3 b3 - 4 b1 b2 b3 + 4 b3^2)^2 / b1^6.
double hopf_curve_discriminant(const CharCoeffs& b);

struct Transversality {
  double v0 = 0.0;
  double omega = 0.0;
  /// d Re(lambda) / dv of the branch through +i omega.
  double rate = 0.0;
  std::complex<double> eigenvalue{};
};

/// Centered difference of the real part of the eigenvalue tracked through
/// +i omega at v0 +- delta, delta = 1e-5 max(1, |v0|). Throws NumericalError
/// when no eigenvalue pair sits on the imaginary axis at v0.
Transversality transversality(const ModelSpec& spec, const FixedPoint& fp, double v0);

enum class VolumeBehaviour { contracting, conservative, dilatory };

struct VolumeRate {
  double rate = 0.0;  ///< d ln V / dzeta = tr J = -b1
  VolumeBehaviour behaviour = VolumeBehaviour::conservative;
};

VolumeRate volume_rate(double b1);
std::string_view volume_behaviour_name(VolumeBehaviour b);

/// Everything the Hopf analysis of one equilibrium produces.
struct HopfAnalysis {
  double A = 0.0;
  double B = 0.0;
  std::optional<CriticalSpeeds> speeds;
  Regime regime = Regime::degenerate;
  /// sqrt(b3/b1) at v_plus when that ratio is positive.
  std::optional<double> omega;
  /// Set when the critical speed is zero and the quartic collapses to lambda^4 + b4.
  std::optional<DegenerateFrequency> degenerate;
  /// Coefficients at v_plus (or at v = 0 in the degenerate case).
  std::optional<CharCoeffs> critical_coeffs;
  /// Coefficients at v_minus.
  std::optional<CharCoeffs> critical_coeffs_minus;
  /// d Re(lambda)/dv at v_plus, when an imaginary pair exists there.
  std::optional<double> transversality_rate;
};

HopfAnalysis analyze_hopf(const ModelSpec& spec, const FixedPoint& fp);

}  // namespace wavetrain

#endif  // WAVETRAIN_STABILITY_HPP
