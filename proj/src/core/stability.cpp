#include "wavetrain/stability.hpp"

#include "wavetrain/error.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace wavetrain {

std::complex<double> CharCoeffs::evaluate(std::complex<double> lambda) const {
  return (((lambda + b1) * lambda + b2) * lambda + b3) * lambda + b4;
}

CharCoeffs char_coeffs(const Matrix4& J) {
  if (!J.allFinite()) throw NumericalError("char_coeffs: non-finite Jacobian");
  CharCoeffs b;
  b.b1 = -J.trace();

  double minors2 = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) minors2 += J(i, i) * J(j, j) - J(i, j) * J(j, i);
  b.b2 = minors2;

  double minors3 = 0.0;
  for (int skip = 0; skip < 4; ++skip) {
    int idx[3];
    for (int r = 0, n = 0; r < 4; ++r)
      if (r != skip) idx[n++] = r;
    Eigen::Matrix3d m;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m(r, c) = J(idx[r], idx[c]);
    minors3 += m.determinant();
  }
  b.b3 = -minors3;
  b.b4 = J.determinant();
  return b;
}

CharCoeffs char_coeffs_at(const ModelSpec& spec, double v, const FixedPoint& fp) {
  return char_coeffs(jacobian_at(spec, v, fp));
}

double hopf_quantity(const CharCoeffs& b) {
  return b.b1 * (b.b2 * b.b3 - b.b1 * b.b4) - b.b3 * b.b3;
}

RouthHurwitzReport routh_hurwitz(const CharCoeffs& b) {
  RouthHurwitzReport r;
  r.quantities = {b.b1, b.b4, b.b1 * b.b2 - b.b3, hopf_quantity(b)};
  r.stable = true;
  for (std::size_t i = 0; i < 4; ++i) {
    r.satisfied[i] = r.quantities[i] > 0.0;
    r.stable = r.stable && r.satisfied[i];
  }
  return r;
}

HopfCurve hopf_curve(const ModelSpec& spec, const FixedPoint& fp) {
  auto h = [&](double v) { return hopf_quantity(char_coeffs_at(spec, v, fp)); };
  const double h1 = h(1.0);
  const double h2 = h(2.0);
  HopfCurve curve{(h2 - 4.0 * h1) / 12.0, (16.0 * h1 - h2) / 12.0};

  const double scale = std::abs(h1) + std::abs(h2);
  if (std::abs(curve.A) <= 1e-12 * scale) curve.A = 0.0;
  if (std::abs(curve.B) <= 1e-12 * scale) curve.B = 0.0;

  for (double v : {0.5, 1.5, 3.0, -1.3, -2.7}) {
    const double hv = h(v);
    const double model = v * v * (curve.A * v * v + curve.B);
    if (!(std::abs(hv - model) < 1e-8 * std::max(1.0, std::abs(hv)))) {
      std::ostringstream os;
      os << "hopf_curve: h(" << v << ") = " << hv << " deviates from v^2(Av^2+B) = " << model
         << "; the point does not give the even quartic structure";
      throw NumericalError(os.str());
    }
  }
  return curve;
}

std::optional<CriticalSpeeds> critical_speeds(double A, double B) {
  if (A == 0.0 || B == 0.0) return CriticalSpeeds{0.0, 0.0};
  if (A * B < 0.0) {
    const double v = std::sqrt(-B / A);
    return CriticalSpeeds{-v, v};
  }
  return std::nullopt;
}

Regime classify_regime(double A, double B) {
  if (A > 0.0 && B < 0.0) return Regime::a;
  if (A < 0.0 && B > 0.0) return Regime::b;
  if (A >= 0.0 && B > 0.0) return Regime::c;
  if (A <= 0.0 && B < 0.0) return Regime::d;
  return Regime::degenerate;
}

char regime_letter(Regime r) {
  switch (r) {
    case Regime::a: return 'a';
    case Regime::b: return 'b';
    case Regime::c: return 'c';
    case Regime::d: return 'd';
    case Regime::degenerate: return '-';
  }
  return '-';
}

std::string describe_regime(Regime r, const std::optional<CriticalSpeeds>& speeds) {
  std::ostringstream os;
  const double vp = speeds ? speeds->v_plus : 0.0;
  switch (r) {
    case Regime::a:
      os << "f(v) > 0 for v in (-inf," << -vp << ") U (" << vp << ",inf), f(v) < 0 for v in (" << -vp << ","
         << vp << ")";
      break;
    case Regime::b:
      os << "f(v) < 0 for v in (-inf," << -vp << ") U (" << vp << ",inf), f(v) > 0 for v in (" << -vp << ","
         << vp << ")";
      break;
    case Regime::c: os << "f(v) > 0 for all v != 0: no Hopf crossing"; break;
    case Regime::d: os << "f(v) < 0 for all v != 0: the last Routh-Hurwitz condition always fails"; break;
    case Regime::degenerate: os << "degenerate Hopf curve (B = 0)"; break;
  }
  return os.str();
}

double hopf_frequency(const CharCoeffs& b) {
  const double ratio = b.b3 / b.b1;
  if (!(b.b1 != 0.0 && ratio > 0.0)) {
    std::ostringstream os;
    os << "hopf_frequency: b3/b1 = " << ratio << " is not positive (not at a Hopf configuration)";
    throw NumericalError(os.str());
  }
  return std::sqrt(ratio);
}

std::optional<DegenerateFrequency> degenerate_frequency(const CharCoeffs& b) {
  if (!(b.b4 < 0.0)) return std::nullopt;
  const double tol = 1e-12 * std::max(1.0, std::abs(b.b4));
  if (std::abs(b.b1) > tol || std::abs(b.b2) > tol || std::abs(b.b3) > tol) return std::nullopt;
  return DegenerateFrequency{std::sqrt(-b.b4), std::pow(-b.b4, 0.25)};
}

double EigenSet::max_real_part() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& r : roots) m = std::max(m, r.real());
  return m;
}

EigenSet quartic_roots(const CharCoeffs& b) {
  const Polynomial g{b.b4, b.b3, b.b2, b.b1, 1.0};
  const Polynomial dg = g.derivative();
  const auto found = g.roots();

  EigenSet out;
  for (std::size_t i = 0; i < 4; ++i) {
    std::complex<double> r = found[i];
    for (int it = 0; it < 2; ++it) {
      const auto d = dg(r);
      if (std::abs(d) == 0.0) break;
      const auto next = r - g(r) / d;
      if (!(std::abs(g(next)) < std::abs(g(r)))) break;
      r = next;
    }
    // Keep exact conjugate symmetry for real-coefficient quartics.
    if (std::abs(r.imag()) <= 1e-14 * std::max(1.0, std::abs(r))) r.imag(0.0);
    out.roots[i] = r;
    const double mag = std::abs(r);
    out.residual = std::max(out.residual, std::abs(g(r)) / (1.0 + mag * mag * mag * mag));
  }
  std::complex<double> disc = 1.0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) {
      const auto d = out.roots[i] - out.roots[j];
      disc *= d * d;
    }
  out.discriminant = disc.real();
  if (!(out.residual < 1e-8)) throw NumericalError("quartic_roots: root residual above tolerance");
  return out;
}

double hopf_curve_discriminant(const CharCoeffs& b) {
  const double b1 = b.b1, b2 = b.b2, b3 = b.b3;
  const double lemma = b1 * b1 * b1 - 4.0 * b1 * b2 + 4.0 * b3;
  const double sq = b1 * b1 * b2 * b2 + b1 * b1 * b1 * b3 - 4.0 * b1 * b2 * b3 + 4.0 * b3 * b3;
  return -4.0 * b3 * lemma * sq * sq / std::pow(b1, 6);
}

namespace {

std::complex<double> nearest(const EigenSet& set, std::complex<double> target) {
  return *std::min_element(set.roots.begin(), set.roots.end(), [&](const auto& x, const auto& y) {
    return std::abs(x - target) < std::abs(y - target);
  });
}

}  // namespace

Transversality transversality(const ModelSpec& spec, const FixedPoint& fp, double v0) {
  if (v0 == 0.0) throw InvalidArgument("transversality: v0 must be nonzero");
  const CharCoeffs b = char_coeffs_at(spec, v0, fp);
  const double ratio = b.b3 / b.b1;
  if (!(ratio > 0.0)) {
    std::ostringstream os;
    os << "transversality: no imaginary eigenvalue pair at v0 = " << v0 << " (b3/b1 = " << ratio << ")";
    throw NumericalError(os.str());
  }
  const double omega = std::sqrt(ratio);
  const std::complex<double> target(0.0, omega);
  const auto at_v0 = nearest(quartic_roots(b), target);
  if (std::abs(at_v0 - target) > 1e-6 * std::max(1.0, omega) || at_v0.imag() <= 0.0) {
    std::ostringstream os;
    os << "transversality: no eigenvalue near +i*" << omega << " at v0 = " << v0;
    throw NumericalError(os.str());
  }

  const double delta = 1e-5 * std::max(1.0, std::abs(v0));
  const auto up = nearest(quartic_roots(char_coeffs_at(spec, v0 + delta, fp)), at_v0);
  const auto down = nearest(quartic_roots(char_coeffs_at(spec, v0 - delta, fp)), at_v0);
  return Transversality{v0, omega, (up.real() - down.real()) / (2.0 * delta), at_v0};
}

VolumeRate volume_rate(double b1) {
  VolumeRate r;
  r.rate = -b1;
  r.behaviour = r.rate < 0.0   ? VolumeBehaviour::contracting
                : r.rate > 0.0 ? VolumeBehaviour::dilatory
                               : VolumeBehaviour::conservative;
  return r;
}

std::string_view volume_behaviour_name(VolumeBehaviour b) {
  switch (b) {
    case VolumeBehaviour::contracting: return "contracting";
    case VolumeBehaviour::conservative: return "conservative";
    case VolumeBehaviour::dilatory: return "dilatory";
  }
  return "conservative";
}

HopfAnalysis analyze_hopf(const ModelSpec& spec, const FixedPoint& fp) {
  HopfAnalysis out;
  const HopfCurve curve = hopf_curve(spec, fp);
  out.A = curve.A;
  out.B = curve.B;
  out.speeds = critical_speeds(curve.A, curve.B);
  out.regime = classify_regime(curve.A, curve.B);
  if (!out.speeds) return out;

  const double vp = out.speeds->v_plus;
  const CharCoeffs bp = char_coeffs_at(spec, vp, fp);
  out.critical_coeffs = bp;
  out.critical_coeffs_minus = char_coeffs_at(spec, out.speeds->v_minus, fp);

  if (vp == 0.0) {
    // b1 and b3 are odd in v and vanish here; only lambda^4 + b2 lambda^2 + b4 is left.
    out.degenerate = degenerate_frequency(bp);
    return out;
  }
  if (bp.b1 != 0.0 && bp.b3 / bp.b1 > 0.0) {
    out.omega = hopf_frequency(bp);
    try {
      out.transversality_rate = transversality(spec, fp, vp).rate;
    } catch (const NumericalError&) {
    }
  }
  return out;
}

}  // namespace wavetrain
