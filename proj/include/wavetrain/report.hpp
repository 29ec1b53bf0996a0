#ifndef WAVETRAIN_REPORT_HPP
#define WAVETRAIN_REPORT_HPP

#include "wavetrain/model.hpp"
#include "wavetrain/stability.hpp"

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace wavetrain {

/// Picks fixed point `index` when given, otherwise the first physical one.
/// Throws NoPhysicalFixedPoint listing all roots when neither exists.
std::size_t select_fixed_point(const std::vector<FixedPoint>& points, std::optional<std::size_t> index);

/// Stability of one equilibrium at one wave speed, plus the v-independent
/// Hopf analysis of that equilibrium.
struct AnalysisReport {
  std::string system;
  double v = 0.0;
  std::vector<FixedPoint> fixed_points;
  std::size_t fp_index = 0;

  CharCoeffs coeffs;
  RouthHurwitzReport routh_hurwitz;
  std::vector<std::complex<double>> eigenvalues;
  VolumeRate volume;

  double A = 0.0;
  double B = 0.0;
  std::optional<CriticalSpeeds> speeds;
  Regime regime = Regime::degenerate;
  std::string regime_description;
  std::optional<double> omega;
  std::optional<DegenerateFrequency> degenerate;
  std::optional<CharCoeffs> critical_coeffs;
  std::optional<CharCoeffs> critical_coeffs_minus;
  std::optional<double> transversality_rate;

  const FixedPoint& fixed_point() const { return fixed_points.at(fp_index); }
  /// -1, 0 or +1; 0 when the rate is unavailable.
  int transversality_sign() const;
};

bool operator==(const AnalysisReport& a, const AnalysisReport& b);

AnalysisReport analyze(const ModelSpec& spec, double v, std::optional<std::size_t> fp_index = {});

std::string report_to_json(const AnalysisReport& report);
/// Inverse of report_to_json; ConfigError on malformed documents.
AnalysisReport report_from_json(const std::string& text);
/// key = value lines for humans.
std::string report_to_text(const AnalysisReport& report);

}  // namespace wavetrain

#endif  // WAVETRAIN_REPORT_HPP
