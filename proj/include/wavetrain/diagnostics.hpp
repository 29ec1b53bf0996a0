#ifndef WAVETRAIN_DIAGNOSTICS_HPP
#define WAVETRAIN_DIAGNOSTICS_HPP

#include "wavetrain/integrate.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wavetrain {

struct PsdOptions {
  /// Power of two; 0 picks the largest 2^m <= length / 8 (at least 16).
  std::size_t segment_length = 0;
  double overlap = 0.5;
};

struct Spectrum {
  /// Bin centers k / (segment_length * dzeta), k = 0 .. segment_length / 2.
  std::vector<double> frequencies;
  /// One-sided density; sum(power) * df is the series variance.
  std::vector<double> power;
  std::string window = "hann";
  std::size_t segment_length = 0;
  double overlap = 0.5;
  std::size_t segments = 0;
  double df = 0.0;

  /// Index of the largest bin above DC.
  std::size_t peak_bin() const;
};

/// Welch estimate: global mean removed, Hann-tapered segments of 2^m samples
/// with fractional overlap, periodograms averaged.
Spectrum power_spectral_density(const std::vector<double>& series, double dzeta, const PsdOptions& opts = {});

/// Biased, normalized ACF at lags 0..max_lag (default length / 4).
std::vector<double> autocorrelation(const std::vector<double>& series, std::optional<std::size_t> max_lag = {});

/// Geometric over arithmetic mean of the bins above DC, each floored at 1e-300.
double spectral_flatness(const Spectrum& spectrum);

/// Row-major set of points in `dim` dimensions.
struct PointCloud {
  std::size_t dim = 0;
  std::vector<double> coords;

  std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
  const double* point(std::size_t i) const { return coords.data() + i * dim; }
};

/// The first `dim` coordinates of (N, M, P, Q) for every sample after the
/// leading transient fraction.
PointCloud embed_trajectory(const Trajectory& traj, std::size_t dim, double transient_fraction);

struct FractalOptions {
  std::size_t reference_count = 200;
  /// Number of logarithmically spaced neighbor ranks.
  std::size_t grid_size = 32;
  /// Largest neighbor rank as a fraction of the point count.
  double max_rank_fraction = 0.05;
  double plateau_spread = 0.3;
  double plateau_decades = 1.0;
  /// 0 uses the hardware concurrency.
  unsigned threads = 0;
};

struct FractalEstimate {
  std::vector<double> log_n;
  std::vector<double> log_R;
  std::vector<double> local_slopes;
  /// Median slope over the plateau; absent when no plateau qualifies.
  std::optional<double> D;
  std::optional<std::pair<double, double>> plateau_range;
  /// k in n = k R(n)^D.
  std::optional<double> cluster_prefactor;
  std::size_t point_count = 0;
  std::size_t reference_count = 0;
};

inline constexpr std::size_t kMinFractalPoints = 2000;

/// Termonia-Alexandrowicz cluster dimension. R(n) is the mean, over evenly
/// strided reference points, of the Euclidean distance to the n-th nearest
/// neighbour (zero distances excluded). D is the median local slope
/// d log n / d log R over the widest window spanning at least one decade in
/// n whose slopes stay within the spread threshold.
FractalEstimate cluster_fractal_dimension(const PointCloud& points, const FractalOptions& opts = {});

void write_spectrum_csv(const Spectrum& spectrum, const std::string& path);
/// `lag,acf` with lag in units of zeta.
void write_acf_csv(const std::vector<double>& acf, double dzeta, const std::string& path);
void write_scaling_csv(const FractalEstimate& estimate, const std::string& path);

}  // namespace wavetrain

#endif  // WAVETRAIN_DIAGNOSTICS_HPP
