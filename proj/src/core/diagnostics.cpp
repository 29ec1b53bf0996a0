#include "wavetrain/diagnostics.hpp"

#include "wavetrain/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>
#include <thread>

namespace wavetrain {

namespace {

// FFTW's planner is not re-entrant; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Real <-> half-complex transforms of a fixed length sharing one pair of buffers.
class RealFft {
 public:
  explicit RealFft(std::size_t n, bool with_inverse = false) : n_(n) {
    real_ = fftw_alloc_real(n);
    half_ = fftw_alloc_complex(n / 2 + 1);
    if (!real_ || !half_) {
      release();
      throw DiagnosticsError("FFT buffer allocation failed");
    }
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_, half_, FFTW_ESTIMATE);
    if (with_inverse) inverse_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), half_, real_, FFTW_ESTIMATE);
    if (!forward_ || (with_inverse && !inverse_)) {
      release_locked();
      throw DiagnosticsError("FFT plan creation failed");
    }
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft() { release(); }

  double* real() { return real_; }
  fftw_complex* half() { return half_; }
  void forward() { fftw_execute(forward_); }
  /// Unnormalized: the result is n times the true inverse.
  void inverse() { fftw_execute(inverse_); }
  double power(std::size_t k) const { return half_[k][0] * half_[k][0] + half_[k][1] * half_[k][1]; }

 private:
  void release() {
    std::lock_guard lock(planner_mutex());
    release_locked();
  }
  void release_locked() {
    if (forward_) fftw_destroy_plan(forward_);
    if (inverse_) fftw_destroy_plan(inverse_);
    if (real_) fftw_free(real_);
    if (half_) fftw_free(half_);
    forward_ = inverse_ = nullptr;
    real_ = nullptr;
    half_ = nullptr;
  }

  std::size_t n_;
  double* real_ = nullptr;
  fftw_complex* half_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

void require_finite(const std::vector<double>& series, const char* who) {
  for (double x : series)
    if (!std::isfinite(x)) throw DiagnosticsError(std::string(who) + ": series contains non-finite values");
}

double mean_of(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t default_segment(std::size_t n) {
  std::size_t seg = 16;
  while (seg * 2 <= n / 8) seg *= 2;
  return seg;
}

}  // namespace

std::size_t Spectrum::peak_bin() const {
  if (power.size() < 2) return 0;
  return static_cast<std::size_t>(std::max_element(power.begin() + 1, power.end()) - power.begin());
}

Spectrum power_spectral_density(const std::vector<double>& series, double dzeta, const PsdOptions& opts) {
  if (!(dzeta > 0.0)) throw InvalidArgument("power_spectral_density: dzeta must be positive");
  if (!(opts.overlap >= 0.0 && opts.overlap < 1.0))
    throw InvalidArgument("power_spectral_density: overlap must lie in [0, 1)");
  require_finite(series, "power_spectral_density");
  const std::size_t n = series.size();
  const std::size_t seg = opts.segment_length == 0 ? default_segment(n) : opts.segment_length;
  if (!is_power_of_two(seg) || seg < 4)
    throw InvalidArgument("power_spectral_density: segment length must be a power of two >= 4");
  if (n < 2 * seg) {
    std::ostringstream os;
    os << "power_spectral_density: series of length " << n << " is shorter than two segments of " << seg;
    throw DiagnosticsError(os.str());
  }

  std::vector<double> window(seg);
  double wss = 0.0;
  for (std::size_t i = 0; i < seg; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(seg));
    wss += window[i] * window[i];
  }

  const double mu = mean_of(series);
  const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(seg) * (1.0 - opts.overlap))));
  const std::size_t bins = seg / 2 + 1;

  Spectrum out;
  out.segment_length = seg;
  out.overlap = opts.overlap;
  out.df = 1.0 / (static_cast<double>(seg) * dzeta);
  out.power.assign(bins, 0.0);
  out.frequencies.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) out.frequencies[k] = static_cast<double>(k) * out.df;

  RealFft fft(seg);
  for (std::size_t start = 0; start + seg <= n; start += hop) {
    double* buf = fft.real();
    for (std::size_t i = 0; i < seg; ++i) buf[i] = (series[start + i] - mu) * window[i];
    fft.forward();
    for (std::size_t k = 0; k < bins; ++k) out.power[k] += fft.power(k);
    ++out.segments;
  }
  const double scale = dzeta / (wss * static_cast<double>(out.segments));
  for (std::size_t k = 0; k < bins; ++k) {
    const bool edge = k == 0 || k == bins - 1;
    out.power[k] *= scale * (edge ? 1.0 : 2.0);
  }
  return out;
}

std::vector<double> autocorrelation(const std::vector<double>& series, std::optional<std::size_t> max_lag) {
  const std::size_t n = series.size();
  if (n < 4) throw DiagnosticsError("autocorrelation: series needs at least 4 samples");
  require_finite(series, "autocorrelation");
  const std::size_t L = std::min(max_lag.value_or(n / 4), n - 1);

  const double mu = mean_of(series);
  std::size_t m = 1;
  while (m < 2 * n) m *= 2;

  RealFft fft(m, true);
  double* buf = fft.real();
  for (std::size_t i = 0; i < m; ++i) buf[i] = i < n ? series[i] - mu : 0.0;
  fft.forward();
  fftw_complex* half = fft.half();
  for (std::size_t k = 0; k <= m / 2; ++k) {
    half[k][0] = fft.power(k);
    half[k][1] = 0.0;
  }
  fft.inverse();

  const double r0 = buf[0];
  if (!(r0 > 0.0) || r0 <= 1e-300 * static_cast<double>(m))
    throw DiagnosticsError("autocorrelation: series has zero variance");
  std::vector<double> acf(L + 1);
  for (std::size_t lag = 0; lag <= L; ++lag) acf[lag] = buf[lag] / r0;
  acf[0] = 1.0;
  return acf;
}

double spectral_flatness(const Spectrum& spectrum) {
  if (spectrum.power.size() < 2) throw InvalidArgument("spectral_flatness: spectrum has no bins above DC");
  double log_sum = 0.0, sum = 0.0;
  const std::size_t count = spectrum.power.size() - 1;
  for (std::size_t k = 1; k < spectrum.power.size(); ++k) {
    const double p = std::max(spectrum.power[k], 1e-300);
    log_sum += std::log(p);
    sum += p;
  }
  const double n = static_cast<double>(count);
  return std::exp(log_sum / n - std::log(sum / n));
}

PointCloud embed_trajectory(const Trajectory& traj, std::size_t dim, double transient_fraction) {
  if (dim < 2 || dim > 4) throw InvalidArgument("embed_trajectory: embedding dimension must be 2, 3 or 4");
  if (!(transient_fraction >= 0.0 && transient_fraction < 1.0))
    throw InvalidArgument("embed_trajectory: transient fraction must lie in [0, 1)");
  const auto skip = static_cast<std::size_t>(std::floor(transient_fraction * static_cast<double>(traj.size())));
  PointCloud cloud;
  cloud.dim = dim;
  cloud.coords.reserve((traj.size() - skip) * dim);
  for (std::size_t i = skip; i < traj.size(); ++i) {
    const auto a = traj.states[i].to_array();
    cloud.coords.insert(cloud.coords.end(), a.begin(), a.begin() + static_cast<std::ptrdiff_t>(dim));
  }
  return cloud;
}

namespace {

std::vector<std::size_t> rank_grid(std::size_t max_rank, std::size_t size) {
  std::vector<std::size_t> ranks;
  const double top = std::log(static_cast<double>(max_rank));
  for (std::size_t i = 0; i < size; ++i) {
    const double t = size == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(size - 1);
    const auto r = static_cast<std::size_t>(std::llround(std::exp(t * top)));
    if (ranks.empty() || r > ranks.back()) ranks.push_back(r);
  }
  return ranks;
}

// Distances from one reference to every other point, zeros dropped, sorted.
std::vector<double> neighbour_distances(const PointCloud& pts, std::size_t ref) {
  std::vector<double> d;
  d.reserve(pts.size());
  const double* r = pts.point(ref);
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (j == ref) continue;
    const double* p = pts.point(j);
    double acc = 0.0;
    for (std::size_t c = 0; c < pts.dim; ++c) acc += (p[c] - r[c]) * (p[c] - r[c]);
    if (acc > 0.0) d.push_back(std::sqrt(acc));
  }
  std::sort(d.begin(), d.end());
  return d;
}

}  // namespace

FractalEstimate cluster_fractal_dimension(const PointCloud& points, const FractalOptions& opts) {
  if (points.dim < 2 || points.dim > 4)
    throw InvalidArgument("cluster_fractal_dimension: embedding dimension must be 2, 3 or 4");
  const std::size_t n_points = points.size();
  if (n_points < kMinFractalPoints) {
    std::ostringstream os;
    os << "cluster_fractal_dimension: " << n_points << " points, need at least " << kMinFractalPoints;
    throw DiagnosticsError(os.str());
  }
  for (double x : points.coords)
    if (!std::isfinite(x)) throw DiagnosticsError("cluster_fractal_dimension: non-finite coordinates");
  if (opts.reference_count == 0 || opts.grid_size < 3)
    throw InvalidArgument("cluster_fractal_dimension: need references and at least 3 grid ranks");

  const std::size_t refs = std::min(opts.reference_count, n_points);
  const std::size_t stride = n_points / refs;
  const auto wanted_max = static_cast<std::size_t>(opts.max_rank_fraction * static_cast<double>(n_points));

  // Per-reference sorted distances are only needed at the grid ranks, but the
  // usable maximum rank depends on how many nonzero distances each has.
  std::vector<std::vector<double>> per_ref(refs);
  unsigned workers = opts.threads != 0 ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, refs));
  {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t r = w; r < refs; r += workers) per_ref[r] = neighbour_distances(points, r * stride);
      });
    for (auto& t : pool) t.join();
  }

  std::size_t max_rank = std::max<std::size_t>(wanted_max, 2);
  for (const auto& d : per_ref) max_rank = std::min(max_rank, d.size());
  if (max_rank < 10) throw DiagnosticsError("cluster_fractal_dimension: too few distinct neighbours");

  const auto ranks = rank_grid(max_rank, opts.grid_size);
  FractalEstimate out;
  out.point_count = n_points;
  out.reference_count = refs;
  for (std::size_t rank : ranks) {
    double sum = 0.0;
    for (const auto& d : per_ref) sum += d[rank - 1];
    out.log_n.push_back(std::log(static_cast<double>(rank)));
    out.log_R.push_back(std::log(sum / static_cast<double>(refs)));
  }

  const std::size_t g = ranks.size();
  out.local_slopes.resize(g);
  for (std::size_t i = 0; i < g; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == g ? g - 1 : i + 1;
    const double dr = out.log_R[hi] - out.log_R[lo];
    out.local_slopes[i] = dr > 0.0 ? (out.log_n[hi] - out.log_n[lo]) / dr : std::numeric_limits<double>::infinity();
  }

  // Widest window (in decades of n) whose slope spread stays under threshold.
  const double min_width = opts.plateau_decades * std::log(10.0);
  std::optional<std::pair<std::size_t, std::size_t>> best;
  double best_width = -1.0;
  for (std::size_t i = 0; i < g; ++i) {
    double lo = out.local_slopes[i], hi = out.local_slopes[i];
    for (std::size_t j = i; j < g; ++j) {
      lo = std::min(lo, out.local_slopes[j]);
      hi = std::max(hi, out.local_slopes[j]);
      if (!std::isfinite(hi) || hi - lo >= opts.plateau_spread) break;
      const double width = out.log_n[j] - out.log_n[i];
      if (width >= min_width && width > best_width) {
        best_width = width;
        best = std::make_pair(i, j);
      }
    }
  }
  if (!best) return out;

  std::vector<double> window(out.local_slopes.begin() + static_cast<std::ptrdiff_t>(best->first),
                             out.local_slopes.begin() + static_cast<std::ptrdiff_t>(best->second) + 1);
  std::sort(window.begin(), window.end());
  const std::size_t w = window.size();
  const double D = w % 2 == 1 ? window[w / 2] : 0.5 * (window[w / 2 - 1] + window[w / 2]);
  if (!(D > 0.0)) return out;
  out.D = D;
  out.plateau_range = std::make_pair(std::exp(out.log_n[best->first]), std::exp(out.log_n[best->second]));
  double intercept = 0.0;
  for (std::size_t i = best->first; i <= best->second; ++i) intercept += out.log_n[i] - D * out.log_R[i];
  out.cluster_prefactor = std::exp(intercept / static_cast<double>(w));
  return out;
}

namespace {

std::FILE* open_for_write(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot write '" + path + "'");
  return f;
}

void close_checked(std::FILE* f, const std::string& path) {
  if (std::fclose(f) != 0) throw IoError("error closing '" + path + "'");
}

}  // namespace

void write_spectrum_csv(const Spectrum& spectrum, const std::string& path) {
  std::FILE* f = open_for_write(path);
  std::fputs("frequency,power\n", f);
  for (std::size_t k = 0; k < spectrum.power.size(); ++k)
    std::fprintf(f, "%.17g,%.17g\n", spectrum.frequencies[k], spectrum.power[k]);
  close_checked(f, path);
}

void write_acf_csv(const std::vector<double>& acf, double dzeta, const std::string& path) {
  std::FILE* f = open_for_write(path);
  std::fputs("lag,acf\n", f);
  for (std::size_t i = 0; i < acf.size(); ++i) std::fprintf(f, "%.17g,%.17g\n", static_cast<double>(i) * dzeta, acf[i]);
  close_checked(f, path);
}

void write_scaling_csv(const FractalEstimate& estimate, const std::string& path) {
  std::FILE* f = open_for_write(path);
  std::fputs("log_n,log_R,local_slope\n", f);
  for (std::size_t i = 0; i < estimate.log_n.size(); ++i)
    std::fprintf(f, "%.17g,%.17g,%.17g\n", estimate.log_n[i], estimate.log_R[i], estimate.local_slopes[i]);
  close_checked(f, path);
}

}  // namespace wavetrain
