#include "wavetrain/diagnostics.hpp"
#include "wavetrain/error.hpp"
#include "wavetrain/integrate.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

using namespace wavetrain;

namespace {

double variance(const std::vector<double>& x) {
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  double s = 0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s / x.size();
}

double integrated_power(const Spectrum& s) {
  return std::accumulate(s.power.begin(), s.power.end(), 0.0) * s.df;
}

std::vector<double> sinusoid(std::size_t n, double f, double dz, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2 * M_PI * f * dz * i + phase);
  return x;
}

std::vector<double> white_noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

PointCloud line_cloud(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointCloud c{3, {}};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = u(rng);
    c.coords.insert(c.coords.end(), {scale * t, scale * 2 * t, scale * -0.5 * t});
  }
  return c;
}

PointCloud square_cloud(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointCloud c{3, {}};
  for (std::size_t i = 0; i < n; ++i) {
    const double a = u(rng), b = u(rng);
    c.coords.insert(c.coords.end(), {scale * a, scale * b, scale * 0.3 * (a + b)});
  }
  return c;
}

// Direct biased estimator, for comparison with the FFT route.
std::vector<double> direct_acf(const std::vector<double>& x, std::size_t max_lag) {
  const std::size_t n = x.size();
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  std::vector<double> r(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double s = 0;
    for (std::size_t i = 0; i + k < n; ++i) s += (x[i] - mean) * (x[i + k] - mean);
    r[k] = s;
  }
  for (std::size_t k = max_lag + 1; k-- > 0;) r[k] /= r[0];
  return r;
}

}  // namespace

TEST_CASE("a pure tone gives one dominant bin") {
  const auto x = sinusoid(40000, 0.2, 0.05);
  const auto s = power_spectral_density(x, 0.05);
  CHECK(s.window == "hann");
  CHECK(s.segment_length == 4096);
  CHECK(s.frequencies[s.peak_bin()] == doctest::Approx(0.2).epsilon(s.df / 0.2));
  std::vector<double> sorted(s.power.begin() + 1, s.power.end());
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  CHECK(10 * std::log10(s.power[s.peak_bin()] / median) >= 40.0);
  CHECK(spectral_flatness(s) < 0.01);
}

TEST_CASE("Parseval holds for assorted series") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const std::size_t n = 4000 + static_cast<std::size_t>(u(rng) * 30000);
    const double dz = 0.01 + 0.2 * u(rng);
    std::vector<double> x = white_noise(n, 100 + i);
    if (i % 3 == 1) {
      // AR(1) red noise
      for (std::size_t k = 1; k < n; ++k) x[k] += 0.9 * x[k - 1];
    } else if (i % 3 == 2) {
      const auto tone = sinusoid(n, 0.4 / dz * u(rng), dz, u(rng));
      for (std::size_t k = 0; k < n; ++k) x[k] = 3 * tone[k] + 0.3 * x[k] + 5.0;
    }
    const auto s = power_spectral_density(x, dz);
    INFO("series " << i << " length " << n);
    CHECK(std::abs(integrated_power(s) / variance(x) - 1.0) < 0.03);
  }
}

TEST_CASE("peak location across frequencies") {
  std::mt19937_64 rng(21);
  const double dz = 0.05, nyquist = 0.5 / dz;
  std::uniform_real_distribution<double> f(0.02 * nyquist, 0.5 * nyquist);
  for (int i = 0; i < 10; ++i) {
    const double f0 = f(rng);
    const auto s = power_spectral_density(sinusoid(20000, f0, dz, 0.3 * i), dz);
    CHECK(std::abs(s.frequencies[s.peak_bin()] - f0) <= s.df);
  }
}

TEST_CASE("spectrum preconditions") {
  CHECK_THROWS_AS(power_spectral_density(std::vector<double>(20, 1.0), 0.1), DiagnosticsError);
  auto x = white_noise(1000, 1);
  x[10] = std::nan("");
  CHECK_THROWS_AS(power_spectral_density(x, 0.1), DiagnosticsError);
  CHECK_THROWS_AS(power_spectral_density(white_noise(1000, 2), 0.0), InvalidArgument);
  CHECK_THROWS_AS(power_spectral_density(white_noise(1000, 2), 0.1, {100, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(power_spectral_density(white_noise(1000, 2), 0.1, {64, 1.0}), InvalidArgument);
  const auto s = power_spectral_density(white_noise(1000, 2), 0.1, {64, 0.5});
  CHECK(s.segment_length == 64);
  CHECK(s.frequencies.size() == 33);
  CHECK(s.segments == 30);
}

TEST_CASE("autocorrelation") {
  const auto noise = white_noise(8192, 5);
  const auto r = autocorrelation(noise);
  CHECK(r.size() == 8192 / 4 + 1);
  CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-14));
  std::size_t inside = 0;
  for (std::size_t k = 1; k < r.size(); ++k) inside += std::abs(r[k]) < 4.0 / std::sqrt(8192.0);
  CHECK(inside >= 0.95 * (r.size() - 1));

  const auto direct = direct_acf(noise, 300);
  const auto fft = autocorrelation(noise, 300);
  REQUIRE(fft.size() == 301);
  for (std::size_t k = 0; k <= 300; ++k) CHECK(fft[k] == doctest::Approx(direct[k]).epsilon(1e-10).scale(1.0));

  // Period of 80 samples.
  const auto tone = sinusoid(16000, 1.0 / 4.0, 0.05);
  const auto rt = autocorrelation(tone);
  for (std::size_t T : {80u, 160u}) {
    CHECK(rt[T] > rt[T - 1]);
    CHECK(rt[T] >= rt[T + 1]);
    CHECK(rt[T] > 0.9);
  }
  CHECK(autocorrelation({1.0, 2.0, 3.0, 5.0, 4.0}, 10).size() == 5);
  CHECK_THROWS_AS(autocorrelation(std::vector<double>(100, 2.0)), DiagnosticsError);
  CHECK_THROWS_AS(autocorrelation({1.0, 2.0}), DiagnosticsError);
}

TEST_CASE("spectral flatness extremes") {
  const auto noise = power_spectral_density(white_noise(32768, 9), 0.05);
  CHECK(spectral_flatness(noise) > 0.5);
  const auto tone = power_spectral_density(sinusoid(32768, 1.3, 0.05), 0.05);
  CHECK(spectral_flatness(tone) < 0.01);
  CHECK(spectral_flatness(tone) < spectral_flatness(noise) / 10);
}

TEST_CASE("cluster dimension calibration") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto line = cluster_fractal_dimension(line_cloud(5000, seed));
    REQUIRE(line.D.has_value());
    CHECK(std::abs(*line.D - 1.0) <= 0.1);
    const auto square = cluster_fractal_dimension(square_cloud(5000, seed));
    REQUIRE(square.D.has_value());
    CHECK(std::abs(*square.D - 2.0) <= 0.15);
    CHECK(square.point_count == 5000);
    CHECK(square.reference_count == 200);
    REQUIRE(square.plateau_range.has_value());
    CHECK(square.plateau_range->second / square.plateau_range->first >= 10.0 - 1e-9);
  }
}

TEST_CASE("cluster dimension is scale free") {
  const auto base = cluster_fractal_dimension(square_cloud(5000, 7));
  for (double scale : {1e-3, 7.3, 250.0}) {
    const auto scaled = cluster_fractal_dimension(square_cloud(5000, 7, scale));
    REQUIRE(scaled.D.has_value());
    CHECK(std::abs(*scaled.D - *base.D) <= 0.05);
  }
}

TEST_CASE("neighbour distances grow with rank") {
  const auto e = cluster_fractal_dimension(square_cloud(4000, 3));
  REQUIRE(e.log_R.size() == e.log_n.size());
  for (std::size_t i = 1; i < e.log_R.size(); ++i) {
    CHECK(e.log_n[i] > e.log_n[i - 1]);
    CHECK(e.log_R[i] >= e.log_R[i - 1]);
  }
  CHECK(e.local_slopes.size() == e.log_n.size());
}

TEST_CASE("repeated points do not count as neighbours") {
  auto cloud = line_cloud(3000, 11);
  const auto copy = cloud.coords;
  cloud.coords.insert(cloud.coords.end(), copy.begin(), copy.end());
  const auto e = cluster_fractal_dimension(cloud);
  REQUIRE(e.D.has_value());
  CHECK(std::abs(*e.D - 1.0) <= 0.1);
}

TEST_CASE("cluster dimension preconditions and determinism") {
  CHECK_THROWS_AS(cluster_fractal_dimension(line_cloud(1500, 1)), DiagnosticsError);
  auto bad = line_cloud(3000, 1);
  bad.coords[7] = std::nan("");
  CHECK_THROWS_AS(cluster_fractal_dimension(bad), DiagnosticsError);

  FractalOptions one, many;
  one.threads = 1;
  many.threads = 8;
  const auto a = cluster_fractal_dimension(square_cloud(3000, 2), one);
  const auto b = cluster_fractal_dimension(square_cloud(3000, 2), many);
  CHECK(a.log_R == b.log_R);
  CHECK(a.D == b.D);
}

TEST_CASE("limit cycle diagnostics") {
  const auto m = make_preset(SystemId::B);
  const auto fps = fixed_points(m);
  IntegrationOptions o;
  o.zeta_end = 1000;
  o.initial_state = default_initial_state(fps.at(0));
  const auto t = integrate(m, 1.9, o);
  const auto summary = summarize_oscillation(t, fps[0], 0.5);
  const auto n = drop_transient(resample_series(t, Component::N), 0.5);
  const auto s = power_spectral_density(n.values, n.dzeta);
  CHECK(std::abs(s.frequencies[s.peak_bin()] - 1.0 / summary.period_estimate) <= s.df);
  CHECK(spectral_flatness(s) < 0.01);

  // Drop the inward spiral so only cycle-resident points remain.
  const auto cloud = embed_trajectory(t, 3, 0.5);
  CHECK(cloud.dim == 3);
  CHECK(cloud.size() == t.size() - static_cast<std::size_t>(0.5 * t.size()));
  const auto d = cluster_fractal_dimension(cloud);
  REQUIRE(d.D.has_value());
  CHECK(std::abs(*d.D - 1.0) <= 0.15);
  CHECK_THROWS_AS(embed_trajectory(t, 5, 0.2), InvalidArgument);
}

TEST_CASE("diagnostic files") {
  const auto dir = std::filesystem::temp_directory_path() / "wavetrain_unit_diagnostics";
  std::filesystem::create_directories(dir);
  const auto s = power_spectral_density(sinusoid(4096, 1.0, 0.05), 0.05);
  write_spectrum_csv(s, (dir / "s.csv").string());
  write_acf_csv(autocorrelation(sinusoid(400, 1.0, 0.05)), 0.05, (dir / "a.csv").string());
  write_scaling_csv(cluster_fractal_dimension(line_cloud(2500, 4)), (dir / "r.csv").string());
  auto first_line = [&](const char* name) {
    std::ifstream in(dir / name);
    std::string line;
    std::getline(in, line);
    return line;
  };
  CHECK(first_line("s.csv") == "frequency,power");
  CHECK(first_line("a.csv") == "lag,acf");
  CHECK(first_line("r.csv") == "log_n,log_R,local_slope");
}
