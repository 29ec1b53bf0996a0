#include "wavetrain/integrate.hpp"

#include "wavetrain/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace wavetrain {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
// Error weights: 5th-order minus embedded 4th-order solution.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer, Norsett & Wanner).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

using V = StateVector;

V axpy(const V& y, double h, std::initializer_list<std::pair<double, const V*>> terms) {
  V out = y;
  for (const auto& [coef, k] : terms)
    for (std::size_t i = 0; i < 4; ++i) out[i] += h * coef * (*k)[i];
  return out;
}

bool all_finite(const V& y) {
  return std::all_of(y.begin(), y.end(), [](double x) { return std::isfinite(x); });
}

double max_norm(const V& y) {
  double m = 0.0;
  for (double x : y) m = std::max(m, std::abs(x));
  return m;
}

struct Step {
  V y5{};
  V k2{}, k3{}, k4{}, k5{}, k6{}, k7{};
  double err = 0.0;
  bool ok = false;
};

class Dopri5 {
 public:
  Dopri5(const SystemRhs& rhs, const IntegrationOptions& opts) : rhs_(rhs), opts_(opts) {}

  // One trial step of size h from (z, y) with k1 = f(z, y).
  Step attempt(double z, const V& y, const V& k1, double h) const {
    Step s;
    try {
      s.k2 = rhs_(z + c2 * h, axpy(y, h, {{a21, &k1}}));
      s.k3 = rhs_(z + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &s.k2}}));
      s.k4 = rhs_(z + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &s.k2}, {a43, &s.k3}}));
      s.k5 = rhs_(z + c5 * h, axpy(y, h, {{a51, &k1}, {a52, &s.k2}, {a53, &s.k3}, {a54, &s.k4}}));
      s.k6 = rhs_(z + h, axpy(y, h, {{a61, &k1}, {a62, &s.k2}, {a63, &s.k3}, {a64, &s.k4}, {a65, &s.k5}}));
      s.y5 = axpy(y, h, {{a71, &k1}, {a73, &s.k3}, {a74, &s.k4}, {a75, &s.k5}, {a76, &s.k6}});
      if (!all_finite(s.y5)) return s;
      s.k7 = rhs_(z + h, s.y5);
    } catch (const NumericalError&) {
      return s;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      const double e = h * (e1 * k1[i] + e3 * s.k3[i] + e4 * s.k4[i] + e5 * s.k5[i] + e6 * s.k6[i] +
                            e7 * s.k7[i]);
      const double sc = opts_.abs_tol + opts_.rel_tol * std::max(std::abs(y[i]), std::abs(s.y5[i]));
      acc += (e / sc) * (e / sc);
    }
    // Error per unit step: the local error is measured against tol * h.
    s.err = std::sqrt(acc / 4.0) / h;
    s.ok = std::isfinite(s.err);
    return s;
  }

  double initial_step(double z, const V& y, const V& f0) const {
    auto scaled = [&](const V& v) {
      double acc = 0.0;
      for (std::size_t i = 0; i < 4; ++i) {
        const double sc = opts_.abs_tol + opts_.rel_tol * std::abs(y[i]);
        acc += (v[i] / sc) * (v[i] / sc);
      }
      return std::sqrt(acc / 4.0);
    };
    const double dn0 = scaled(y);
    const double dn1 = scaled(f0);
    double h0 = (dn0 < 1e-5 || dn1 < 1e-5) ? 1e-6 : 0.01 * dn0 / dn1;
    h0 = std::min(h0, opts_.max_step);
    double h1 = h0;
    try {
      const V f1 = rhs_(z + h0, axpy(y, h0, {{1.0, &f0}}));
      V df;
      for (std::size_t i = 0; i < 4; ++i) df[i] = f1[i] - f0[i];
      const double dn2 = scaled(df) / h0;
      const double m = std::max(dn1, dn2);
      h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 1.0 / 5.0);
    } catch (const NumericalError&) {
    }
    return std::min({100.0 * h0, h1, opts_.max_step});
  }

 private:
  const SystemRhs& rhs_;
  const IntegrationOptions& opts_;
};

PhaseState to_state(const V& y) { return PhaseState::from_array(y); }

}  // namespace

void IntegrationOptions::validate() const {
  auto fail = [](const std::string& what) { throw InvalidArgument("integration options: " + what); };
  if (!(std::isfinite(zeta_start) && std::isfinite(zeta_end) && zeta_end > zeta_start))
    fail("zeta_end must exceed zeta_start");
  if (!(rel_tol > 0.0 && abs_tol > 0.0)) fail("tolerances must be positive");
  if (!(blowup_threshold > 0.0)) fail("blowup_threshold must be positive");
  if (!(sample_interval > 0.0)) fail("sample_interval must be positive");
  if (!(max_step > 0.0)) fail("max_step must be positive");
  if (!initial_state.finite()) fail("initial state must be finite");
}

PhaseState default_initial_state(const FixedPoint& fp) {
  return {fp.N0 + kDefaultPerturbation.N, fp.M0 + kDefaultPerturbation.M, fp.P0 + kDefaultPerturbation.P,
          fp.Q0 + kDefaultPerturbation.Q};
}

std::string_view termination_name(Termination t) {
  return t == Termination::blowup ? "blowup" : "completed";
}

Trajectory integrate_system(const SystemRhs& rhs, const IntegrationOptions& opts) {
  opts.validate();
  Trajectory traj;
  traj.options = opts;

  const double span = opts.zeta_end - opts.zeta_start;
  const double h_min = 1e-12 * span;
  const double dz = opts.sample_interval;
  const std::size_t n_samples = static_cast<std::size_t>(std::floor(span / dz * (1.0 + 1e-12))) + 1;
  traj.zetas.reserve(n_samples);
  traj.states.reserve(n_samples);
  auto grid = [&](std::size_t i) { return opts.zeta_start + static_cast<double>(i) * dz; };

  Dopri5 stepper(rhs, opts);
  double z = opts.zeta_start;
  V y = opts.initial_state.to_array();
  if (max_norm(y) > opts.blowup_threshold)
    throw InvalidArgument("initial state already exceeds the blow-up threshold");
  V k1 = rhs(z, y);
  traj.zetas.push_back(grid(0));
  traj.states.push_back(to_state(y));
  std::size_t next = 1;

  double h = stepper.initial_step(z, y, k1);
  bool last_rejected = false;

  while (next < n_samples || z < opts.zeta_end) {
    const double remaining = opts.zeta_end - z;
    if (remaining <= h_min) break;
    h = std::min({h, opts.max_step, remaining});
    if (h < h_min) {
      std::ostringstream os;
      os << "step size underflow (h = " << h << ") at zeta = " << z << "; the problem looks stiff";
      throw IntegrationError(os.str());
    }

    Step s = stepper.attempt(z, y, k1, h);
    if (!s.ok || s.err > 1.0) {
      ++traj.rejected_steps;
      const double fac = s.ok ? std::max(0.2, 0.9 * std::pow(s.err, -0.25)) : 0.2;
      h *= fac;
      last_rejected = true;
      continue;
    }
    ++traj.accepted_steps;

    if (max_norm(s.y5) > opts.blowup_threshold) {
      // Bracket the threshold crossing by re-stepping from the last good state.
      double lo = 0.0, hi = h;
      while (hi - lo > 1e-3) {
        const double mid = 0.5 * (lo + hi);
        const Step t = stepper.attempt(z, y, k1, mid);
        if (!all_finite(t.y5) || max_norm(t.y5) > opts.blowup_threshold)
          hi = mid;
        else
          lo = mid;
      }
      while (next < n_samples && grid(next) <= z + lo) {
        const Step t = stepper.attempt(z, y, k1, grid(next) - z);
        if (!all_finite(t.y5) || max_norm(t.y5) > opts.blowup_threshold) break;
        traj.zetas.push_back(grid(next));
        traj.states.push_back(to_state(t.y5));
        ++next;
      }
      traj.termination = Termination::blowup;
      traj.blowup_zeta = z + 0.5 * (lo + hi);
      return traj;
    }

    // Dense output on (z, z + h].
    V r2, r3, r4, r5;
    for (std::size_t i = 0; i < 4; ++i) {
      const double ydiff = s.y5[i] - y[i];
      const double bspl = h * k1[i] - ydiff;
      r2[i] = ydiff;
      r3[i] = bspl;
      r4[i] = ydiff - h * s.k7[i] - bspl;
      r5[i] = h * (d1 * k1[i] + d3 * s.k3[i] + d4 * s.k4[i] + d5 * s.k5[i] + d6 * s.k6[i] + d7 * s.k7[i]);
    }
    const double z_new = (h == remaining) ? opts.zeta_end : z + h;
    while (next < n_samples && grid(next) <= z_new + 1e-12 * std::max(1.0, std::abs(z_new))) {
      const double theta = std::clamp((grid(next) - z) / h, 0.0, 1.0);
      const double theta1 = 1.0 - theta;
      V out;
      for (std::size_t i = 0; i < 4; ++i)
        out[i] = y[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])));
      traj.zetas.push_back(grid(next));
      traj.states.push_back(to_state(out));
      ++next;
    }

    z = z_new;
    y = s.y5;
    k1 = s.k7;
    double fac = s.err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(s.err, -0.25), 0.2, 5.0);
    if (last_rejected) fac = std::min(fac, 1.0);
    h *= fac;
    last_rejected = false;
  }
  traj.termination = Termination::completed;
  return traj;
}

Trajectory integrate(const ModelSpec& spec, double v, const IntegrationOptions& opts) {
  const SystemRhs rhs = [&spec, v](double, const StateVector& y) {
    return evaluate_rhs(spec, v, PhaseState::from_array(y)).to_array();
  };
  Trajectory traj = integrate_system(rhs, opts);
  traj.wave_speed = v;
  return traj;
}

std::string_view oscillation_class_name(OscillationClass c) {
  switch (c) {
    case OscillationClass::decay_to_fixed_point: return "decay_to_fixed_point";
    case OscillationClass::limit_cycle: return "limit_cycle";
    case OscillationClass::aperiodic_bounded: return "aperiodic_bounded";
    case OscillationClass::blowup: return "blowup";
  }
  return "aperiodic_bounded";
}

std::vector<Peak> find_peaks(const std::vector<double>& values, double zeta0, double dzeta) {
  std::vector<Peak> peaks;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    const double a = values[i - 1], b = values[i], c = values[i + 1];
    if (!(b > a && b >= c)) continue;
    const double curvature = a - 2.0 * b + c;
    double offset = 0.0;
    double height = b;
    if (curvature < 0.0) {
      offset = 0.5 * (a - c) / curvature;
      height = b - 0.25 * (a - c) * offset;
    }
    peaks.push_back({zeta0 + (static_cast<double>(i) + offset) * dzeta, height});
  }
  return peaks;
}

namespace {

double distance(const PhaseState& a, const PhaseState& b) {
  const double dn = a.N - b.N, dm = a.M - b.M, dp = a.P - b.P, dq = a.Q - b.Q;
  return std::sqrt(dn * dn + dm * dm + dp * dp + dq * dq);
}

}  // namespace

OscillationSummary summarize_oscillation(const Trajectory& traj, const FixedPoint& fp,
                                         double transient_fraction) {
  if (traj.empty()) throw InvalidArgument("summarize_oscillation: empty trajectory");
  if (!(transient_fraction >= 0.0 && transient_fraction <= 0.9))
    throw InvalidArgument("summarize_oscillation: transient_fraction must lie in [0, 0.9]");

  OscillationSummary out;
  out.final_state = traj.states.back();
  out.initial_distance = distance(traj.states.front(), fp.state());
  out.final_distance = distance(traj.states.back(), fp.state());
  if (traj.termination == Termination::blowup) {
    out.classification = OscillationClass::blowup;
    return out;
  }
  if (out.final_distance < kDecayRatio * out.initial_distance) {
    out.classification = OscillationClass::decay_to_fixed_point;
    return out;
  }

  const UniformSeries n = drop_transient(resample_series(traj, Component::N), transient_fraction);
  const auto peaks = find_peaks(n.values, n.zeta0, n.dzeta);
  out.peak_count = peaks.size();
  if (peaks.size() < kMinPeaks) {
    std::ostringstream os;
    os << "summarize_oscillation: only " << peaks.size() << " peaks after transient removal (need "
       << kMinPeaks << ")";
    throw NumericalError(os.str());
  }
  out.period_estimate = (peaks.back().zeta - peaks.front().zeta) / static_cast<double>(peaks.size() - 1);
  for (std::size_t i = peaks.size() - kAmplitudeWindow; i < peaks.size(); ++i)
    out.amplitudes.push_back(peaks[i].value - fp.N0);
  const auto [mn, mx] = std::minmax_element(out.amplitudes.begin(), out.amplitudes.end());
  double mean_abs = 0.0;
  for (double a : out.amplitudes) mean_abs += std::abs(a);
  mean_abs /= static_cast<double>(out.amplitudes.size());
  out.amplitude_spread = mean_abs > 0.0 ? (*mx - *mn) / mean_abs : std::numeric_limits<double>::infinity();
  out.classification = out.amplitude_spread < kLimitCycleSpread ? OscillationClass::limit_cycle
                                                                : OscillationClass::aperiodic_bounded;
  return out;
}

Component parse_component(char c) {
  switch (c) {
    case 'N': return Component::N;
    case 'M': return Component::M;
    case 'P': return Component::P;
    case 'Q': return Component::Q;
    default: throw InvalidArgument(std::string("unknown component '") + c + "' (expected N, M, P or Q)");
  }
}

UniformSeries resample_series(const Trajectory& traj, Component component) {
  if (traj.empty()) throw InvalidArgument("resample_series: empty trajectory");
  UniformSeries out;
  out.dzeta = traj.options.sample_interval;
  out.zeta0 = traj.zetas.front();
  out.values.reserve(traj.size());
  for (const auto& s : traj.states) {
    switch (component) {
      case Component::N: out.values.push_back(s.N); break;
      case Component::M: out.values.push_back(s.M); break;
      case Component::P: out.values.push_back(s.P); break;
      case Component::Q: out.values.push_back(s.Q); break;
    }
  }
  return out;
}

UniformSeries drop_transient(const UniformSeries& series, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw InvalidArgument("drop_transient: fraction must lie in [0, 1)");
  const auto skip = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(series.values.size())));
  UniformSeries out;
  out.dzeta = series.dzeta;
  out.zeta0 = series.zeta0 + static_cast<double>(skip) * series.dzeta;
  out.values.assign(series.values.begin() + static_cast<std::ptrdiff_t>(skip), series.values.end());
  return out;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot write '" + path + "'");
  std::fputs("zeta,N,M,P,Q\n", f);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& s = traj.states[i];
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g\n", traj.zetas[i], s.N, s.M, s.P, s.Q);
  }
  if (std::fclose(f) != 0) throw IoError("error closing '" + path + "'");
}

std::string trajectory_metadata_json(const Trajectory& traj) {
  nlohmann::ordered_json j;
  j["termination"] = termination_name(traj.termination);
  j["zeta_star"] = traj.termination == Termination::blowup ? nlohmann::ordered_json(traj.blowup_zeta)
                                                           : nlohmann::ordered_json(nullptr);
  j["wave_speed"] = std::isfinite(traj.wave_speed) ? nlohmann::ordered_json(traj.wave_speed)
                                                   : nlohmann::ordered_json(nullptr);
  j["samples"] = traj.size();
  j["accepted_steps"] = traj.accepted_steps;
  j["rejected_steps"] = traj.rejected_steps;
  const auto& o = traj.options;
  j["zeta_start"] = o.zeta_start;
  j["zeta_end"] = o.zeta_end;
  j["sample_interval"] = o.sample_interval;
  j["rel_tol"] = o.rel_tol;
  j["abs_tol"] = o.abs_tol;
  j["max_step"] = o.max_step;
  j["blowup_threshold"] = o.blowup_threshold;
  j["initial_state"] = {o.initial_state.N, o.initial_state.M, o.initial_state.P, o.initial_state.Q};
  return j.dump(2);
}

void write_trajectory_metadata(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << trajectory_metadata_json(traj) << "\n";
}

}  // namespace wavetrain
