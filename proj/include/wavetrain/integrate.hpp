#ifndef WAVETRAIN_INTEGRATE_HPP
#define WAVETRAIN_INTEGRATE_HPP

#include "wavetrain/model.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace wavetrain {

struct IntegrationOptions {
  double zeta_start = 0.0;
  double zeta_end = 300.0;
  PhaseState initial_state{};
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  /// Upper bound on the step; keep it >= sample_interval.
  double max_step = 1.0;
  /// Integration stops with blow-up once the max-norm of the state exceeds this.
  double blowup_threshold = 1e6;
  /// Spacing of the uniform output grid.
  double sample_interval = 0.05;

  /// Throws InvalidArgument when the options are inconsistent.
  void validate() const;
};

/// Perturbation added to an equilibrium when no initial state is given.
inline constexpr PhaseState kDefaultPerturbation{1e-2, 0.0, 1e-2, 0.0};

PhaseState default_initial_state(const FixedPoint& fp);

enum class Termination { completed, blowup };
std::string_view termination_name(Termination t);

struct Trajectory {
  /// zeta_start + i * sample_interval.
  std::vector<double> zetas;
  std::vector<PhaseState> states;
  Termination termination = Termination::completed;
  /// Threshold-crossing location, bracketed to 1e-3; NaN unless blow-up.
  double blowup_zeta = std::numeric_limits<double>::quiet_NaN();
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  IntegrationOptions options;
  /// Wave speed used, NaN for generic systems.
  double wave_speed = std::numeric_limits<double>::quiet_NaN();

  std::size_t size() const { return zetas.size(); }
  bool empty() const { return zetas.empty(); }
};

using StateVector = std::array<double, 4>;
/// Right-hand side of a 4D autonomous or non-autonomous system. May throw
/// NumericalError on overflow; the integrator treats that as a failed step.
using SystemRhs = std::function<StateVector(double zeta, const StateVector& y)>;

/// Dormand-Prince 5(4) with proportional step control and 4th-order dense
/// output onto the uniform sample grid. Throws IntegrationError when the
/// step size underflows 1e-12 * span.
Trajectory integrate_system(const SystemRhs& rhs, const IntegrationOptions& opts);

/// The traveling-wave ODE at wave speed v.
Trajectory integrate(const ModelSpec& spec, double v, const IntegrationOptions& opts);

enum class OscillationClass { decay_to_fixed_point, limit_cycle, aperiodic_bounded, blowup };
std::string_view oscillation_class_name(OscillationClass c);

struct Peak {
  double zeta = 0.0;
  double value = 0.0;
};

/// Strict 3-point local maxima with parabolic refinement of location and height.
std::vector<Peak> find_peaks(const std::vector<double>& values, double zeta0, double dzeta);

struct OscillationSummary {
  OscillationClass classification = OscillationClass::aperiodic_bounded;
  /// Last (up to) 10 peak heights of N minus the reference N0.
  std::vector<double> amplitudes;
  /// (max - min) / mean |amplitude| over those peaks.
  double amplitude_spread = std::numeric_limits<double>::quiet_NaN();
  /// Mean peak-to-peak spacing in zeta after transient removal.
  double period_estimate = std::numeric_limits<double>::quiet_NaN();
  std::size_t peak_count = 0;
  /// Euclidean distance to the reference point at the first and last sample.
  double initial_distance = 0.0;
  double final_distance = 0.0;
  PhaseState final_state{};
};

inline constexpr std::size_t kMinPeaks = 12;
inline constexpr std::size_t kAmplitudeWindow = 10;
inline constexpr double kLimitCycleSpread = 0.01;
inline constexpr double kDecayRatio = 1e-4;

/// Classifies a trajectory against a reference equilibrium. Blow-up first,
/// then decay (final distance < 1e-4 of initial), then limit cycle (last-10
/// peak spread < 1%), else aperiodic_bounded. Throws NumericalError when
/// peak statistics are needed but fewer than 12 peaks remain.
OscillationSummary summarize_oscillation(const Trajectory& traj, const FixedPoint& fp,
                                         double transient_fraction);

enum class Component { N, M, P, Q };
Component parse_component(char c);

struct UniformSeries {
  std::vector<double> values;
  double dzeta = 0.0;
  double zeta0 = 0.0;
};

UniformSeries resample_series(const Trajectory& traj, Component component);

/// Drops the leading fraction of a series, keeping the grid consistent.
UniformSeries drop_transient(const UniformSeries& series, double fraction);

/// `zeta,N,M,P,Q` rows with 17 significant digits.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);
std::string trajectory_metadata_json(const Trajectory& traj);
void write_trajectory_metadata(const Trajectory& traj, const std::string& path);

}  // namespace wavetrain

#endif  // WAVETRAIN_INTEGRATE_HPP
