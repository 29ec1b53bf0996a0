#ifndef WAVETRAIN_MODEL_HPP
#define WAVETRAIN_MODEL_HPP

// Traveling-wave reduction of the two-species reaction-diffusion system.
//
// With zeta = x - v t the PDE pair becomes the first-order system
//
//   N' = M
//   M' = (-v M - N F(N) + alpha N P + eps_tilde N^2 / k) / D1
//   P' = Q
//   Q' = (-v Q + P G(P) - beta N P) / D2
//
// F (prey birth rate) is held as a rational function and G (predator death
// rate) as a polynomial so that equilibria reduce to polynomial root finding
// and both derivatives are exact.

#include "wavetrain/polynomial.hpp"

#include <Eigen/Core>

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wavetrain {

enum class SystemId { A, B, C, D, E, custom };

char system_letter(SystemId id);
/// Accepts "A".."E" (case-insensitive); throws ConfigError otherwise.
SystemId parse_system_id(std::string_view text);

enum class Param : int { alpha, beta, eps_tilde, eps, k, gamma, delta, c, d, k0, D1, D2 };
inline constexpr std::size_t kParamCount = 12;
inline constexpr std::array<Param, kParamCount> kAllParams{
    Param::alpha, Param::beta, Param::eps_tilde, Param::eps, Param::k,  Param::gamma,
    Param::delta, Param::c,    Param::d,         Param::k0,  Param::D1, Param::D2};

/// Config-file key of a parameter ("alpha", "eps_tilde", "D1", ...).
std::string_view param_name(Param p);
std::optional<Param> param_from_name(std::string_view name);

/// Scalar parameters; entries a model does not use stay absent and reading
/// them is an error.
class ParameterSet {
 public:
  bool has(Param p) const { return values_[index(p)].has_value(); }
  double get(Param p) const;
  void set(Param p, double value) { values_[index(p)] = value; }
  void clear(Param p) { values_[index(p)].reset(); }
  std::optional<double> find(Param p) const { return values_[index(p)]; }

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;

 private:
  static std::size_t index(Param p) { return static_cast<std::size_t>(p); }
  std::array<std::optional<double>, kParamCount> values_{};
};

/// (N, M, P, Q) at one value of zeta.
struct PhaseState {
  double N = 0.0;
  double M = 0.0;
  double P = 0.0;
  double Q = 0.0;

  std::array<double, 4> to_array() const { return {N, M, P, Q}; }
  static PhaseState from_array(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }
  double max_norm() const;
  bool finite() const;

  friend bool operator==(const PhaseState&, const PhaseState&) = default;
};

class ModelSpec {
 public:
  /// Library entry point for nonlinearities beyond the five presets.
  /// Requires alpha, beta, eps_tilde, D1, D2 (and k when eps_tilde != 0).
  static ModelSpec custom(RationalFunction birth_rate, Polynomial death_rate, ParameterSet params);

  SystemId system() const { return system_; }
  const ParameterSet& params() const { return params_; }
  double param(Param p) const { return params_.get(p); }

  const RationalFunction& birth_rate() const { return birth_; }
  const Polynomial& death_rate() const { return death_; }

  double F(double N) const { return birth_(N); }
  double dF(double N) const { return birth_.derivative(N); }
  double G(double P) const { return death_(P); }
  double dG(double P) const { return death_.derivative()(P); }

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double eps_tilde() const { return eps_tilde_; }
  double D1() const { return D1_; }
  double D2() const { return D2_; }
  /// eps_tilde / k, or 0 when the logistic term is switched off.
  double logistic() const { return logistic_; }

 private:
  friend ModelSpec make_preset(SystemId, const std::map<Param, double>&);
  ModelSpec(SystemId id, RationalFunction birth, Polynomial death, ParameterSet params);

  SystemId system_;
  RationalFunction birth_;
  Polynomial death_;
  ParameterSet params_;
  double alpha_, beta_, eps_tilde_, D1_, D2_, logistic_;
};

/// Parameters a preset reads (and therefore accepts as overrides).
std::vector<Param> preset_parameters(SystemId id);

/// Builds System A-E with the published parameter set, then applies overrides.
/// Overriding eps_tilde or a parameter the preset does not use is an error.
ModelSpec make_preset(SystemId id, const std::map<Param, double>& overrides = {});

/// d/dzeta of the state. Throws NumericalError on non-finite input or output.
PhaseState evaluate_rhs(const ModelSpec& spec, double v, const PhaseState& s);

struct FixedPoint {
  double N0 = 0.0;
  double M0 = 0.0;
  double P0 = 0.0;
  double Q0 = 0.0;
  /// Max norm of the right-hand side at the point.
  double residual = 0.0;
  /// Both populations strictly positive.
  bool physical = false;

  PhaseState state() const { return {N0, M0, P0, Q0}; }
};

/// Nontrivial equilibria: all real roots of the eliminated polynomial in N0
/// with residual below 1e-9, sorted by N0.
std::vector<FixedPoint> fixed_points(const ModelSpec& spec);

/// Index of the first physical point, if any.
std::optional<std::size_t> first_physical(const std::vector<FixedPoint>& points);

/// Polynomial in N0 whose real roots are the equilibrium prey densities.
Polynomial equilibrium_polynomial(const ModelSpec& spec);

using Matrix4 = Eigen::Matrix4d;

/// Analytic Jacobian of the right-hand side at an equilibrium, rows and
/// columns ordered (N, M, P, Q).
Matrix4 jacobian_at(const ModelSpec& spec, double v, const FixedPoint& fp);

}  // namespace wavetrain

#endif  // WAVETRAIN_MODEL_HPP
