#include "wavetrain/model.hpp"

#include "wavetrain/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace wavetrain {

namespace {

constexpr std::array<std::string_view, kParamCount> kParamNames{
    "alpha", "beta", "eps_tilde", "eps", "k", "gamma", "delta", "c", "d", "k0", "D1", "D2"};

void require_nonzero(const ParameterSet& params, Param p) {
  const double value = params.get(p);
  if (!std::isfinite(value) || value == 0.0)
    throw ConfigError("parameter '" + std::string(param_name(p)) + "' must be finite and nonzero");
}

struct PresetDefinition {
  std::vector<Param> used;
  ParameterSet defaults;
};

// Published parameter sets. System C has none of its own and reuses the
// System D numbers.
PresetDefinition preset_definition(SystemId id) {
  PresetDefinition def;
  auto& p = def.defaults;
  switch (id) {
    case SystemId::A:
      def.used = {Param::alpha, Param::beta, Param::eps, Param::gamma, Param::D1, Param::D2};
      p.set(Param::alpha, 1.5);
      p.set(Param::eps, 1.0);
      p.set(Param::beta, -2.75);
      p.set(Param::gamma, -1.5);
      p.set(Param::D1, 1.25);
      p.set(Param::D2, 2.1);
      break;
    case SystemId::B:
      def.used = {Param::alpha, Param::beta, Param::eps, Param::gamma,
                  Param::k,     Param::D1,   Param::D2};
      p.set(Param::alpha, -1.2);
      p.set(Param::eps, -3.0);
      p.set(Param::beta, -2.0);
      p.set(Param::gamma, -2.0);
      p.set(Param::D1, 1.0);
      p.set(Param::D2, 2.0);
      p.set(Param::k, 2.0);
      break;
    case SystemId::C:
    case SystemId::D:
      def.used = {Param::alpha, Param::beta, Param::eps, Param::c, Param::d,
                  Param::k,     Param::k0,   Param::D1,  Param::D2};
      p.set(Param::alpha, 1.25);
      p.set(Param::eps, 1.0);
      p.set(Param::beta, 2.0);
      p.set(Param::c, 0.5);
      p.set(Param::d, 2.0);
      p.set(Param::k, 2.0);
      p.set(Param::k0, 2.0);
      p.set(Param::D1, 1.0);
      p.set(Param::D2, -2.0);
      break;
    case SystemId::E:
      def.used = {Param::alpha, Param::beta, Param::gamma, Param::delta,
                  Param::k,     Param::D1,   Param::D2};
      p.set(Param::alpha, 1.7);
      p.set(Param::beta, -2.1);
      p.set(Param::gamma, -2.0);
      p.set(Param::delta, 0.6);
      p.set(Param::k, -2.0);
      p.set(Param::D1, -1.0);
      p.set(Param::D2, 2.0);
      break;
    case SystemId::custom:
      throw ConfigError("custom models have no preset definition");
  }
  return def;
}

}  // namespace

char system_letter(SystemId id) {
  switch (id) {
    case SystemId::A: return 'A';
    case SystemId::B: return 'B';
    case SystemId::C: return 'C';
    case SystemId::D: return 'D';
    case SystemId::E: return 'E';
    case SystemId::custom: return '?';
  }
  return '?';
}

SystemId parse_system_id(std::string_view text) {
  if (text.size() == 1) {
    switch (std::toupper(static_cast<unsigned char>(text[0]))) {
      case 'A': return SystemId::A;
      case 'B': return SystemId::B;
      case 'C': return SystemId::C;
      case 'D': return SystemId::D;
      case 'E': return SystemId::E;
      default: break;
    }
  }
  throw ConfigError("unknown system id '" + std::string(text) + "' (expected A, B, C, D or E)");
}

std::string_view param_name(Param p) { return kParamNames[static_cast<std::size_t>(p)]; }

std::optional<Param> param_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kParamCount; ++i)
    if (kParamNames[i] == name) return static_cast<Param>(i);
  return std::nullopt;
}

double ParameterSet::get(Param p) const {
  const auto& v = values_[index(p)];
  if (!v) throw ConfigError("parameter '" + std::string(param_name(p)) + "' is absent for this model");
  return *v;
}

double PhaseState::max_norm() const {
  return std::max({std::abs(N), std::abs(M), std::abs(P), std::abs(Q)});
}

bool PhaseState::finite() const {
  return std::isfinite(N) && std::isfinite(M) && std::isfinite(P) && std::isfinite(Q);
}

ModelSpec::ModelSpec(SystemId id, RationalFunction birth, Polynomial death, ParameterSet params)
    : system_(id), birth_(std::move(birth)), death_(std::move(death)), params_(std::move(params)) {
  for (Param p : kAllParams)
    if (auto v = params_.find(p); v && !std::isfinite(*v))
      throw ConfigError("parameter '" + std::string(param_name(p)) + "' is not finite");
  require_nonzero(params_, Param::alpha);
  require_nonzero(params_, Param::beta);
  require_nonzero(params_, Param::D1);
  require_nonzero(params_, Param::D2);
  alpha_ = params_.get(Param::alpha);
  beta_ = params_.get(Param::beta);
  D1_ = params_.get(Param::D1);
  D2_ = params_.get(Param::D2);
  eps_tilde_ = params_.get(Param::eps_tilde);
  logistic_ = 0.0;
  if (eps_tilde_ != 0.0) {
    require_nonzero(params_, Param::k);
    logistic_ = eps_tilde_ / params_.get(Param::k);
  }
  if (birth_.den.is_zero()) throw ConfigError("birth-rate denominator is identically zero");
}

ModelSpec ModelSpec::custom(RationalFunction birth_rate, Polynomial death_rate, ParameterSet params) {
  return ModelSpec(SystemId::custom, std::move(birth_rate), std::move(death_rate), std::move(params));
}

std::vector<Param> preset_parameters(SystemId id) { return preset_definition(id).used; }

ModelSpec make_preset(SystemId id, const std::map<Param, double>& overrides) {
  PresetDefinition def = preset_definition(id);
  ParameterSet params = def.defaults;
  for (const auto& [p, value] : overrides) {
    if (p == Param::eps_tilde)
      throw ConfigError(std::string("eps_tilde is fixed by the definition of System ") +
                        system_letter(id) + " and cannot be overridden");
    if (std::find(def.used.begin(), def.used.end(), p) == def.used.end())
      throw ConfigError("parameter '" + std::string(param_name(p)) + "' is not used by System " +
                        system_letter(id));
    params.set(p, value);
  }

  RationalFunction birth;
  Polynomial death;
  switch (id) {
    case SystemId::A:
    case SystemId::B:
      birth.num = Polynomial::constant(params.get(Param::eps));
      death = Polynomial::constant(params.get(Param::gamma));
      break;
    case SystemId::C:
      birth.num = Polynomial::constant(params.get(Param::k0));
      death = Polynomial{params.get(Param::d), params.get(Param::c)};
      break;
    case SystemId::D: {
      const double k0 = params.get(Param::k0);
      const double k = params.get(Param::k);
      if (k == 0.0) throw ConfigError("parameter 'k' must be nonzero");
      birth.num = Polynomial{k0, k0 / k};
      death = Polynomial{params.get(Param::d), params.get(Param::c)};
      break;
    }
    case SystemId::E: {
      const double gamma = params.get(Param::gamma);
      birth.num = Polynomial{1.0, params.get(Param::delta)};
      birth.den = Polynomial{1.0, 0.0, 1.0};
      death = Polynomial{gamma, 0.0, gamma * params.get(Param::k)};
      break;
    }
    case SystemId::custom:
      throw ConfigError("custom models have no preset definition");
  }

  const bool logistic = id == SystemId::B || id == SystemId::C || id == SystemId::D;
  params.set(Param::eps_tilde, logistic ? params.get(Param::eps) : 0.0);
  return ModelSpec(id, std::move(birth), std::move(death), std::move(params));
}

PhaseState evaluate_rhs(const ModelSpec& spec, double v, const PhaseState& s) {
  if (!s.finite() || !std::isfinite(v)) throw NumericalError("evaluate_rhs: non-finite input state");
  const double prey = -v * s.M - s.N * spec.F(s.N) + spec.alpha() * s.N * s.P +
                      spec.logistic() * s.N * s.N;
  const double pred = -v * s.Q + s.P * spec.G(s.P) - spec.beta() * s.N * s.P;
  PhaseState out{s.M, prey / spec.D1(), s.Q, pred / spec.D2()};
  if (!out.finite()) throw NumericalError("evaluate_rhs: non-finite derivative (overflow)");
  return out;
}

Polynomial equilibrium_polynomial(const ModelSpec& spec) {
  // P0(N) = (F(N) - lc N) / alpha = num(N) / (alpha den(N)); substitute into
  // beta N - G(P0) = 0 and clear the denominator (alpha den)^m.
  const Polynomial& fn = spec.birth_rate().num;
  const Polynomial& fd = spec.birth_rate().den;
  const Polynomial pnum = fn - Polynomial{0.0, spec.logistic()} * fd;
  const Polynomial pden = fd * spec.alpha();
  const Polynomial& g = spec.death_rate();
  const int m = std::max(g.degree(), 0);

  Polynomial result = Polynomial{0.0, spec.beta()} * pden.pow(m);
  for (int j = 0; j <= g.degree(); ++j)
    result = result - pnum.pow(j) * pden.pow(m - j) * g.coeff(j);
  return result;
}

namespace {

double prey_equilibrium_predator(const ModelSpec& spec, double N) {
  return (spec.F(N) - spec.logistic() * N) / spec.alpha();
}

double equilibrium_residual(const ModelSpec& spec, double N0, double P0) {
  const PhaseState f = evaluate_rhs(spec, 0.0, {N0, 0.0, P0, 0.0});
  return f.max_norm();
}

// Newton polish of beta N - G(P0(N)) = 0 starting from a companion-matrix root.
double polish_root(const ModelSpec& spec, double N) {
  double best = N;
  double best_res = std::abs(spec.beta() * N - spec.G(prey_equilibrium_predator(spec, N)));
  for (int it = 0; it < 8; ++it) {
    const double P = prey_equilibrium_predator(spec, N);
    const double r = spec.beta() * N - spec.G(P);
    const double dP = (spec.dF(N) - spec.logistic()) / spec.alpha();
    const double dr = spec.beta() - spec.dG(P) * dP;
    if (dr == 0.0 || !std::isfinite(dr)) break;
    N -= r / dr;
    if (!std::isfinite(N)) break;
    const double res = std::abs(spec.beta() * N - spec.G(prey_equilibrium_predator(spec, N)));
    if (res < best_res) {
      best = N;
      best_res = res;
    }
    if (res == 0.0) break;
  }
  return best;
}

}  // namespace

std::vector<FixedPoint> fixed_points(const ModelSpec& spec) {
  const Polynomial poly = equilibrium_polynomial(spec);
  if (poly.is_zero())
    throw NumericalError("equilibrium polynomial vanishes identically (continuum of equilibria)");

  std::vector<FixedPoint> out;
  for (const auto& root : poly.roots()) {
    if (std::abs(root.imag()) >= 1e-8 * std::max(1.0, std::abs(root.real()))) continue;
    const double N0 = polish_root(spec, root.real());
    if (spec.birth_rate().den(N0) == 0.0) continue;
    const double P0 = prey_equilibrium_predator(spec, N0);
    if (!std::isfinite(P0)) continue;
    double residual;
    try {
      residual = equilibrium_residual(spec, N0, P0);
    } catch (const NumericalError&) {
      continue;
    }
    if (residual >= 1e-9) continue;
    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const FixedPoint& fp) {
      return std::abs(fp.N0 - N0) <= 1e-10 * std::max(1.0, std::abs(N0));
    });
    if (duplicate) continue;
    FixedPoint fp;
    fp.N0 = N0;
    fp.P0 = P0;
    fp.residual = residual;
    fp.physical = N0 > 0.0 && P0 > 0.0;
    out.push_back(fp);
  }
  std::sort(out.begin(), out.end(), [](const FixedPoint& a, const FixedPoint& b) { return a.N0 < b.N0; });
  return out;
}

std::optional<std::size_t> first_physical(const std::vector<FixedPoint>& points) {
  for (std::size_t i = 0; i < points.size(); ++i)
    if (points[i].physical) return i;
  return std::nullopt;
}

Matrix4 jacobian_at(const ModelSpec& spec, double v, const FixedPoint& fp) {
  if (!(fp.residual < 1e-6)) {
    std::ostringstream os;
    os << "jacobian_at: point is not an equilibrium (residual " << fp.residual << ")";
    throw InvalidArgument(os.str());
  }
  const double N0 = fp.N0;
  const double P0 = fp.P0;
  const double D1 = spec.D1();
  const double D2 = spec.D2();
  Matrix4 J = Matrix4::Zero();
  J(0, 1) = 1.0;
  J(1, 0) = (spec.alpha() * P0 + 2.0 * spec.logistic() * N0 - spec.F(N0) - N0 * spec.dF(N0)) / D1;
  J(1, 1) = -v / D1;
  J(1, 2) = spec.alpha() * N0 / D1;
  J(2, 3) = 1.0;
  J(3, 0) = -spec.beta() * P0 / D2;
  J(3, 2) = (-spec.beta() * N0 + spec.G(P0) + P0 * spec.dG(P0)) / D2;
  J(3, 3) = -v / D2;
  return J;
}

}  // namespace wavetrain
