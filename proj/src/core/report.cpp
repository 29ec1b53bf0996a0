#include "wavetrain/report.hpp"

#include "wavetrain/config.hpp"
#include "wavetrain/error.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace wavetrain {

using json = nlohmann::ordered_json;

std::size_t select_fixed_point(const std::vector<FixedPoint>& points, std::optional<std::size_t> index) {
  auto listing = [&] {
    std::ostringstream os;
    if (points.empty()) os << " (no real roots)";
    for (std::size_t i = 0; i < points.size(); ++i)
      os << "\n  [" << i << "] N0 = " << format_double(points[i].N0) << ", P0 = " << format_double(points[i].P0)
         << (points[i].physical ? " (physical)" : "");
    return os.str();
  };
  if (index) {
    if (*index >= points.size()) {
      std::ostringstream os;
      os << "fixed point index " << *index << " out of range; roots:" << listing();
      throw NoPhysicalFixedPoint(os.str());
    }
    return *index;
  }
  if (auto i = first_physical(points)) return *i;
  throw NoPhysicalFixedPoint("no physical fixed point (N0 > 0, P0 > 0); roots:" + listing());
}

int AnalysisReport::transversality_sign() const {
  if (!transversality_rate) return 0;
  return (*transversality_rate > 0.0) - (*transversality_rate < 0.0);
}

namespace {

bool same(const FixedPoint& a, const FixedPoint& b) {
  return a.N0 == b.N0 && a.M0 == b.M0 && a.P0 == b.P0 && a.Q0 == b.Q0 && a.residual == b.residual &&
         a.physical == b.physical;
}

template <class T, class Eq>
bool same_opt(const std::optional<T>& a, const std::optional<T>& b, Eq eq) {
  if (a.has_value() != b.has_value()) return false;
  return !a || eq(*a, *b);
}

}  // namespace

bool operator==(const AnalysisReport& a, const AnalysisReport& b) {
  if (a.fixed_points.size() != b.fixed_points.size()) return false;
  for (std::size_t i = 0; i < a.fixed_points.size(); ++i)
    if (!same(a.fixed_points[i], b.fixed_points[i])) return false;
  auto eq = [](const auto& x, const auto& y) { return x == y; };
  return a.system == b.system && a.v == b.v && a.fp_index == b.fp_index && a.coeffs == b.coeffs &&
         a.routh_hurwitz == b.routh_hurwitz && a.eigenvalues == b.eigenvalues &&
         a.volume.rate == b.volume.rate && a.volume.behaviour == b.volume.behaviour && a.A == b.A && a.B == b.B &&
         same_opt(a.speeds, b.speeds,
                  [](const CriticalSpeeds& x, const CriticalSpeeds& y) {
                    return x.v_minus == y.v_minus && x.v_plus == y.v_plus;
                  }) &&
         a.regime == b.regime && a.regime_description == b.regime_description && a.omega == b.omega &&
         same_opt(a.degenerate, b.degenerate,
                  [](const DegenerateFrequency& x, const DegenerateFrequency& y) {
                    return x.operational == y.operational && x.quartic_root == y.quartic_root;
                  }) &&
         same_opt(a.critical_coeffs, b.critical_coeffs, eq) &&
         same_opt(a.critical_coeffs_minus, b.critical_coeffs_minus, eq) &&
         a.transversality_rate == b.transversality_rate;
}

AnalysisReport analyze(const ModelSpec& spec, double v, std::optional<std::size_t> fp_index) {
  if (!std::isfinite(v)) throw InvalidArgument("analyze: wave speed must be finite");
  AnalysisReport r;
  r.system = spec.system() == SystemId::custom ? "custom" : std::string(1, system_letter(spec.system()));
  r.v = v;
  r.fixed_points = fixed_points(spec);
  r.fp_index = select_fixed_point(r.fixed_points, fp_index);
  const FixedPoint& fp = r.fixed_points[r.fp_index];

  r.coeffs = char_coeffs_at(spec, v, fp);
  r.routh_hurwitz = routh_hurwitz(r.coeffs);
  const auto roots = quartic_roots(r.coeffs).roots;
  r.eigenvalues.assign(roots.begin(), roots.end());
  r.volume = volume_rate(r.coeffs.b1);

  const HopfAnalysis h = analyze_hopf(spec, fp);
  r.A = h.A;
  r.B = h.B;
  r.speeds = h.speeds;
  r.regime = h.regime;
  r.regime_description = describe_regime(h.regime, h.speeds);
  r.omega = h.omega;
  r.degenerate = h.degenerate;
  r.critical_coeffs = h.critical_coeffs;
  r.critical_coeffs_minus = h.critical_coeffs_minus;
  r.transversality_rate = h.transversality_rate;
  return r;
}

namespace {

json coeffs_json(const CharCoeffs& b) { return json::array({b.b1, b.b2, b.b3, b.b4}); }

CharCoeffs coeffs_from(const json& j) {
  if (!j.is_array() || j.size() != 4) throw ConfigError("report: coefficient list must have 4 entries");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

template <class T, class F>
json opt_json(const std::optional<T>& x, F f) {
  return x ? f(*x) : json(nullptr);
}

Regime regime_from(const std::string& s) {
  if (s == "a") return Regime::a;
  if (s == "b") return Regime::b;
  if (s == "c") return Regime::c;
  if (s == "d") return Regime::d;
  if (s == "-") return Regime::degenerate;
  throw ConfigError("report: unknown regime '" + s + "'");
}

VolumeBehaviour behaviour_from(const std::string& s) {
  for (auto b : {VolumeBehaviour::contracting, VolumeBehaviour::conservative, VolumeBehaviour::dilatory})
    if (volume_behaviour_name(b) == s) return b;
  throw ConfigError("report: unknown volume behaviour '" + s + "'");
}

}  // namespace

std::string report_to_json(const AnalysisReport& r) {
  json j;
  j["system"] = r.system;
  j["v"] = r.v;
  json fps = json::array();
  for (const auto& fp : r.fixed_points)
    fps.push_back({{"N0", fp.N0}, {"M0", fp.M0}, {"P0", fp.P0}, {"Q0", fp.Q0}, {"residual", fp.residual},
                   {"physical", fp.physical}});
  j["fixed_points"] = fps;
  j["fp_index"] = r.fp_index;
  j["coeffs"] = coeffs_json(r.coeffs);
  json rh;
  rh["quantities"] = r.routh_hurwitz.quantities;
  rh["satisfied"] = r.routh_hurwitz.satisfied;
  rh["stable"] = r.routh_hurwitz.stable;
  j["routh_hurwitz"] = rh;
  json eig = json::array();
  for (const auto& e : r.eigenvalues) eig.push_back(json::array({e.real(), e.imag()}));
  j["eigenvalues"] = eig;
  j["volume"] = {{"rate", r.volume.rate}, {"behaviour", volume_behaviour_name(r.volume.behaviour)}};
  json hopf;
  hopf["A"] = r.A;
  hopf["B"] = r.B;
  hopf["critical_speeds"] =
      opt_json(r.speeds, [](const CriticalSpeeds& s) { return json::array({s.v_minus, s.v_plus}); });
  hopf["regime"] = std::string(1, regime_letter(r.regime));
  hopf["regime_description"] = r.regime_description;
  hopf["omega"] = opt_json(r.omega, [](double w) { return json(w); });
  hopf["degenerate_frequency"] = opt_json(r.degenerate, [](const DegenerateFrequency& d) {
    return json{{"operational", d.operational}, {"quartic_root", d.quartic_root}};
  });
  hopf["critical_coeffs"] = opt_json(r.critical_coeffs, coeffs_json);
  hopf["critical_coeffs_minus"] = opt_json(r.critical_coeffs_minus, coeffs_json);
  hopf["transversality_rate"] = opt_json(r.transversality_rate, [](double x) { return json(x); });
  hopf["transversality_sign"] = r.transversality_sign();
  j["hopf"] = hopf;
  return j.dump(2);
}

AnalysisReport report_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    AnalysisReport r;
    r.system = j.at("system").get<std::string>();
    r.v = j.at("v").get<double>();
    for (const auto& f : j.at("fixed_points")) {
      FixedPoint fp;
      fp.N0 = f.at("N0").get<double>();
      fp.M0 = f.at("M0").get<double>();
      fp.P0 = f.at("P0").get<double>();
      fp.Q0 = f.at("Q0").get<double>();
      fp.residual = f.at("residual").get<double>();
      fp.physical = f.at("physical").get<bool>();
      r.fixed_points.push_back(fp);
    }
    r.fp_index = j.at("fp_index").get<std::size_t>();
    if (r.fp_index >= r.fixed_points.size()) throw ConfigError("report: fp_index out of range");
    r.coeffs = coeffs_from(j.at("coeffs"));
    const json& rh = j.at("routh_hurwitz");
    r.routh_hurwitz.quantities = rh.at("quantities").get<std::array<double, 4>>();
    r.routh_hurwitz.satisfied = rh.at("satisfied").get<std::array<bool, 4>>();
    r.routh_hurwitz.stable = rh.at("stable").get<bool>();
    for (const auto& e : j.at("eigenvalues")) r.eigenvalues.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
    r.volume.rate = j.at("volume").at("rate").get<double>();
    r.volume.behaviour = behaviour_from(j.at("volume").at("behaviour").get<std::string>());

    const json& h = j.at("hopf");
    r.A = h.at("A").get<double>();
    r.B = h.at("B").get<double>();
    if (!h.at("critical_speeds").is_null())
      r.speeds = CriticalSpeeds{h["critical_speeds"].at(0).get<double>(), h["critical_speeds"].at(1).get<double>()};
    r.regime = regime_from(h.at("regime").get<std::string>());
    r.regime_description = h.at("regime_description").get<std::string>();
    if (!h.at("omega").is_null()) r.omega = h["omega"].get<double>();
    if (!h.at("degenerate_frequency").is_null())
      r.degenerate = DegenerateFrequency{h["degenerate_frequency"].at("operational").get<double>(),
                                         h["degenerate_frequency"].at("quartic_root").get<double>()};
    if (!h.at("critical_coeffs").is_null()) r.critical_coeffs = coeffs_from(h["critical_coeffs"]);
    if (!h.at("critical_coeffs_minus").is_null()) r.critical_coeffs_minus = coeffs_from(h["critical_coeffs_minus"]);
    if (!h.at("transversality_rate").is_null()) r.transversality_rate = h["transversality_rate"].get<double>();
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("report: malformed document: ") + e.what());
  }
}

namespace {

std::string join(const CharCoeffs& b) {
  return format_double(b.b1) + ", " + format_double(b.b2) + ", " + format_double(b.b3) + ", " + format_double(b.b4);
}

std::string complex_text(std::complex<double> z) {
  std::ostringstream os;
  os << format_double(z.real()) << (std::signbit(z.imag()) ? " - " : " + ") << format_double(std::abs(z.imag())) << "i";
  return os.str();
}

}  // namespace

std::string report_to_text(const AnalysisReport& r) {
  std::ostringstream os;
  os << "system = " << r.system << "\n";
  os << "v = " << format_double(r.v) << "\n";
  for (std::size_t i = 0; i < r.fixed_points.size(); ++i) {
    const auto& fp = r.fixed_points[i];
    os << "fixed_point[" << i << "] = (" << format_double(fp.N0) << ", 0, " << format_double(fp.P0) << ", 0)"
       << (fp.physical ? " physical" : "") << (i == r.fp_index ? " selected" : "") << "\n";
  }
  os << "b1..b4 = " << join(r.coeffs) << "\n";
  static const char* labels[] = {"b1 > 0", "b4 > 0", "b1 b2 - b3 > 0", "b1 (b2 b3 - b1 b4) - b3^2 > 0"};
  for (std::size_t i = 0; i < 4; ++i)
    os << "routh_hurwitz[" << labels[i] << "] = " << format_double(r.routh_hurwitz.quantities[i])
       << (r.routh_hurwitz.satisfied[i] ? " satisfied" : " violated") << "\n";
  os << "stable = " << (r.routh_hurwitz.stable ? "yes" : "no") << "\n";
  os << "eigenvalues = ";
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) os << (i ? "; " : "") << complex_text(r.eigenvalues[i]);
  os << "\n";
  os << "volume_rate = " << format_double(r.volume.rate) << " (" << volume_behaviour_name(r.volume.behaviour) << ")\n";
  os << "hopf_A = " << format_double(r.A) << "\n";
  os << "hopf_B = " << format_double(r.B) << "\n";
  if (r.speeds)
    os << "critical_speeds = " << format_double(r.speeds->v_minus) << ", " << format_double(r.speeds->v_plus) << "\n";
  else
    os << "critical_speeds = none\n";
  os << "regime = " << regime_letter(r.regime) << " (" << r.regime_description << ")\n";
  if (r.critical_coeffs) os << "b1..b4 at v_plus = " << join(*r.critical_coeffs) << "\n";
  if (r.critical_coeffs_minus) os << "b1..b4 at v_minus = " << join(*r.critical_coeffs_minus) << "\n";
  if (r.omega) os << "omega = " << format_double(*r.omega) << "\n";
  if (r.degenerate) {
    os << "degenerate_hopf = zero critical speed, quartic lambda^4 + b4\n";
    os << "omega_operational = " << format_double(r.degenerate->operational) << " (sqrt(-b4))\n";
    os << "omega_quartic_root = " << format_double(r.degenerate->quartic_root) << " ((-b4)^(1/4))\n";
  }
  if (r.transversality_rate)
    os << "transversality_rate = " << format_double(*r.transversality_rate) << " (sign "
       << (r.transversality_sign() > 0 ? "+" : r.transversality_sign() < 0 ? "-" : "0") << ")\n";
  else if (r.speeds && !r.degenerate)
    os << "transversality_rate = unavailable (no imaginary pair at v_plus)\n";
  return os.str();
}

}  // namespace wavetrain
