// wavetrain: command-line front end over the C API.
//
// Exit codes: 0 success, 1 configuration/usage error, 2 no physical fixed
// point, 3 integrator failure, 4 diagnostics precondition.

#include "svg.hpp"

#include <wavetrain/wavetrain.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct CliError {
  int code;
  std::string message;
};

int exit_code_for(wt_status s) {
  switch (s) {
    case WT_ERR_NO_PHYSICAL_FIXED_POINT: return 2;
    case WT_ERR_INTEGRATION: return 3;
    case WT_ERR_DIAGNOSTICS: return 4;
    default: return 1;
  }
}

void check(wt_status s) {
  if (s != WT_OK) throw CliError{exit_code_for(s), wt_last_error()};
}

[[noreturn]] void usage_error(const std::string& msg) { throw CliError{1, msg}; }

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Config = std::unique_ptr<wt_config, Deleter<wt_config, wt_config_free>>;
using Model = std::unique_ptr<wt_model, Deleter<wt_model, wt_model_free>>;
using Report = std::unique_ptr<wt_report, Deleter<wt_report, wt_report_free>>;
using Traj = std::unique_ptr<wt_trajectory, Deleter<wt_trajectory, wt_trajectory_free>>;
using Spectrum = std::unique_ptr<wt_spectrum, Deleter<wt_spectrum, wt_spectrum_free>>;
using Fractal = std::unique_ptr<wt_fractal, Deleter<wt_fractal, wt_fractal_free>>;

std::string take_string(char* s) {
  std::string out = s ? s : "";
  wt_string_free(s);
  return out;
}

double parse_number(const std::string& text, const std::string& what) {
  double x = 0.0;
  const char* b = text.data();
  const char* e = b + text.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && e[-1] == ' ') --e;
  if (b < e && *b == '+') ++b;
  const auto [ptr, ec] = std::from_chars(b, e, x);
  if (ec != std::errc() || ptr != e || !std::isfinite(x)) usage_error("malformed number '" + text + "' in " + what);
  return x;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

struct Options {
  std::string preset;
  std::string config_path;
  std::vector<std::string> params;
  std::optional<double> v;
  std::string v_range;
  std::string span;
  std::string ic;
  std::optional<double> rel_tol, abs_tol, sample_interval, max_step, transient;
  std::string out_dir = ".";
  std::string formats;
  std::optional<int> embed_dim;
  std::optional<int> fp_index;
  unsigned jobs = 0;
  bool simulate = false;
};

// Settings after merging the config file's run keys under the flags.
struct Run {
  Model model;
  Config config;
  std::set<std::string> formats;
  int fp_index = -1;
  size_t fp = 0;
  wt_integration_options integration{};
  double transient = 0.2;
  int embed_dim = 3;
};

std::optional<std::string> config_value(const Config& cfg, const std::string& key) {
  if (!cfg) return std::nullopt;
  char* value = nullptr;
  int found = 0;
  check(wt_config_get(cfg.get(), key.c_str(), &value, &found));
  if (!found) return std::nullopt;
  return take_string(value);
}

std::optional<double> config_double(const Config& cfg, const std::string& key) {
  const auto s = config_value(cfg, key);
  if (!s) return std::nullopt;
  return parse_number(*s, "config key '" + key + "'");
}

template <class T>
std::optional<T> pick(const std::optional<T>& flag, const std::optional<T>& file) {
  return flag ? flag : file;
}

std::string pick(const std::string& flag, const std::optional<std::string>& file) {
  return !flag.empty() ? flag : file.value_or("");
}

std::set<std::string> parse_formats(const std::string& text, const std::string& fallback) {
  static const std::set<std::string> known{"text", "structured", "csv", "svg"};
  std::set<std::string> out;
  for (const auto& f : split(text.empty() ? fallback : text, ',')) {
    if (!known.count(f)) usage_error("unknown format '" + f + "' (expected text, structured, csv, svg)");
    out.insert(f);
  }
  return out;
}

std::pair<double, double> parse_span(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() != 2) usage_error("--span expects A:B, got '" + s + "'");
  const double a = parse_number(parts[0], "--span"), b = parse_number(parts[1], "--span");
  if (!(b > a)) usage_error("--span end must exceed start");
  return {a, b};
}

struct VRange {
  double lo, hi;
  int count;
};

VRange parse_v_range(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() != 3) usage_error("--v-range expects MIN:MAX:COUNT, got '" + s + "'");
  const double lo = parse_number(parts[0], "--v-range"), hi = parse_number(parts[1], "--v-range");
  const double c = parse_number(parts[2], "--v-range");
  if (c < 1 || c != std::floor(c) || c > 1e6) usage_error("--v-range COUNT must be a positive integer");
  if (hi < lo) usage_error("--v-range MAX must not be below MIN");
  if (c == 1 && hi != lo) usage_error("--v-range with COUNT 1 needs MIN = MAX");
  return {lo, hi, static_cast<int>(c)};
}

wt_state parse_ic(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 4) usage_error("--ic expects N,M,P,Q");
  return {parse_number(parts[0], "--ic"), parse_number(parts[1], "--ic"), parse_number(parts[2], "--ic"),
          parse_number(parts[3], "--ic")};
}

Run resolve(const Options& o, const std::string& default_formats, double default_span_end) {
  Run run;
  if (!o.preset.empty() && !o.config_path.empty()) usage_error("give either --preset or --config, not both");
  if (o.preset.empty() && o.config_path.empty()) usage_error("a model source is required (--preset or --config)");

  wt_model* m = nullptr;
  if (!o.preset.empty()) {
    if (o.preset.size() != 1) usage_error("--preset expects one of A, B, C, D, E");
    check(wt_model_preset(o.preset[0], &m));
  } else {
    wt_config* c = nullptr;
    check(wt_config_load(o.config_path.c_str(), &c));
    run.config.reset(c);
    check(wt_model_from_config(run.config.get(), &m));
  }
  run.model.reset(m);
  for (const auto& p : o.params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) usage_error("--param expects NAME=VALUE, got '" + p + "'");
    check(wt_model_set_param(run.model.get(), p.substr(0, eq).c_str(), parse_number(p.substr(eq + 1), "--param")));
  }

  run.formats = parse_formats(pick(o.formats, config_value(run.config, "format")), default_formats);

  const auto fp_file = config_double(run.config, "fp_index");
  if (o.fp_index) {
    if (*o.fp_index < 0) usage_error("--fp-index must be non-negative");
    run.fp_index = *o.fp_index;
  } else if (fp_file) {
    if (*fp_file < 0 || *fp_file != std::floor(*fp_file)) usage_error("fp_index must be a non-negative integer");
    run.fp_index = static_cast<int>(*fp_file);
  }
  check(wt_select_fixed_point(run.model.get(), run.fp_index, &run.fp));

  wt_integration_options_default(&run.integration);
  run.integration.zeta_end = default_span_end;
  const std::string span = pick(o.span, config_value(run.config, "span"));
  if (!span.empty()) std::tie(run.integration.zeta_start, run.integration.zeta_end) = parse_span(span);
  const std::string ic = pick(o.ic, config_value(run.config, "ic"));
  if (!ic.empty()) {
    run.integration.has_initial_state = 1;
    run.integration.initial_state = parse_ic(ic);
  }
  if (auto x = pick(o.rel_tol, config_double(run.config, "rel_tol"))) run.integration.rel_tol = *x;
  if (auto x = pick(o.abs_tol, config_double(run.config, "abs_tol"))) run.integration.abs_tol = *x;
  if (auto x = pick(o.sample_interval, config_double(run.config, "sample_interval"))) run.integration.sample_interval = *x;
  if (auto x = pick(o.max_step, config_double(run.config, "max_step"))) run.integration.max_step = *x;
  if (auto x = pick(o.transient, config_double(run.config, "transient"))) run.transient = *x;
  if (!(run.transient >= 0.0 && run.transient <= 0.9)) usage_error("transient fraction must lie in [0, 0.9]");

  std::optional<int> embed = o.embed_dim;
  if (!embed)
    if (auto x = config_double(run.config, "embed_dim")) embed = static_cast<int>(*x);
  if (embed) run.embed_dim = *embed;
  if (run.embed_dim < 2 || run.embed_dim > 4) usage_error("--embed-dim must be 2, 3 or 4");
  return run;
}

double resolve_v(const Options& o, const Run& run) {
  if (auto v = pick(o.v, config_double(run.config, "v"))) return *v;
  usage_error("a wave speed is required (--v)");
}

fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) usage_error("cannot create output directory '" + dir + "'");
  const fs::path probe = fs::path(dir) / ".wavetrain_write_probe";
  {
    std::ofstream f(probe);
    if (!f) usage_error("output directory '" + dir + "' is not writable");
  }
  fs::remove(probe, ec);
  return fs::path(dir);
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) usage_error("cannot write '" + path.string() + "'");
  out << content;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

void save_svg(const wtcli::Plot& plot, const fs::path& path, std::vector<std::string>& written) {
  try {
    wtcli::write_svg(plot, path.string());
  } catch (const std::exception& e) {
    usage_error(e.what());
  }
  written.push_back(path.string());
}

// ---- presets ----

int cmd_presets() {
  for (char id : {'A', 'B', 'C', 'D', 'E'}) {
    wt_model* m = nullptr;
    check(wt_model_preset(id, &m));
    Model model(m);
    char* text = nullptr;
    check(wt_model_to_config_text(model.get(), &text));
    std::cout << take_string(text) << "\n";
  }
  return 0;
}

// ---- analyze ----

int cmd_analyze(const Options& o) {
  Run run = resolve(o, "text", 300.0);
  const double v = resolve_v(o, run);
  wt_report* r = nullptr;
  check(wt_analyze(run.model.get(), v, run.fp_index, &r));
  Report report(r);

  const bool to_dir = !o.out_dir.empty() && o.out_dir != ".";
  if (run.formats.count("text")) {
    char* text = nullptr;
    check(wt_report_text(report.get(), &text));
    std::cout << take_string(text);
  }
  if (run.formats.count("structured")) {
    char* text = nullptr;
    check(wt_report_json(report.get(), &text));
    const std::string doc = take_string(text) + "\n";
    if (to_dir) {
      const fs::path dir = prepare_out_dir(o.out_dir);
      write_text_file(dir / "analysis.json", doc);
    } else {
      std::cout << doc;
    }
  }
  return 0;
}

// ---- simulate ----

struct Series {
  std::vector<double> values;
  double dzeta = 0.0;
};

Series component(const wt_trajectory* t, char c) {
  Series s;
  size_t count = 0;
  check(wt_trajectory_component(t, c, nullptr, 0, &count, &s.dzeta));
  s.values.resize(count);
  check(wt_trajectory_component(t, c, s.values.data(), count, &count, &s.dzeta));
  return s;
}

std::vector<double> zetas(const wt_trajectory* t) {
  std::vector<double> z(wt_trajectory_size(t));
  wt_state s;
  for (size_t i = 0; i < z.size(); ++i) check(wt_trajectory_sample(t, i, &z[i], &s));
  return z;
}

json oscillation_json(const std::optional<wt_oscillation>& osc, const std::string& note) {
  json j;
  if (!osc) {
    j["classification"] = nullptr;
    j["note"] = note;
    return j;
  }
  j["classification"] = wt_oscillation_class_name(osc->classification);
  if (osc->classification == WT_LIMIT_CYCLE || osc->classification == WT_APERIODIC_BOUNDED) {
    j["amplitudes"] = std::vector<double>(osc->amplitudes, osc->amplitudes + osc->amplitude_count);
    j["amplitude_spread"] = osc->amplitude_spread;
    j["period_estimate"] = osc->period_estimate;
    j["peak_count"] = osc->peak_count;
  }
  j["initial_distance"] = osc->initial_distance;
  j["final_distance"] = osc->final_distance;
  j["final_state"] = {osc->final_state.N, osc->final_state.M, osc->final_state.P, osc->final_state.Q};
  return j;
}

int cmd_simulate(const Options& o) {
  Run run = resolve(o, "text,csv", 300.0);
  const double v = resolve_v(o, run);
  const fs::path dir = prepare_out_dir(o.out_dir);

  wt_trajectory* t = nullptr;
  check(wt_integrate(run.model.get(), v, run.fp, &run.integration, &t));
  Traj traj(t);

  std::optional<wt_oscillation> osc;
  std::string note;
  wt_oscillation summary;
  if (wt_summarize_oscillation(traj.get(), run.model.get(), run.fp, run.transient, &summary) == WT_OK)
    osc = summary;
  else
    note = wt_last_error();

  double zeta_star = 0.0;
  const bool blowup = wt_trajectory_blowup(traj.get(), &zeta_star);
  size_t accepted = 0, rejected = 0;
  wt_trajectory_steps(traj.get(), &accepted, &rejected);

  std::vector<std::string> written;
  if (run.formats.count("csv")) {
    check(wt_trajectory_write_csv(traj.get(), (dir / "trajectory.csv").string().c_str()));
    check(wt_trajectory_write_metadata(traj.get(), (dir / "trajectory.meta.json").string().c_str()));
    written.push_back((dir / "trajectory.csv").string());
    written.push_back((dir / "trajectory.meta.json").string());
  }
  if (run.formats.count("svg")) {
    const auto z = zetas(traj.get());
    wtcli::Plot plot;
    plot.title = "System " + std::string(1, wt_model_system(run.model.get())) + ", v = " + fmt(v);
    plot.x_label = "zeta";
    plot.y_label = "population";
    plot.series.push_back({"N", z, component(traj.get(), 'N').values, "#1f77b4"});
    plot.series.push_back({"P", z, component(traj.get(), 'P').values, "#ff7f0e"});
    save_svg(plot, dir / "trajectory.svg", written);
  }

  json doc;
  doc["system"] = std::string(1, wt_model_system(run.model.get()));
  doc["v"] = v;
  doc["termination"] = blowup ? "blowup" : "completed";
  doc["zeta_star"] = blowup ? json(zeta_star) : json(nullptr);
  doc["samples"] = wt_trajectory_size(traj.get());
  doc["accepted_steps"] = accepted;
  doc["rejected_steps"] = rejected;
  doc["oscillation"] = oscillation_json(osc, note);
  if (run.formats.count("structured")) {
    write_text_file(dir / "simulate.json", doc.dump(2) + "\n");
    written.push_back((dir / "simulate.json").string());
  }

  if (run.formats.count("text")) {
    std::cout << "system = " << doc["system"].get<std::string>() << "\n";
    std::cout << "v = " << fmt(v) << "\n";
    std::cout << "termination = " << (blowup ? "blowup" : "completed") << "\n";
    if (blowup) std::cout << "zeta_star = " << fmt(zeta_star) << "\n";
    std::cout << "samples = " << wt_trajectory_size(traj.get()) << "\n";
    std::cout << "steps = " << accepted << " accepted, " << rejected << " rejected\n";
    if (osc) {
      std::cout << "classification = " << wt_oscillation_class_name(osc->classification) << "\n";
      if (osc->classification == WT_LIMIT_CYCLE || osc->classification == WT_APERIODIC_BOUNDED) {
        std::cout << "amplitude_spread = " << fmt(osc->amplitude_spread) << "\n";
        std::cout << "period_estimate = " << fmt(osc->period_estimate) << "\n";
      }
      std::cout << "final_distance_ratio = " << fmt(osc->final_distance / osc->initial_distance) << "\n";
    } else {
      std::cout << "classification = unclassified (" << note << ")\n";
    }
    for (const auto& w : written) std::cout << "wrote " << w << "\n";
  }
  return 0;
}

// ---- diagnose ----

int cmd_diagnose(const Options& o) {
  Run run = resolve(o, "text,csv", 2000.0);
  const double v = resolve_v(o, run);
  const fs::path dir = prepare_out_dir(o.out_dir);

  wt_trajectory* t = nullptr;
  check(wt_integrate(run.model.get(), v, run.fp, &run.integration, &t));
  Traj traj(t);
  double zeta_star = 0.0;
  if (wt_trajectory_blowup(traj.get(), &zeta_star))
    throw CliError{4, "diagnostics require bounded dynamics (trajectory blew up at zeta = " + fmt(zeta_star) + ")"};

  const Series n_full = component(traj.get(), 'N');
  const auto skip = static_cast<size_t>(std::floor(run.transient * static_cast<double>(n_full.values.size())));
  const std::vector<double> series(n_full.values.begin() + static_cast<std::ptrdiff_t>(skip), n_full.values.end());
  if (series.size() < 2000)
    throw CliError{4, "diagnostics need at least 2000 post-transient samples, got " + std::to_string(series.size())};

  wt_spectrum* sp = nullptr;
  check(wt_psd(series.data(), series.size(), n_full.dzeta, 0, &sp));
  Spectrum spectrum(sp);
  double flatness = 0.0;
  check(wt_spectral_flatness(spectrum.get(), &flatness));
  double peak_f = 0.0, peak_p = 0.0;
  check(wt_spectrum_bin(spectrum.get(), wt_spectrum_peak_bin(spectrum.get()), &peak_f, &peak_p));

  size_t lags = 0;
  check(wt_autocorrelation(series.data(), series.size(), 0, nullptr, 0, &lags));
  std::vector<double> acf(lags);
  check(wt_autocorrelation(series.data(), series.size(), 0, acf.data(), acf.size(), &lags));

  wt_fractal_options fo;
  wt_fractal_options_default(&fo);
  if (o.jobs) fo.threads = o.jobs;
  wt_fractal* fr = nullptr;
  check(wt_fractal_from_trajectory(traj.get(), static_cast<size_t>(run.embed_dim), run.transient, &fo, &fr));
  Fractal fractal(fr);
  wt_fractal_summary fs_sum;
  wt_fractal_summary_get(fractal.get(), &fs_sum);

  std::vector<std::string> written;
  if (run.formats.count("csv")) {
    check(wt_spectrum_write_csv(spectrum.get(), (dir / "spectrum.csv").string().c_str()));
    check(wt_acf_write_csv(acf.data(), acf.size(), n_full.dzeta, (dir / "acf.csv").string().c_str()));
    check(wt_fractal_write_csv(fractal.get(), (dir / "scaling.csv").string().c_str()));
    for (const char* f : {"spectrum.csv", "acf.csv", "scaling.csv"}) written.push_back((dir / f).string());
  }
  if (run.formats.count("svg")) {
    std::vector<double> f(wt_spectrum_size(spectrum.get())), p(f.size()), logp(f.size());
    for (size_t k = 0; k < f.size(); ++k) {
      check(wt_spectrum_bin(spectrum.get(), k, &f[k], &p[k]));
      logp[k] = std::log10(std::max(p[k], 1e-300));
    }
    wtcli::Plot psd{"Power spectral density of N", "frequency (cycles per unit zeta)", "power", {}, false, 0.0, ""};
    psd.series.push_back({"", f, p, "#1f77b4"});
    save_svg(psd, dir / "psd.svg", written);
    wtcli::Plot lpsd{"log10 power spectral density of N", "frequency (cycles per unit zeta)", "log10 power", {}, false,
                     0.0, ""};
    lpsd.series.push_back({"", f, logp, "#1f77b4"});
    save_svg(lpsd, dir / "log_psd.svg", written);

    std::vector<double> lags_z(acf.size());
    for (size_t i = 0; i < acf.size(); ++i) lags_z[i] = static_cast<double>(i) * n_full.dzeta;
    wtcli::Plot acf_plot{"Autocorrelation of N", "lag (zeta)", "ACF", {}, false, 0.0, ""};
    acf_plot.series.push_back({"", lags_z, acf, "#2ca02c"});
    save_svg(acf_plot, dir / "acf.svg", written);

    std::vector<double> ln(fs_sum.curve_size), lr(fs_sum.curve_size), sl(fs_sum.curve_size);
    for (size_t i = 0; i < ln.size(); ++i) check(wt_fractal_curve(fractal.get(), i, &ln[i], &lr[i], &sl[i]));
    wtcli::Plot slopes{"Local slope d log n / d log R(n)", "log n", "local slope", {}, fs_sum.has_dimension != 0,
                       fs_sum.D, fs_sum.has_dimension ? "D = " + fmt(fs_sum.D) : ""};
    slopes.series.push_back({"", ln, sl, "#9467bd"});
    save_svg(slopes, dir / "slopes.svg", written);
  }

  json doc;
  doc["system"] = std::string(1, wt_model_system(run.model.get()));
  doc["v"] = v;
  doc["samples"] = series.size();
  doc["dzeta"] = n_full.dzeta;
  doc["spectral_flatness"] = flatness;
  doc["peak_frequency"] = peak_f;
  doc["embed_dim"] = run.embed_dim;
  doc["fractal_dimension"] = fs_sum.has_dimension ? json(fs_sum.D) : json(nullptr);
  doc["plateau_range"] = fs_sum.has_dimension ? json::array({fs_sum.plateau_lo, fs_sum.plateau_hi}) : json(nullptr);
  doc["cluster_prefactor"] = fs_sum.has_dimension ? json(fs_sum.cluster_prefactor) : json(nullptr);
  doc["points"] = fs_sum.point_count;
  doc["references"] = fs_sum.reference_count;
  if (run.formats.count("structured")) {
    write_text_file(dir / "diagnose.json", doc.dump(2) + "\n");
    written.push_back((dir / "diagnose.json").string());
  }
  if (run.formats.count("text")) {
    std::cout << "system = " << doc["system"].get<std::string>() << "\n";
    std::cout << "v = " << fmt(v) << "\n";
    std::cout << "samples = " << series.size() << "\n";
    std::cout << "peak_frequency = " << fmt(peak_f) << "\n";
    std::cout << "spectral_flatness = " << fmt(flatness) << "\n";
    if (fs_sum.has_dimension)
      std::cout << "fractal_dimension = " << fmt(fs_sum.D) << " (plateau n in [" << fmt(fs_sum.plateau_lo) << ", "
                << fmt(fs_sum.plateau_hi) << "], embedding " << run.embed_dim << ")\n";
    else
      std::cout << "fractal_dimension = none (no plateau)\n";
    for (const auto& w : written) std::cout << "wrote " << w << "\n";
  }
  return 0;
}

// ---- sweep ----

struct SweepRow {
  double v = 0.0;
  wt_coeffs b{};
  wt_routh_hurwitz rh{};
  std::string classification;
  std::string error;
  int exit_code = 0;
};

int cmd_sweep(const Options& o) {
  Run run = resolve(o, "text,csv", 300.0);
  const std::string range_text = pick(o.v_range, config_value(run.config, "v_range"));
  if (range_text.empty()) usage_error("sweep requires --v-range MIN:MAX:COUNT");
  const VRange range = parse_v_range(range_text);
  const fs::path dir = prepare_out_dir(o.out_dir);
  const bool simulate = o.simulate;
  const bool write_traj = simulate && run.formats.count("csv");

  std::vector<SweepRow> rows(static_cast<size_t>(range.count));
  for (size_t i = 0; i < rows.size(); ++i)
    rows[i].v = range.count == 1 ? range.lo : range.lo + (range.hi - range.lo) * static_cast<double>(i) / (range.count - 1);

  auto work = [&](size_t i) {
    SweepRow& row = rows[i];
    if (wt_char_coeffs(run.model.get(), row.v, run.fp, &row.b) != WT_OK ||
        wt_routh_hurwitz_eval(&row.b, &row.rh) != WT_OK) {
      row.error = wt_last_error();
      row.exit_code = 1;
      return;
    }
    if (!simulate) return;
    wt_trajectory* t = nullptr;
    const wt_status s = wt_integrate(run.model.get(), row.v, run.fp, &run.integration, &t);
    if (s != WT_OK) {
      row.error = wt_last_error();
      row.exit_code = exit_code_for(s);
      row.classification = "integration_failed";
      return;
    }
    Traj traj(t);
    wt_oscillation osc;
    if (wt_summarize_oscillation(traj.get(), run.model.get(), run.fp, run.transient, &osc) == WT_OK)
      row.classification = wt_oscillation_class_name(osc.classification);
    else
      row.classification = "unclassified";
    if (write_traj) {
      const auto path = dir / ("trajectory_" + std::to_string(i) + ".csv");
      if (wt_trajectory_write_csv(traj.get(), path.string().c_str()) != WT_OK) {
        row.error = wt_last_error();
        row.exit_code = 1;
      }
    }
  };

  unsigned workers = o.jobs ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<size_t>(workers, rows.size()));
  {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (size_t i = w; i < rows.size(); i += workers) work(i);
      });
    for (auto& th : pool) th.join();
  }
  for (const auto& row : rows)
    if (row.exit_code != 0 && row.classification != "integration_failed")
      throw CliError{row.exit_code, row.error};

  // Rows where the sign (-, 0, +) of the last Routh-Hurwitz quantity differs
  // from the previous row; these bracket the critical speeds.
  auto sign = [](double x) { return (x > 0.0) - (x < 0.0); };
  std::vector<bool> change(rows.size(), false);
  for (size_t i = 1; i < rows.size(); ++i)
    change[i] = sign(rows[i - 1].rh.quantities[3]) != sign(rows[i].rh.quantities[3]);

  std::vector<std::string> written;
  if (run.formats.count("csv")) {
    std::ostringstream os;
    os << "v,b1,b2,b3,b4,c1,c2,c3,c4,c1_ok,c2_ok,c3_ok,c4_ok,stable,c4_sign_change";
    if (simulate) os << ",classification";
    os << "\n";
    char buf[64];
    auto g = [&](double x) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      return std::string(buf);
    };
    for (size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      os << g(r.v) << "," << g(r.b.b1) << "," << g(r.b.b2) << "," << g(r.b.b3) << "," << g(r.b.b4);
      for (double q : r.rh.quantities) os << "," << g(q);
      for (int s : r.rh.satisfied) os << "," << s;
      os << "," << r.rh.stable << "," << (change[i] ? 1 : 0);
      if (simulate) os << "," << r.classification;
      os << "\n";
    }
    write_text_file(dir / "sweep.csv", os.str());
    written.push_back((dir / "sweep.csv").string());
  }
  if (run.formats.count("structured")) {
    json doc = json::array();
    for (size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      json j;
      j["v"] = r.v;
      j["coeffs"] = {r.b.b1, r.b.b2, r.b.b3, r.b.b4};
      j["routh_hurwitz"] = std::vector<double>(r.rh.quantities, r.rh.quantities + 4);
      j["stable"] = r.rh.stable != 0;
      j["c4_sign_change"] = static_cast<bool>(change[i]);
      if (simulate) j["classification"] = r.classification;
      doc.push_back(j);
    }
    write_text_file(dir / "sweep.json", doc.dump(2) + "\n");
    written.push_back((dir / "sweep.json").string());
  }
  if (run.formats.count("svg")) {
    std::vector<double> vs, c4;
    for (const auto& r : rows) {
      vs.push_back(r.v);
      c4.push_back(r.rh.quantities[3]);
    }
    wtcli::Plot plot{"Hopf quantity b1(b2 b3 - b1 b4) - b3^2", "v", "c4", {}, true, 0.0, "c4 = 0"};
    plot.series.push_back({"", vs, c4, "#1f77b4"});
    save_svg(plot, dir / "sweep.svg", written);
  }
  if (run.formats.count("text")) {
    for (size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      std::cout << "v = " << fmt(r.v) << "  c4 = " << fmt(r.rh.quantities[3])
                << "  stable = " << (r.rh.stable ? "yes" : "no");
      if (simulate) std::cout << "  classification = " << r.classification;
      std::cout << "\n";
      if (change[i])
        std::cout << "c4 sign change in (" << fmt(rows[i - 1].v) << ", " << fmt(r.v) << "]\n";
    }
    for (const auto& w : written) std::cout << "wrote " << w << "\n";
  }
  for (const auto& row : rows)
    if (row.exit_code != 0) throw CliError{row.exit_code, row.error};
  return 0;
}

void add_model_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--preset", o.preset, "Preset system A, B, C, D or E");
  cmd->add_option("--config", o.config_path, "Flat key = value model/run file");
  cmd->add_option("--param", o.params, "Parameter override NAME=VALUE (repeatable)");
  cmd->add_option("--fp-index", o.fp_index, "Fixed point index (default: first physical)");
  cmd->add_option("--format", o.formats, "Comma list of text, structured, csv, svg");
  cmd->add_option("--out", o.out_dir, "Output directory");
}

void add_integration_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--span", o.span, "Integration span A:B");
  cmd->add_option("--ic", o.ic, "Initial state N,M,P,Q (default: fixed point + (0.01,0,0.01,0))");
  cmd->add_option("--rel-tol", o.rel_tol, "Relative tolerance (default 1e-9)");
  cmd->add_option("--abs-tol", o.abs_tol, "Absolute tolerance (default 1e-11)");
  cmd->add_option("--sample-interval", o.sample_interval, "Output spacing in zeta (default 0.05)");
  cmd->add_option("--max-step", o.max_step, "Largest integrator step (default 1)");
  cmd->add_option("--transient", o.transient, "Leading fraction discarded before analysis (default 0.2)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Traveling-wave stability, Hopf and chaos analysis for two-species reaction-diffusion models"};
  app.require_subcommand(1);
  Options o;

  app.add_subcommand("presets", "Print the parameter sets of Systems A-E");

  auto* analyze = app.add_subcommand("analyze", "Fixed points, Routh-Hurwitz and Hopf analysis at one wave speed");
  add_model_options(analyze, o);
  analyze->add_option("--v", o.v, "Wave speed");

  auto* simulate = app.add_subcommand("simulate", "Integrate the traveling-wave ODE and classify the oscillation");
  add_model_options(simulate, o);
  add_integration_options(simulate, o);
  simulate->add_option("--v", o.v, "Wave speed");

  auto* diagnose = app.add_subcommand("diagnose", "Power spectrum, autocorrelation and cluster fractal dimension");
  add_model_options(diagnose, o);
  add_integration_options(diagnose, o);
  diagnose->add_option("--v", o.v, "Wave speed");
  diagnose->add_option("--embed-dim", o.embed_dim, "Embedding dimension 2 (N,M), 3 (N,M,P) or 4");
  diagnose->add_option("--jobs", o.jobs, "Worker threads (default: hardware concurrency)");

  auto* sweep = app.add_subcommand("sweep", "Routh-Hurwitz table (optionally with simulations) over a range of v");
  add_model_options(sweep, o);
  add_integration_options(sweep, o);
  sweep->add_option("--v-range", o.v_range, "MIN:MAX:COUNT");
  sweep->add_flag("--simulate", o.simulate, "Integrate and classify at each v");
  sweep->add_option("--jobs", o.jobs, "Worker threads (default: hardware concurrency)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    const auto* cmd = app.get_subcommands().front();
    const std::string name = cmd->get_name();
    if (name == "presets") return cmd_presets();
    if (name == "analyze") return cmd_analyze(o);
    if (name == "simulate") return cmd_simulate(o);
    if (name == "diagnose") return cmd_diagnose(o);
    if (name == "sweep") return cmd_sweep(o);
    return 1;
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
