#include "wavetrain/wavetrain.h"

#include "wavetrain/config.hpp"
#include "wavetrain/diagnostics.hpp"
#include "wavetrain/error.hpp"
#include "wavetrain/integrate.hpp"
#include "wavetrain/model.hpp"
#include "wavetrain/report.hpp"
#include "wavetrain/stability.hpp"

#include <cstdlib>
#include <cstring>
#include <map>
#include <new>
#include <string>

using namespace wavetrain;

struct wt_config {
  ConfigDocument doc;
};

struct wt_model {
  ModelSpec spec;
};

struct wt_report {
  AnalysisReport report;
};

struct wt_trajectory {
  Trajectory traj;
};

struct wt_spectrum {
  Spectrum spectrum;
};

struct wt_fractal {
  FractalEstimate estimate;
};

namespace {

thread_local std::string last_error;

wt_status fail(wt_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs f, mapping exceptions onto status codes.
template <class F>
wt_status guarded(F&& f) {
  try {
    f();
    return WT_OK;
  } catch (const Error& e) {
    return fail(static_cast<wt_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(WT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(WT_ERR_INTERNAL, e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const FixedPoint& fixed_point_at(const std::vector<FixedPoint>& points, size_t index) {
  if (index >= points.size()) throw InvalidArgument("fixed point index out of range");
  return points[index];
}

wt_state to_c(const PhaseState& s) { return {s.N, s.M, s.P, s.Q}; }
PhaseState from_c(const wt_state& s) { return {s.N, s.M, s.P, s.Q}; }

FractalOptions from_c(const wt_fractal_options* o) {
  FractalOptions out;
  if (!o) return out;
  out.reference_count = o->reference_count;
  out.grid_size = o->grid_size;
  out.max_rank_fraction = o->max_rank_fraction;
  out.plateau_spread = o->plateau_spread;
  out.plateau_decades = o->plateau_decades;
  out.threads = o->threads;
  return out;
}

}  // namespace

extern "C" {

const char* wt_last_error(void) { return last_error.c_str(); }

const char* wt_version(void) { return "0.1.0"; }

void wt_string_free(char* s) { std::free(s); }

wt_status wt_config_load(const char* path, wt_config** out) {
  return guarded([&] {
    require(path && out, "wt_config_load: null argument");
    *out = new wt_config{ConfigDocument::load(path)};
  });
}

wt_status wt_config_parse(const char* text, wt_config** out) {
  return guarded([&] {
    require(text && out, "wt_config_parse: null argument");
    *out = new wt_config{ConfigDocument::parse(text)};
  });
}

wt_status wt_config_get(const wt_config* cfg, const char* key, char** value, int* found) {
  return guarded([&] {
    require(cfg && key && value && found, "wt_config_get: null argument");
    const auto v = cfg->doc.get(key);
    *found = v.has_value();
    *value = v ? dup_string(*v) : nullptr;
  });
}

wt_status wt_config_get_double(const wt_config* cfg, const char* key, double* value, int* found) {
  return guarded([&] {
    require(cfg && key && value && found, "wt_config_get_double: null argument");
    const auto v = cfg->doc.get_double(key);
    *found = v.has_value();
    if (v) *value = *v;
  });
}

void wt_config_free(wt_config* cfg) { delete cfg; }

wt_status wt_model_preset(char system, wt_model** out) {
  return guarded([&] {
    require(out != nullptr, "wt_model_preset: null argument");
    *out = new wt_model{make_preset(parse_system_id(std::string(1, system)))};
  });
}

wt_status wt_model_from_config(const wt_config* cfg, wt_model** out) {
  return guarded([&] {
    require(cfg && out, "wt_model_from_config: null argument");
    *out = new wt_model{model_from_config(cfg->doc)};
  });
}

wt_status wt_model_set_param(wt_model* model, const char* name, double value) {
  return guarded([&] {
    require(model && name, "wt_model_set_param: null argument");
    const auto p = param_from_name(name);
    if (!p) throw ConfigError(std::string("unknown parameter '") + name + "'");
    if (model->spec.system() == SystemId::custom) throw ConfigError("custom models cannot be re-parameterized");
    std::map<Param, double> overrides;
    for (Param q : kAllParams)
      if (q != Param::eps_tilde && model->spec.params().has(q)) overrides[q] = model->spec.param(q);
    overrides[*p] = value;
    model->spec = make_preset(model->spec.system(), overrides);
  });
}

wt_status wt_model_get_param(const wt_model* model, const char* name, double* value, int* present) {
  return guarded([&] {
    require(model && name && value && present, "wt_model_get_param: null argument");
    const auto p = param_from_name(name);
    if (!p) throw ConfigError(std::string("unknown parameter '") + name + "'");
    const auto v = model->spec.params().find(*p);
    *present = v.has_value();
    if (v) *value = *v;
  });
}

char wt_model_system(const wt_model* model) {
  if (!model || model->spec.system() == SystemId::custom) return '?';
  return system_letter(model->spec.system());
}

wt_status wt_model_to_config_text(const wt_model* model, char** text) {
  return guarded([&] {
    require(model && text, "wt_model_to_config_text: null argument");
    *text = dup_string(model_to_config(model->spec).to_text());
  });
}

void wt_model_free(wt_model* model) { delete model; }

wt_status wt_fixed_points(const wt_model* model, wt_fixed_point* out, size_t capacity, size_t* count) {
  return guarded([&] {
    require(model && count && (out || capacity == 0), "wt_fixed_points: null argument");
    const auto points = fixed_points(model->spec);
    *count = points.size();
    for (size_t i = 0; i < points.size() && i < capacity; ++i) {
      const auto& p = points[i];
      out[i] = {p.N0, p.M0, p.P0, p.Q0, p.residual, p.physical ? 1 : 0};
    }
  });
}

wt_status wt_select_fixed_point(const wt_model* model, int index, size_t* selected) {
  return guarded([&] {
    require(model && selected, "wt_select_fixed_point: null argument");
    std::optional<std::size_t> idx;
    if (index >= 0) idx = static_cast<std::size_t>(index);
    *selected = select_fixed_point(fixed_points(model->spec), idx);
  });
}

wt_status wt_rhs(const wt_model* model, double v, const wt_state* state, wt_state* derivative) {
  return guarded([&] {
    require(model && state && derivative, "wt_rhs: null argument");
    *derivative = to_c(evaluate_rhs(model->spec, v, from_c(*state)));
  });
}

wt_status wt_jacobian(const wt_model* model, double v, size_t fp_index, double out[16]) {
  return guarded([&] {
    require(model && out, "wt_jacobian: null argument");
    const auto points = fixed_points(model->spec);
    const Matrix4 J = jacobian_at(model->spec, v, fixed_point_at(points, fp_index));
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) out[r * 4 + c] = J(r, c);
  });
}

wt_status wt_char_coeffs(const wt_model* model, double v, size_t fp_index, wt_coeffs* out) {
  return guarded([&] {
    require(model && out, "wt_char_coeffs: null argument");
    const auto points = fixed_points(model->spec);
    const CharCoeffs b = char_coeffs_at(model->spec, v, fixed_point_at(points, fp_index));
    *out = {b.b1, b.b2, b.b3, b.b4};
  });
}

wt_status wt_routh_hurwitz_eval(const wt_coeffs* b, wt_routh_hurwitz* out) {
  return guarded([&] {
    require(b && out, "wt_routh_hurwitz_eval: null argument");
    const auto r = routh_hurwitz({b->b1, b->b2, b->b3, b->b4});
    for (int i = 0; i < 4; ++i) {
      out->quantities[i] = r.quantities[i];
      out->satisfied[i] = r.satisfied[i] ? 1 : 0;
    }
    out->stable = r.stable ? 1 : 0;
  });
}

wt_status wt_quartic_roots(const wt_coeffs* b, double re[4], double im[4]) {
  return guarded([&] {
    require(b && re && im, "wt_quartic_roots: null argument");
    const auto set = quartic_roots({b->b1, b->b2, b->b3, b->b4});
    for (int i = 0; i < 4; ++i) {
      re[i] = set.roots[i].real();
      im[i] = set.roots[i].imag();
    }
  });
}

wt_status wt_hopf_analysis(const wt_model* model, size_t fp_index, wt_hopf* out) {
  return guarded([&] {
    require(model && out, "wt_hopf_analysis: null argument");
    const auto points = fixed_points(model->spec);
    const HopfAnalysis h = analyze_hopf(model->spec, fixed_point_at(points, fp_index));
    *out = wt_hopf{};
    out->A = h.A;
    out->B = h.B;
    out->has_speeds = h.speeds.has_value();
    if (h.speeds) {
      out->v_minus = h.speeds->v_minus;
      out->v_plus = h.speeds->v_plus;
    }
    out->regime = regime_letter(h.regime);
    out->has_omega = h.omega.has_value();
    out->omega = h.omega.value_or(0.0);
    out->degenerate = h.degenerate.has_value();
    if (h.degenerate) {
      out->omega_operational = h.degenerate->operational;
      out->omega_quartic_root = h.degenerate->quartic_root;
    }
    out->has_transversality = h.transversality_rate.has_value();
    out->transversality_rate = h.transversality_rate.value_or(0.0);
  });
}

wt_status wt_analyze(const wt_model* model, double v, int fp_index, wt_report** out) {
  return guarded([&] {
    require(model && out, "wt_analyze: null argument");
    std::optional<std::size_t> idx;
    if (fp_index >= 0) idx = static_cast<std::size_t>(fp_index);
    *out = new wt_report{analyze(model->spec, v, idx)};
  });
}

wt_status wt_report_json(const wt_report* report, char** out) {
  return guarded([&] {
    require(report && out, "wt_report_json: null argument");
    *out = dup_string(report_to_json(report->report));
  });
}

wt_status wt_report_text(const wt_report* report, char** out) {
  return guarded([&] {
    require(report && out, "wt_report_text: null argument");
    *out = dup_string(report_to_text(report->report));
  });
}

wt_status wt_report_from_json(const char* json, wt_report** out) {
  return guarded([&] {
    require(json && out, "wt_report_from_json: null argument");
    *out = new wt_report{report_from_json(json)};
  });
}

int wt_report_equal(const wt_report* a, const wt_report* b) {
  if (!a || !b) return 0;
  return a->report == b->report ? 1 : 0;
}

void wt_report_free(wt_report* report) { delete report; }

void wt_integration_options_default(wt_integration_options* opts) {
  if (!opts) return;
  const IntegrationOptions d;
  *opts = wt_integration_options{};
  opts->zeta_start = d.zeta_start;
  opts->zeta_end = d.zeta_end;
  opts->has_initial_state = 0;
  opts->rel_tol = d.rel_tol;
  opts->abs_tol = d.abs_tol;
  opts->max_step = d.max_step;
  opts->blowup_threshold = d.blowup_threshold;
  opts->sample_interval = d.sample_interval;
}

wt_status wt_integrate(const wt_model* model, double v, size_t fp_index, const wt_integration_options* opts,
                       wt_trajectory** out) {
  return guarded([&] {
    require(model && opts && out, "wt_integrate: null argument");
    IntegrationOptions o;
    o.zeta_start = opts->zeta_start;
    o.zeta_end = opts->zeta_end;
    o.rel_tol = opts->rel_tol;
    o.abs_tol = opts->abs_tol;
    o.max_step = opts->max_step;
    o.blowup_threshold = opts->blowup_threshold;
    o.sample_interval = opts->sample_interval;
    if (opts->has_initial_state) {
      o.initial_state = from_c(opts->initial_state);
    } else {
      const auto points = fixed_points(model->spec);
      o.initial_state = default_initial_state(fixed_point_at(points, fp_index));
    }
    *out = new wt_trajectory{integrate(model->spec, v, o)};
  });
}

size_t wt_trajectory_size(const wt_trajectory* traj) { return traj ? traj->traj.size() : 0; }

wt_status wt_trajectory_sample(const wt_trajectory* traj, size_t i, double* zeta, wt_state* state) {
  return guarded([&] {
    require(traj && zeta && state, "wt_trajectory_sample: null argument");
    require(i < traj->traj.size(), "wt_trajectory_sample: index out of range");
    *zeta = traj->traj.zetas[i];
    *state = to_c(traj->traj.states[i]);
  });
}

int wt_trajectory_blowup(const wt_trajectory* traj, double* zeta_star) {
  if (!traj || traj->traj.termination != Termination::blowup) return 0;
  if (zeta_star) *zeta_star = traj->traj.blowup_zeta;
  return 1;
}

void wt_trajectory_steps(const wt_trajectory* traj, size_t* accepted, size_t* rejected) {
  if (!traj) return;
  if (accepted) *accepted = traj->traj.accepted_steps;
  if (rejected) *rejected = traj->traj.rejected_steps;
}

wt_status wt_trajectory_component(const wt_trajectory* traj, char component, double* out, size_t capacity,
                                  size_t* count, double* dzeta) {
  return guarded([&] {
    require(traj && count && (out || capacity == 0), "wt_trajectory_component: null argument");
    const auto series = resample_series(traj->traj, parse_component(component));
    *count = series.values.size();
    if (dzeta) *dzeta = series.dzeta;
    std::copy_n(series.values.begin(), std::min(capacity, series.values.size()), out);
  });
}

wt_status wt_trajectory_write_csv(const wt_trajectory* traj, const char* path) {
  return guarded([&] {
    require(traj && path, "wt_trajectory_write_csv: null argument");
    write_trajectory_csv(traj->traj, path);
  });
}

wt_status wt_trajectory_write_metadata(const wt_trajectory* traj, const char* path) {
  return guarded([&] {
    require(traj && path, "wt_trajectory_write_metadata: null argument");
    write_trajectory_metadata(traj->traj, path);
  });
}

void wt_trajectory_free(wt_trajectory* traj) { delete traj; }

const char* wt_oscillation_class_name(wt_oscillation_class c) {
  switch (c) {
    case WT_DECAY_TO_FIXED_POINT: return "decay_to_fixed_point";
    case WT_LIMIT_CYCLE: return "limit_cycle";
    case WT_APERIODIC_BOUNDED: return "aperiodic_bounded";
    case WT_BLOWUP: return "blowup";
  }
  return "unknown";
}

wt_status wt_summarize_oscillation(const wt_trajectory* traj, const wt_model* model, size_t fp_index,
                                   double transient_fraction, wt_oscillation* out) {
  return guarded([&] {
    require(traj && model && out, "wt_summarize_oscillation: null argument");
    const auto points = fixed_points(model->spec);
    const auto s = summarize_oscillation(traj->traj, fixed_point_at(points, fp_index), transient_fraction);
    *out = wt_oscillation{};
    out->classification = static_cast<wt_oscillation_class>(s.classification);
    out->amplitude_count = std::min<size_t>(s.amplitudes.size(), 10);
    std::copy_n(s.amplitudes.begin(), out->amplitude_count, out->amplitudes);
    out->amplitude_spread = s.amplitude_spread;
    out->period_estimate = s.period_estimate;
    out->peak_count = s.peak_count;
    out->initial_distance = s.initial_distance;
    out->final_distance = s.final_distance;
    out->final_state = to_c(s.final_state);
  });
}

wt_status wt_psd(const double* series, size_t n, double dzeta, size_t segment_length, wt_spectrum** out) {
  return guarded([&] {
    require(series && out, "wt_psd: null argument");
    PsdOptions o;
    o.segment_length = segment_length;
    *out = new wt_spectrum{power_spectral_density(std::vector<double>(series, series + n), dzeta, o)};
  });
}

size_t wt_spectrum_size(const wt_spectrum* s) { return s ? s->spectrum.power.size() : 0; }

wt_status wt_spectrum_bin(const wt_spectrum* s, size_t k, double* frequency, double* power) {
  return guarded([&] {
    require(s && frequency && power, "wt_spectrum_bin: null argument");
    require(k < s->spectrum.power.size(), "wt_spectrum_bin: bin out of range");
    *frequency = s->spectrum.frequencies[k];
    *power = s->spectrum.power[k];
  });
}

void wt_spectrum_info(const wt_spectrum* s, size_t* segment_length, size_t* segments, double* df) {
  if (!s) return;
  if (segment_length) *segment_length = s->spectrum.segment_length;
  if (segments) *segments = s->spectrum.segments;
  if (df) *df = s->spectrum.df;
}

size_t wt_spectrum_peak_bin(const wt_spectrum* s) { return s ? s->spectrum.peak_bin() : 0; }

wt_status wt_spectral_flatness(const wt_spectrum* s, double* out) {
  return guarded([&] {
    require(s && out, "wt_spectral_flatness: null argument");
    *out = spectral_flatness(s->spectrum);
  });
}

wt_status wt_spectrum_write_csv(const wt_spectrum* s, const char* path) {
  return guarded([&] {
    require(s && path, "wt_spectrum_write_csv: null argument");
    write_spectrum_csv(s->spectrum, path);
  });
}

void wt_spectrum_free(wt_spectrum* s) { delete s; }

wt_status wt_autocorrelation(const double* series, size_t n, size_t max_lag, double* out, size_t capacity,
                             size_t* count) {
  return guarded([&] {
    require(series && count && (out || capacity == 0), "wt_autocorrelation: null argument");
    std::optional<std::size_t> lag;
    if (max_lag != 0) lag = max_lag;
    const auto acf = autocorrelation(std::vector<double>(series, series + n), lag);
    *count = acf.size();
    std::copy_n(acf.begin(), std::min(capacity, acf.size()), out);
  });
}

wt_status wt_acf_write_csv(const double* acf, size_t n, double dzeta, const char* path) {
  return guarded([&] {
    require(acf && path, "wt_acf_write_csv: null argument");
    write_acf_csv(std::vector<double>(acf, acf + n), dzeta, path);
  });
}

void wt_fractal_options_default(wt_fractal_options* opts) {
  if (!opts) return;
  const FractalOptions d;
  opts->reference_count = d.reference_count;
  opts->grid_size = d.grid_size;
  opts->max_rank_fraction = d.max_rank_fraction;
  opts->plateau_spread = d.plateau_spread;
  opts->plateau_decades = d.plateau_decades;
  opts->threads = d.threads;
}

wt_status wt_fractal_from_trajectory(const wt_trajectory* traj, size_t embed_dim, double transient_fraction,
                                     const wt_fractal_options* opts, wt_fractal** out) {
  return guarded([&] {
    require(traj && out, "wt_fractal_from_trajectory: null argument");
    const PointCloud cloud = embed_trajectory(traj->traj, embed_dim, transient_fraction);
    *out = new wt_fractal{cluster_fractal_dimension(cloud, from_c(opts))};
  });
}

wt_status wt_fractal_from_points(const double* coords, size_t n_points, size_t dim, const wt_fractal_options* opts,
                                 wt_fractal** out) {
  return guarded([&] {
    require(coords && out, "wt_fractal_from_points: null argument");
    PointCloud cloud;
    cloud.dim = dim;
    cloud.coords.assign(coords, coords + n_points * dim);
    *out = new wt_fractal{cluster_fractal_dimension(cloud, from_c(opts))};
  });
}

void wt_fractal_summary_get(const wt_fractal* f, wt_fractal_summary* out) {
  if (!f || !out) return;
  const auto& e = f->estimate;
  *out = wt_fractal_summary{};
  out->has_dimension = e.D.has_value();
  out->D = e.D.value_or(0.0);
  if (e.plateau_range) {
    out->plateau_lo = e.plateau_range->first;
    out->plateau_hi = e.plateau_range->second;
  }
  out->cluster_prefactor = e.cluster_prefactor.value_or(0.0);
  out->point_count = e.point_count;
  out->reference_count = e.reference_count;
  out->curve_size = e.log_n.size();
}

wt_status wt_fractal_curve(const wt_fractal* f, size_t i, double* log_n, double* log_R, double* slope) {
  return guarded([&] {
    require(f && log_n && log_R && slope, "wt_fractal_curve: null argument");
    require(i < f->estimate.log_n.size(), "wt_fractal_curve: index out of range");
    *log_n = f->estimate.log_n[i];
    *log_R = f->estimate.log_R[i];
    *slope = f->estimate.local_slopes[i];
  });
}

wt_status wt_fractal_write_csv(const wt_fractal* f, const char* path) {
  return guarded([&] {
    require(f && path, "wt_fractal_write_csv: null argument");
    write_scaling_csv(f->estimate, path);
  });
}

void wt_fractal_free(wt_fractal* f) { delete f; }

}  // extern "C"
