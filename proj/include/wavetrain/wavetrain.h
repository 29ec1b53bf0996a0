#ifndef WAVETRAIN_H
#define WAVETRAIN_H

/* C interface to the wavetrain library.
 *
 * Every fallible call returns a wt_status; on failure wt_last_error() gives a
 * message for the calling thread until its next failing call. Handles are
 * opaque and released with the matching *_free function. Strings returned
 * through char** are released with wt_string_free. All calls are safe to
 * make concurrently on distinct or const handles. */

#include <stddef.h>

#if defined(_WIN32)
#  if defined(WAVETRAIN_BUILDING)
#    define WT_API __declspec(dllexport)
#  else
#    define WT_API __declspec(dllimport)
#  endif
#else
#  define WT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wt_status {
  WT_OK = 0,
  WT_ERR_CONFIG = 1,
  WT_ERR_NO_PHYSICAL_FIXED_POINT = 2,
  WT_ERR_INTEGRATION = 3,
  WT_ERR_DIAGNOSTICS = 4,
  WT_ERR_INVALID_ARGUMENT = 5,
  WT_ERR_NUMERICAL = 6,
  WT_ERR_IO = 7,
  WT_ERR_INTERNAL = 8
} wt_status;

WT_API const char* wt_last_error(void);
WT_API const char* wt_version(void);
WT_API void wt_string_free(char* s);

/* ---- configuration documents ---- */

typedef struct wt_config wt_config;

WT_API wt_status wt_config_load(const char* path, wt_config** out);
WT_API wt_status wt_config_parse(const char* text, wt_config** out);
/* *found is 0 and *value NULL when the key is absent. */
WT_API wt_status wt_config_get(const wt_config* cfg, const char* key, char** value, int* found);
WT_API wt_status wt_config_get_double(const wt_config* cfg, const char* key, double* value, int* found);
WT_API void wt_config_free(wt_config* cfg);

/* ---- models ---- */

typedef struct wt_model wt_model;

/* system is one of 'A'..'E' (either case). */
WT_API wt_status wt_model_preset(char system, wt_model** out);
WT_API wt_status wt_model_from_config(const wt_config* cfg, wt_model** out);
/* Re-applies the preset with one parameter overridden. */
WT_API wt_status wt_model_set_param(wt_model* model, const char* name, double value);
WT_API wt_status wt_model_get_param(const wt_model* model, const char* name, double* value, int* present);
WT_API char wt_model_system(const wt_model* model);
WT_API wt_status wt_model_to_config_text(const wt_model* model, char** text);
WT_API void wt_model_free(wt_model* model);

typedef struct wt_state {
  double N, M, P, Q;
} wt_state;

typedef struct wt_fixed_point {
  double N0, M0, P0, Q0;
  double residual;
  int physical;
} wt_fixed_point;

/* Writes up to capacity points; *count is always the total number. */
WT_API wt_status wt_fixed_points(const wt_model* model, wt_fixed_point* out, size_t capacity, size_t* count);
/* index < 0 selects the first physical point. */
WT_API wt_status wt_select_fixed_point(const wt_model* model, int index, size_t* selected);

WT_API wt_status wt_rhs(const wt_model* model, double v, const wt_state* state, wt_state* derivative);
/* Row-major 4x4, order (N, M, P, Q). */
WT_API wt_status wt_jacobian(const wt_model* model, double v, size_t fp_index, double out[16]);

/* ---- stability ---- */

typedef struct wt_coeffs {
  double b1, b2, b3, b4;
} wt_coeffs;

typedef struct wt_routh_hurwitz {
  double quantities[4];
  int satisfied[4];
  int stable;
} wt_routh_hurwitz;

typedef struct wt_hopf {
  double A, B;
  int has_speeds;
  double v_minus, v_plus;
  char regime; /* 'a'..'d', '-' when degenerate */
  int has_omega;
  double omega;
  int degenerate;
  double omega_operational, omega_quartic_root;
  int has_transversality;
  double transversality_rate;
} wt_hopf;

WT_API wt_status wt_char_coeffs(const wt_model* model, double v, size_t fp_index, wt_coeffs* out);
WT_API wt_status wt_routh_hurwitz_eval(const wt_coeffs* b, wt_routh_hurwitz* out);
/* Real and imaginary parts of the four roots of the characteristic quartic. */
WT_API wt_status wt_quartic_roots(const wt_coeffs* b, double re[4], double im[4]);
WT_API wt_status wt_hopf_analysis(const wt_model* model, size_t fp_index, wt_hopf* out);

typedef struct wt_report wt_report;

/* fp_index < 0 selects the first physical point; WT_ERR_NO_PHYSICAL_FIXED_POINT
 * carries every root in the message. */
WT_API wt_status wt_analyze(const wt_model* model, double v, int fp_index, wt_report** out);
WT_API wt_status wt_report_json(const wt_report* report, char** out);
WT_API wt_status wt_report_text(const wt_report* report, char** out);
WT_API wt_status wt_report_from_json(const char* json, wt_report** out);
WT_API int wt_report_equal(const wt_report* a, const wt_report* b);
WT_API void wt_report_free(wt_report* report);

/* ---- integration ---- */

typedef struct wt_integration_options {
  double zeta_start, zeta_end;
  int has_initial_state; /* 0: fixed point + (1e-2, 0, 1e-2, 0) */
  wt_state initial_state;
  double rel_tol, abs_tol;
  double max_step;
  double blowup_threshold;
  double sample_interval;
} wt_integration_options;

WT_API void wt_integration_options_default(wt_integration_options* opts);

typedef struct wt_trajectory wt_trajectory;

WT_API wt_status wt_integrate(const wt_model* model, double v, size_t fp_index,
                              const wt_integration_options* opts, wt_trajectory** out);
WT_API size_t wt_trajectory_size(const wt_trajectory* traj);
WT_API wt_status wt_trajectory_sample(const wt_trajectory* traj, size_t i, double* zeta, wt_state* state);
/* Returns 1 and sets *zeta_star on blow-up, 0 otherwise. */
WT_API int wt_trajectory_blowup(const wt_trajectory* traj, double* zeta_star);
WT_API void wt_trajectory_steps(const wt_trajectory* traj, size_t* accepted, size_t* rejected);
/* component is 'N', 'M', 'P' or 'Q'. */
WT_API wt_status wt_trajectory_component(const wt_trajectory* traj, char component, double* out, size_t capacity,
                                         size_t* count, double* dzeta);
WT_API wt_status wt_trajectory_write_csv(const wt_trajectory* traj, const char* path);
WT_API wt_status wt_trajectory_write_metadata(const wt_trajectory* traj, const char* path);
WT_API void wt_trajectory_free(wt_trajectory* traj);

typedef enum wt_oscillation_class {
  WT_DECAY_TO_FIXED_POINT = 0,
  WT_LIMIT_CYCLE = 1,
  WT_APERIODIC_BOUNDED = 2,
  WT_BLOWUP = 3
} wt_oscillation_class;

typedef struct wt_oscillation {
  wt_oscillation_class classification;
  double amplitudes[10];
  size_t amplitude_count;
  double amplitude_spread;
  double period_estimate;
  size_t peak_count;
  double initial_distance, final_distance;
  wt_state final_state;
} wt_oscillation;

WT_API const char* wt_oscillation_class_name(wt_oscillation_class c);
/* Uses fixed point fp_index of model as the reference. */
WT_API wt_status wt_summarize_oscillation(const wt_trajectory* traj, const wt_model* model, size_t fp_index,
                                          double transient_fraction, wt_oscillation* out);

/* ---- diagnostics ---- */

typedef struct wt_spectrum wt_spectrum;

/* segment_length 0 picks a default power of two. */
WT_API wt_status wt_psd(const double* series, size_t n, double dzeta, size_t segment_length, wt_spectrum** out);
WT_API size_t wt_spectrum_size(const wt_spectrum* s);
WT_API wt_status wt_spectrum_bin(const wt_spectrum* s, size_t k, double* frequency, double* power);
WT_API void wt_spectrum_info(const wt_spectrum* s, size_t* segment_length, size_t* segments, double* df);
WT_API size_t wt_spectrum_peak_bin(const wt_spectrum* s);
WT_API wt_status wt_spectral_flatness(const wt_spectrum* s, double* out);
WT_API wt_status wt_spectrum_write_csv(const wt_spectrum* s, const char* path);
WT_API void wt_spectrum_free(wt_spectrum* s);

/* max_lag 0 uses n / 4. Writes up to capacity values; *count is max_lag + 1. */
WT_API wt_status wt_autocorrelation(const double* series, size_t n, size_t max_lag, double* out, size_t capacity,
                                    size_t* count);
WT_API wt_status wt_acf_write_csv(const double* acf, size_t n, double dzeta, const char* path);

typedef struct wt_fractal_options {
  size_t reference_count;
  size_t grid_size;
  double max_rank_fraction;
  double plateau_spread;
  double plateau_decades;
  unsigned threads; /* 0: hardware concurrency */
} wt_fractal_options;

WT_API void wt_fractal_options_default(wt_fractal_options* opts);

typedef struct wt_fractal wt_fractal;

typedef struct wt_fractal_summary {
  int has_dimension;
  double D;
  double plateau_lo, plateau_hi;
  double cluster_prefactor;
  size_t point_count;
  size_t reference_count;
  size_t curve_size;
} wt_fractal_summary;

/* embed_dim 2: (N, M); 3: (N, M, P); 4: full state. */
WT_API wt_status wt_fractal_from_trajectory(const wt_trajectory* traj, size_t embed_dim, double transient_fraction,
                                            const wt_fractal_options* opts, wt_fractal** out);
/* coords is row-major n_points x dim. */
WT_API wt_status wt_fractal_from_points(const double* coords, size_t n_points, size_t dim,
                                        const wt_fractal_options* opts, wt_fractal** out);
WT_API void wt_fractal_summary_get(const wt_fractal* f, wt_fractal_summary* out);
WT_API wt_status wt_fractal_curve(const wt_fractal* f, size_t i, double* log_n, double* log_R, double* slope);
WT_API wt_status wt_fractal_write_csv(const wt_fractal* f, const char* path);
WT_API void wt_fractal_free(wt_fractal* f);

#ifdef __cplusplus
}
#endif

#endif /* WAVETRAIN_H */
