/* repeater_budget: photon-budget and resource-cost modeling for
 * cavity-coupled quantum emitters.
 *
 * C API of the shared library. All functions return RB_OK on success or an
 * error code; rb_last_error() holds a thread-local message for the last
 * failing call on the calling thread. Objects returned through handle
 * pointers are owned by the caller and released with the matching _free
 * function. Strings returned through char** are released with
 * rb_string_free().
 */
#ifndef REPEATER_BUDGET_H
#define REPEATER_BUDGET_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RB_API __declspec(dllexport)
#else
#define RB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rb_status {
  RB_OK = 0,
  RB_ERR_INVALID_ARGUMENT = 1,
  RB_ERR_DOMAIN = 2,
  RB_ERR_INFEASIBLE = 3,
  RB_ERR_NO_CONVERGENCE = 4,
  RB_ERR_PARSE = 5,
  RB_ERR_IO = 6,
  RB_ERR_INTERNAL = 7
} rb_status;

RB_API const char* rb_status_name(rb_status status);
RB_API const char* rb_last_error(void);
RB_API const char* rb_version(void);
RB_API void rb_string_free(char* text);

/* ---------------- emitters ---------------- */

typedef struct rb_emitter rb_emitter; /* opaque */

RB_API rb_status rb_emitter_create(const char* name, double tau0_s, double dw0,
                                   double xi, double zpl_hz, rb_emitter** out);
RB_API rb_status rb_emitter_preset(const char* name, rb_emitter** out);
RB_API size_t rb_emitter_preset_count(void);
RB_API rb_status rb_emitter_preset_name(size_t index, const char** out);
/* Emitter document: {name, tau0_ns, dw0, xi, zpl_thz}. */
RB_API rb_status rb_emitter_from_json(const char* json_text, rb_emitter** out);
RB_API rb_status rb_emitter_to_json(const rb_emitter* emitter, char** out);
RB_API void rb_emitter_free(rb_emitter* emitter);

RB_API rb_status rb_emitter_fields(const rb_emitter* emitter, const char** name,
                                   double* tau0_s, double* dw0, double* xi,
                                   double* zpl_hz);
RB_API rb_status rb_emitter_decay_rates(const rb_emitter* emitter, double* gamma_zpl,
                                        double* gamma_psb, double* gamma31);
RB_API rb_status rb_emitter_dw_purcell(const rb_emitter* emitter, double f_p,
                                       double* dw);
RB_API rb_status rb_emitter_purcell_lifetime(const rb_emitter* emitter, double f_p,
                                             double* tau_s);
/* Solves beta_c(F) * beta_wg * beta_f * DW(F) = eta_target for F. */
RB_API rb_status rb_emitter_purcell_for_efficiency(const rb_emitter* emitter,
                                                   double beta_wg, double beta_f,
                                                   double eta_target, double* f_p);

RB_API rb_status rb_calibrate_branching(double dw0, double f_p, double dw_target,
                                        double* xi);
RB_API rb_status rb_radiative_rate(double omega_rad_s, double refractive_index,
                                   double dipole_moment_cm, double* gamma);
RB_API rb_status rb_orientation_scaled_purcell(double f_p_ideal, double alpha_rad,
                                               double* f_p);
RB_API rb_status rb_beta_c(double f_p, double* beta);
RB_API rb_status rb_emitter_efficiency(double beta_c, double beta_wg, double beta_f,
                                       double dw, double* eta);

/* Collection budget of one emitter behind a cavity/waveguide/fiber chain. */
typedef struct rb_budget_row {
  double f_p_effective; /* after cos^2(alpha) orientation scaling */
  double beta_c;
  double dw;
  double tau_s;
  double eta_emitter;
} rb_budget_row;

RB_API rb_status rb_budget(const rb_emitter* emitter, double f_p, double alpha_rad,
                           double beta_wg, double beta_f, rb_budget_row* out);

/* ---------------- repeater model ---------------- */

typedef struct rb_scenario {
  double l_km;
  double l_att_km;
  double tau_ph_s;
  double tau_cz_s;
  double eps_r;
  double eta_det;
  double l_min_km;
  int32_t n_ph_max;
} rb_scenario;

RB_API void rb_scenario_defaults(rb_scenario* out);
RB_API rb_status rb_scenario_validate(const rb_scenario* scenario);
/* Scenario document keyed in ns/km units; missing keys take defaults. */
RB_API rb_status rb_scenario_from_json(const char* json_text, rb_scenario* out);
RB_API rb_status rb_scenario_to_json(const rb_scenario* scenario, char** out);

/* Trees are passed as level arrays [b0, b1, ...]; trailing zeros reduce the
 * depth. */
RB_API rb_status rb_photon_count(const int32_t* levels, size_t depth_plus_one,
                                 int64_t* out);
RB_API rb_status rb_encoded_transmission(double eta, const int32_t* levels,
                                         size_t depth_plus_one, double* out);
RB_API rb_status rb_message_transmission(double eta_e, int32_t stations, double* out);
RB_API rb_status rb_link_efficiency(double eta_emitter, double eta_det, double l0_km,
                                    double l_att_km, double* out);
RB_API rb_status rb_secret_fraction(double eps_r, int32_t stations, double* out);
RB_API rb_status rb_tcs_rate(const int32_t* levels, size_t depth_plus_one,
                             double tau_ph_s, double tau_cz_s, double* out);

typedef struct rb_cost_breakdown {
  double cost; /* +inf when infeasible */
  double eta_link;
  double eta_e;
  double p_trans;
  double f;
  double gamma_tcs_hz;
  int64_t n_ph;
  int feasible;
} rb_cost_breakdown;

RB_API rb_status rb_repeater_cost(const rb_scenario* scenario, const int32_t* levels,
                                  size_t depth_plus_one, int32_t stations,
                                  double eta_emitter, rb_cost_breakdown* out);

/* ---------------- cost minimization ---------------- */

typedef struct rb_search_options {
  int32_t threads;          /* 0: REPEATER_BUDGET_THREADS, then hardware */
  int32_t require_two_levels; /* restrict enumeration to b1 >= 1 and b2 >= 1 */
} rb_search_options;

RB_API void rb_search_options_defaults(rb_search_options* out);

typedef struct rb_search_result {
  double c_min;
  int32_t b[3];
  int32_t m;
  int64_t n_ph;
  double gamma_tcs_hz;
  double f;
  double p_trans;
  double eta_link;
  double eta_e;
} rb_search_result;

RB_API rb_status rb_minimize_cost(const rb_scenario* scenario, double eta_emitter,
                                  const rb_search_options* options,
                                  rb_search_result* out);

typedef struct rb_sweep rb_sweep; /* opaque table */

RB_API rb_status rb_sweep_efficiency(const rb_scenario* scenario,
                                     const double* eta_grid, size_t count,
                                     const rb_search_options* options,
                                     rb_sweep** out);
RB_API size_t rb_sweep_size(const rb_sweep* sweep);
/* Returns RB_OK and fills `row` when the point succeeded; otherwise returns
 * the recorded per-point error (message via rb_sweep_error). */
RB_API rb_status rb_sweep_row(const rb_sweep* sweep, size_t index,
                              double* eta_emitter, rb_search_result* row);
RB_API const char* rb_sweep_error(const rb_sweep* sweep, size_t index);
RB_API void rb_sweep_free(rb_sweep* sweep);

/* ---------------- Gaussian-process surrogate ---------------- */

typedef struct rb_gp rb_gp; /* opaque */

typedef struct rb_gp_fit_options {
  int32_t w_hyp;      /* beyond this many observations, lengthscales freeze */
  uint64_t seed;
  int32_t multistarts;
  double lengthscale_lo; /* bounds as factors of the per-dimension data range */
  double lengthscale_hi;
} rb_gp_fit_options;

RB_API void rb_gp_fit_options_defaults(rb_gp_fit_options* out);

/* points: row-major count x dim. `previous` may be NULL; when given and the
 * data has grown past w_hyp, its lengthscales are kept and only the mean and
 * variance are refit. */
RB_API rb_status rb_gp_fit(const double* points, size_t count, size_t dim,
                           const double* values, const rb_gp_fit_options* options,
                           const rb_gp* previous, rb_gp** out);
RB_API rb_status rb_gp_predict(const rb_gp* gp, const double* point, double* mean,
                               double* variance);
RB_API rb_status rb_gp_predict_batch(const rb_gp* gp, const double* points,
                                     size_t count, double* means, double* variances);
RB_API rb_status rb_gp_log_marginal_likelihood(const rb_gp* gp, double* out);
RB_API rb_status rb_gp_hyper(const rb_gp* gp, double* mu0, double* v0,
                             double* lengthscales);
RB_API size_t rb_gp_dim(const rb_gp* gp);
RB_API size_t rb_gp_size(const rb_gp* gp);
RB_API rb_status rb_gp_to_json(const rb_gp* gp, char** out);
RB_API rb_status rb_gp_from_json(const char* json_text, rb_gp** out);
RB_API void rb_gp_free(rb_gp* gp);

/* ---------------- Bayesian optimization ---------------- */

/* Objective callback: fill *value and return RB_OK, or return nonzero /
 * produce a non-finite value to mark the evaluation as failed. */
typedef rb_status (*rb_objective_fn)(const double* point, size_t dim, double* value,
                                     void* user);

RB_API rb_status rb_expected_improvement_value(double mean, double variance,
                                               double f_min, double* out);
RB_API rb_status rb_expected_improvement(const rb_gp* gp, const double* point,
                                         double f_min, double* out);
RB_API rb_status rb_bo_suggest(const rb_gp* gp, const double* lo, const double* hi,
                               size_t dim, double f_min, uint64_t seed, double* out);

typedef struct rb_bo_options {
  uint64_t seed;
  int32_t budget;
  int32_t init_count; /* 0: max(4, 2 dim) */
  int32_t candidates;
  int32_t polish;
  int32_t w_hyp;
  int32_t raw_min_variant; /* acquisition E[min(0, f_min - f)] instead of EI */
} rb_bo_options;

RB_API void rb_bo_options_defaults(rb_bo_options* out);

typedef struct rb_bo_trace rb_bo_trace; /* opaque */

RB_API rb_status rb_bo_minimize(rb_objective_fn objective, void* user,
                                const double* lo, const double* hi, size_t dim,
                                const rb_bo_options* options, rb_bo_trace** out);
RB_API size_t rb_bo_trace_size(const rb_bo_trace* trace);
RB_API rb_status rb_bo_trace_entry(const rb_bo_trace* trace, size_t index,
                                   double* point, double* value, int* ok,
                                   double* f_min_after);
RB_API rb_status rb_bo_best(const rb_bo_trace* trace, double* point, double* f_min);
RB_API void rb_bo_trace_free(rb_bo_trace* trace);

/* ---------------- Monte Carlo uncertainty ---------------- */

typedef struct rb_mc_config {
  int32_t delta_n;
  int32_t n_min;
  double sigma_lb;
  /* Predictions must exceed validity_min to be retained when
   * has_validity_min is nonzero. */
  int32_t has_validity_min;
  double validity_min;
  double discard_warning_fraction;
} rb_mc_config;

RB_API void rb_mc_config_defaults(rb_mc_config* out);

typedef struct rb_mc_report {
  double p16, p50, p84;
  double sigma_minus, sigma_plus;
  double sigma_mc, sigma_gp, sigma_median;
  int64_t n_total, n_discarded;
  int32_t discard_warning;
} rb_mc_report;

/* Batched predictor callback: fill means[count] and variances[count]. */
typedef rb_status (*rb_predictor_fn)(const double* points, size_t count, size_t dim,
                                     double* means, double* variances, void* user);

RB_API rb_status rb_mc_training_set(const double* mean, const double* sd, size_t dim,
                                    double kappa, size_t w_train, uint64_t seed,
                                    double* out_points);
RB_API rb_status rb_mc_filter_outliers(const double* points, const double* values,
                                       size_t count, size_t dim, int32_t k_neighbors,
                                       double threshold, uint8_t* keep,
                                       size_t* removed);
RB_API rb_status rb_mc_analyze(rb_predictor_fn predictor, void* user,
                               const double* mean, const double* sd, size_t dim,
                               const rb_mc_config* config, uint64_t seed,
                               rb_mc_report* out);
RB_API rb_status rb_mc_analyze_gp(const rb_gp* gp, const double* mean,
                                  const double* sd, size_t dim,
                                  const rb_mc_config* config, uint64_t seed,
                                  rb_mc_report* out);

typedef struct rb_mc_study_options {
  double kappa;
  int32_t w_train;
  int32_t k_neighbors;
  double outlier_threshold;
  rb_gp_fit_options gp;
} rb_mc_study_options;

RB_API void rb_mc_study_options_defaults(rb_mc_study_options* out);

typedef struct rb_mc_study_counts {
  int32_t w_requested;
  int32_t w_failed;
  int32_t w_outliers_removed;
  int32_t w_used;
} rb_mc_study_counts;

RB_API rb_status rb_mc_end_to_end(rb_objective_fn expensive_fn, void* user,
                                  const double* mean, const double* sd, size_t dim,
                                  const rb_mc_study_options* study,
                                  const rb_mc_config* config, uint64_t seed,
                                  rb_mc_report* report, rb_mc_study_counts* counts);

/* ---------------- resonance estimation ---------------- */

typedef struct rb_lorentz_fit {
  double nu0_hz;
  double fwhm_hz;
  double amplitude;
  double offset;
  double q;
  double residual_norm;
  int32_t iterations;
} rb_lorentz_fit;

typedef struct rb_lorentz_options {
  int32_t fix_offset_zero;
  double gradient_tol;
  int32_t max_iterations;
  int32_t has_initial_guess;
  double guess_nu0_hz;
  double guess_fwhm_hz;
  double guess_amplitude;
  double guess_offset;
} rb_lorentz_options;

RB_API void rb_lorentz_options_defaults(rb_lorentz_options* out);
RB_API rb_status rb_fit_lorentzian(const double* frequency_hz,
                                   const double* transmission, size_t count,
                                   const rb_lorentz_options* options,
                                   rb_lorentz_fit* out);
RB_API rb_status rb_q_from_complex_frequency(double omega_re, double omega_im,
                                             double* q);

/* ---------------- composite scenario file ---------------- */

typedef struct rb_scenario_file rb_scenario_file; /* opaque */

RB_API rb_status rb_scenario_file_parse(const char* json_text,
                                        rb_scenario_file** out);
RB_API const rb_emitter* rb_scenario_file_emitter(const rb_scenario_file* file);
RB_API rb_status rb_scenario_file_chain(const rb_scenario_file* file, double* f_p,
                                        double* beta_wg, double* beta_f,
                                        double* alpha_rad);
RB_API rb_status rb_scenario_file_scenario(const rb_scenario_file* file,
                                           rb_scenario* out);
RB_API rb_status rb_scenario_file_eta_emitter(const rb_scenario_file* file,
                                              double* out);
RB_API int rb_scenario_file_has_sweep(const rb_scenario_file* file);
RB_API rb_status rb_scenario_file_sweep(const rb_scenario_file* file,
                                        double* eta_from, double* eta_to,
                                        int32_t* steps);
RB_API rb_status rb_scenario_file_to_json(const rb_scenario_file* file, char** out);
RB_API void rb_scenario_file_free(rb_scenario_file* file);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* REPEATER_BUDGET_H */
