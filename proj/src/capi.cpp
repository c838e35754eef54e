#include "repeater_budget.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "bayes_opt.hpp"
#include "common.hpp"
#include "emitter.hpp"
#include "gp.hpp"
#include "json_io.hpp"
#include "lorentz.hpp"
#include "mc.hpp"
#include "repeater.hpp"
#include "search.hpp"

struct rb_emitter {
  rb::EmitterSpec spec;
};

struct rb_sweep {
  std::vector<rb::SweepRow> rows;
};

struct rb_gp {
  rb::GpModel model;
};

struct rb_bo_trace {
  rb::BoState state;
};

struct rb_scenario_file {
  rb::ScenarioFile file;
  rb_emitter emitter_handle;
};

namespace {

thread_local std::string tls_error;

rb_status to_status(rb::Status s) {
  switch (s) {
    case rb::Status::ok: return RB_OK;
    case rb::Status::invalid_argument: return RB_ERR_INVALID_ARGUMENT;
    case rb::Status::domain_error: return RB_ERR_DOMAIN;
    case rb::Status::infeasible: return RB_ERR_INFEASIBLE;
    case rb::Status::no_convergence: return RB_ERR_NO_CONVERGENCE;
    case rb::Status::parse_error: return RB_ERR_PARSE;
    case rb::Status::io_error: return RB_ERR_IO;
    case rb::Status::internal_error: return RB_ERR_INTERNAL;
  }
  return RB_ERR_INTERNAL;
}

rb_status set_error(rb_status status, const char* message) {
  tls_error = message != nullptr ? message : "";
  return status;
}

template <typename Fn>
rb_status guarded(Fn&& fn) {
  try {
    fn();
    tls_error.clear();
    return RB_OK;
  } catch (const rb::Error& e) {
    return set_error(to_status(e.status()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(RB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(RB_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(RB_ERR_INTERNAL, "unknown error");
  }
}

rb_status require_c(bool ok, const char* message) {
  return ok ? RB_OK : set_error(RB_ERR_INVALID_ARGUMENT, message);
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

rb::TreeVector make_tree(const int32_t* levels, size_t depth_plus_one) {
  rb::require(levels != nullptr && depth_plus_one >= 1,
              rb::Status::invalid_argument, "tree levels must be non-null");
  return rb::TreeVector(
      std::vector<int32_t>(levels, levels + depth_plus_one));
}

rb::RepeaterScenario from_c(const rb_scenario& s) {
  rb::RepeaterScenario scn;
  scn.l_km = s.l_km;
  scn.l_att_km = s.l_att_km;
  scn.tau_ph_s = s.tau_ph_s;
  scn.tau_cz_s = s.tau_cz_s;
  scn.eps_r = s.eps_r;
  scn.eta_det = s.eta_det;
  scn.l_min_km = s.l_min_km;
  scn.n_ph_max = s.n_ph_max;
  return scn;
}

rb_scenario to_c(const rb::RepeaterScenario& scn) {
  rb_scenario s;
  s.l_km = scn.l_km;
  s.l_att_km = scn.l_att_km;
  s.tau_ph_s = scn.tau_ph_s;
  s.tau_cz_s = scn.tau_cz_s;
  s.eps_r = scn.eps_r;
  s.eta_det = scn.eta_det;
  s.l_min_km = scn.l_min_km;
  s.n_ph_max = scn.n_ph_max;
  return s;
}

rb_search_result to_c(const rb::SearchResult& r) {
  rb_search_result out;
  out.c_min = r.c_min;
  out.b[0] = r.best_tree.level(0);
  out.b[1] = r.best_tree.level(1);
  out.b[2] = r.best_tree.level(2);
  out.m = r.best_m;
  out.n_ph = r.n_ph;
  out.gamma_tcs_hz = r.gamma_tcs_hz;
  out.f = r.f;
  out.p_trans = r.p_trans;
  out.eta_link = r.eta_link;
  out.eta_e = r.eta_e;
  return out;
}

rb::GpFitOptions from_c(const rb_gp_fit_options& o) {
  rb::GpFitOptions opts;
  opts.w_hyp = o.w_hyp;
  opts.seed = o.seed;
  opts.multistarts = o.multistarts;
  opts.lengthscale_lo = o.lengthscale_lo;
  opts.lengthscale_hi = o.lengthscale_hi;
  return opts;
}

rb::McConfig from_c(const rb_mc_config& c) {
  rb::McConfig cfg;
  cfg.delta_n = c.delta_n;
  cfg.n_min = c.n_min;
  cfg.sigma_lb = c.sigma_lb;
  cfg.discard_warning_fraction = c.discard_warning_fraction;
  return cfg;
}

rb::ValidityPredicate validity_from_c(const rb_mc_config& c) {
  if (!c.has_validity_min) return {};
  return rb::min_validity(c.validity_min);
}

rb_mc_report to_c(const rb::McReport& r) {
  rb_mc_report out;
  out.p16 = r.p16;
  out.p50 = r.p50;
  out.p84 = r.p84;
  out.sigma_minus = r.sigma_minus;
  out.sigma_plus = r.sigma_plus;
  out.sigma_mc = r.sigma_mc;
  out.sigma_gp = r.sigma_gp;
  out.sigma_median = r.sigma_median;
  out.n_total = r.n_total;
  out.n_discarded = r.n_discarded;
  out.discard_warning = r.discard_warning ? 1 : 0;
  return out;
}

}  // namespace

extern "C" {

const char* rb_status_name(rb_status status) {
  switch (status) {
    case RB_OK: return "ok";
    case RB_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case RB_ERR_DOMAIN: return "domain_error";
    case RB_ERR_INFEASIBLE: return "infeasible";
    case RB_ERR_NO_CONVERGENCE: return "no_convergence";
    case RB_ERR_PARSE: return "parse_error";
    case RB_ERR_IO: return "io_error";
    case RB_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* rb_last_error(void) { return tls_error.c_str(); }

const char* rb_version(void) { return "0.1.0"; }

void rb_string_free(char* text) { delete[] text; }

/* ---------------- emitters ---------------- */

rb_status rb_emitter_create(const char* name, double tau0_s, double dw0, double xi,
                            double zpl_hz, rb_emitter** out) {
  if (auto rc = require_c(name != nullptr && out != nullptr, "null argument")) return rc;
  return guarded([&] {
    rb::EmitterSpec spec{name, tau0_s, dw0, xi, zpl_hz};
    spec.validate();
    *out = new rb_emitter{std::move(spec)};
  });
}

rb_status rb_emitter_preset(const char* name, rb_emitter** out) {
  if (auto rc = require_c(name != nullptr && out != nullptr, "null argument")) return rc;
  return guarded([&] { *out = new rb_emitter{rb::emitter_preset(name)}; });
}

size_t rb_emitter_preset_count(void) { return rb::emitter_presets().size(); }

rb_status rb_emitter_preset_name(size_t index, const char** out) {
  if (auto rc = require_c(out != nullptr, "null argument")) return rc;
  const auto presets = rb::emitter_presets();
  if (auto rc = require_c(index < presets.size(), "preset index out of range")) return rc;
  *out = presets[index].name.c_str();
  return RB_OK;
}

rb_status rb_emitter_from_json(const char* json_text, rb_emitter** out) {
  if (auto rc = require_c(json_text != nullptr && out != nullptr, "null argument"))
    return rc;
  return guarded([&] { *out = new rb_emitter{rb::emitter_from_json(json_text)}; });
}

rb_status rb_emitter_to_json(const rb_emitter* emitter, char** out) {
  if (auto rc = require_c(emitter != nullptr && out != nullptr, "null argument"))
    return rc;
  return guarded([&] { *out = copy_string(rb::emitter_to_json(emitter->spec)); });
}

void rb_emitter_free(rb_emitter* emitter) { delete emitter; }

rb_status rb_emitter_fields(const rb_emitter* emitter, const char** name,
                            double* tau0_s, double* dw0, double* xi, double* zpl_hz) {
  if (auto rc = require_c(emitter != nullptr, "null emitter")) return rc;
  if (name != nullptr) *name = emitter->spec.name.c_str();
  if (tau0_s != nullptr) *tau0_s = emitter->spec.tau0;
  if (dw0 != nullptr) *dw0 = emitter->spec.dw0;
  if (xi != nullptr) *xi = emitter->spec.xi;
  if (zpl_hz != nullptr) *zpl_hz = emitter->spec.zpl_frequency;
  return RB_OK;
}

rb_status rb_emitter_decay_rates(const rb_emitter* emitter, double* gamma_zpl,
                                 double* gamma_psb, double* gamma31) {
  if (auto rc = require_c(emitter != nullptr && gamma_zpl != nullptr &&
                              gamma_psb != nullptr && gamma31 != nullptr,
                          "null argument"))
    return rc;
  return guarded([&] {
    const rb::DecayRates rates = rb::decay_rates(emitter->spec);
    *gamma_zpl = rates.gamma_zpl;
    *gamma_psb = rates.gamma_psb;
    *gamma31 = rates.gamma31;
  });
}

rb_status rb_emitter_dw_purcell(const rb_emitter* emitter, double f_p, double* dw) {
  if (auto rc = require_c(emitter != nullptr && dw != nullptr, "null argument"))
    return rc;
  return guarded([&] { *dw = rb::dw_purcell(emitter->spec, f_p); });
}

rb_status rb_emitter_purcell_lifetime(const rb_emitter* emitter, double f_p,
                                      double* tau_s) {
  if (auto rc = require_c(emitter != nullptr && tau_s != nullptr, "null argument"))
    return rc;
  return guarded([&] { *tau_s = rb::purcell_lifetime(emitter->spec, f_p); });
}

rb_status rb_emitter_purcell_for_efficiency(const rb_emitter* emitter, double beta_wg,
                                            double beta_f, double eta_target,
                                            double* f_p) {
  if (auto rc = require_c(emitter != nullptr && f_p != nullptr, "null argument"))
    return rc;
  return guarded([&] {
    *f_p = rb::purcell_factor_for_efficiency(emitter->spec, beta_wg, beta_f,
                                             eta_target);
  });
}

rb_status rb_calibrate_branching(double dw0, double f_p, double dw_target,
                                 double* xi) {
  if (auto rc = require_c(xi != nullptr, "null argument")) return rc;
  return guarded([&] { *xi = rb::calibrate_branching(dw0, f_p, dw_target); });
}

rb_status rb_radiative_rate(double omega_rad_s, double refractive_index,
                            double dipole_moment_cm, double* gamma) {
  if (auto rc = require_c(gamma != nullptr, "null argument")) return rc;
  return guarded([&] {
    *gamma = rb::radiative_rate(omega_rad_s, refractive_index, dipole_moment_cm);
  });
}

rb_status rb_orientation_scaled_purcell(double f_p_ideal, double alpha_rad,
                                        double* f_p) {
  if (auto rc = require_c(f_p != nullptr, "null argument")) return rc;
  return guarded([&] { *f_p = rb::orientation_scaled_purcell(f_p_ideal, alpha_rad); });
}

rb_status rb_beta_c(double f_p, double* beta) {
  if (auto rc = require_c(beta != nullptr, "null argument")) return rc;
  return guarded([&] { *beta = rb::beta_c(f_p); });
}

rb_status rb_emitter_efficiency(double beta_c, double beta_wg, double beta_f,
                                double dw, double* eta) {
  if (auto rc = require_c(eta != nullptr, "null argument")) return rc;
  return guarded([&] {
    *eta = rb::emitter_efficiency(rb::EfficiencyChain{beta_c, beta_wg, beta_f, dw});
  });
}

rb_status rb_budget(const rb_emitter* emitter, double f_p, double alpha_rad,
                    double beta_wg, double beta_f, rb_budget_row* out) {
  if (auto rc = require_c(emitter != nullptr && out != nullptr, "null argument"))
    return rc;
  return guarded([&] {
    const double f_eff = rb::orientation_scaled_purcell(f_p, alpha_rad);
    out->f_p_effective = f_eff;
    out->beta_c = rb::beta_c(f_eff);
    out->dw = rb::dw_purcell(emitter->spec, f_eff);
    out->tau_s = rb::purcell_lifetime(emitter->spec, f_eff);
    out->eta_emitter = rb::emitter_efficiency(
        rb::EfficiencyChain{out->beta_c, beta_wg, beta_f, out->dw});
  });
}

/* ---------------- repeater model ---------------- */

void rb_scenario_defaults(rb_scenario* out) {
  if (out == nullptr) return;
  *out = to_c(rb::RepeaterScenario{});
}

rb_status rb_scenario_validate(const rb_scenario* scenario) {
  if (auto rc = require_c(scenario != nullptr, "null scenario")) return rc;
  return guarded([&] { from_c(*scenario).validate(); });
}

rb_status rb_scenario_from_json(const char* json_text, rb_scenario* out) {
  if (auto rc = require_c(json_text != nullptr && out != nullptr, "null argument"))
    return rc;
  return guarded([&] { *out = to_c(rb::scenario_from_json(json_text)); });
}

rb_status rb_scenario_to_json(const rb_scenario* scenario, char** out) {
  if (auto rc = require_c(scenario != nullptr && out != nullptr, "null argument"))
    return rc;
  return guarded([&] { *out = copy_string(rb::scenario_to_json(from_c(*scenario))); });
}

rb_status rb_photon_count(const int32_t* levels, size_t depth_plus_one, int64_t* out) {
  if (auto rc = require_c(out != nullptr, "null argument")) return rc;
  return guarded([&] { *out = make_tree(levels, depth_plus_one).photon_count(); });
}

rb_status rb_encoded_transmission(double eta, const int32_t* levels,
                                  size_t depth_plus_one, double* out) {
  if (auto rc = require_c(out != nullptr, "null argument")) return rc;
  return guarded([&] {
    *out = rb::encoded_transmission(eta, make_tree(levels, depth_plus_one));
  });
}

rb_status rb_message_transmission(double eta_e, int32_t stations, double* out) {
  if (auto rc = require_c(out != nullptr, "null argument")) return rc;
  return guarded([&] { *out = rb::message_transmission(eta_e, stations); });
}

rb_status rb_link_efficiency(double eta_emitter, double eta_det, double l0_km,
                             double l_att_km, double* out) {
  if (auto rc = require_c(out != nullptr, "null argument")) return rc;
  return guarded([&] {
    *out = rb::link_efficiency(eta_emitter, eta_det, l0_km, l_att_km);
  });
}

rb_status rb_secret_fraction(double eps_r, int32_t stations, double* out) {
  if (auto rc = require_c(out != nullptr, "null argument")) return rc;
  return guarded([&] { *out = rb::secret_fraction(eps_r, stations); });
}

rb_status rb_tcs_rate(const int32_t* levels, size_t depth_plus_one, double tau_ph_s,
                      double tau_cz_s, double* out) {
  if (auto rc = require_c(out != nullptr, "null argument")) return rc;
  return guarded([&] {
    *out = rb::tcs_generation_rate(make_tree(levels, depth_plus_one), tau_ph_s,
                                   tau_cz_s);
  });
}

rb_status rb_repeater_cost(const rb_scenario* scenario, const int32_t* levels,
                           size_t depth_plus_one, int32_t stations,
                           double eta_emitter, rb_cost_breakdown* out) {
  if (auto rc = require_c(scenario != nullptr && out != nullptr, "null argument"))
    return rc;
  return guarded([&] {
    const rb::CostBreakdown cb = rb::repeater_cost(
        from_c(*scenario), make_tree(levels, depth_plus_one), stations, eta_emitter);
    out->cost = cb.cost;
    out->eta_link = cb.eta_link;
    out->eta_e = cb.eta_e;
    out->p_trans = cb.p_trans;
    out->f = cb.f;
    out->gamma_tcs_hz = cb.gamma_tcs_hz;
    out->n_ph = cb.n_ph;
    out->feasible = cb.feasible ? 1 : 0;
  });
}

/* ---------------- cost minimization ---------------- */

void rb_search_options_defaults(rb_search_options* out) {
  if (out == nullptr) return;
  out->threads = 0;
  out->require_two_levels = 0;
}

rb_status rb_minimize_cost(const rb_scenario* scenario, double eta_emitter,
                           const rb_search_options* options, rb_search_result* out) {
  if (auto rc = require_c(scenario != nullptr && out != nullptr, "null argument"))
    return rc;
  return guarded([&] {
    rb::SearchOptions opts;
    if (options != nullptr) {
      opts.threads = options->threads;
      opts.require_two_levels = options->require_two_levels != 0;
    }
    *out = to_c(rb::minimize_cost(from_c(*scenario), eta_emitter, opts));
  });
}

rb_status rb_sweep_efficiency(const rb_scenario* scenario, const double* eta_grid,
                              size_t count, const rb_search_options* options,
                              rb_sweep** out) {
  if (auto rc = require_c(scenario != nullptr && eta_grid != nullptr &&
                              out != nullptr && count >= 1,
                          "null argument or empty grid"))
    return rc;
  return guarded([&] {
    rb::SearchOptions opts;
    if (options != nullptr) {
      opts.threads = options->threads;
      opts.require_two_levels = options->require_two_levels != 0;
    }
    auto sweep = std::make_unique<rb_sweep>();
    sweep->rows = rb::sweep_efficiency(
        from_c(*scenario), std::span<const double>(eta_grid, count), opts);
    *out = sweep.release();
  });
}

size_t rb_sweep_size(const rb_sweep* sweep) {
  return sweep != nullptr ? sweep->rows.size() : 0;
}

rb_status rb_sweep_row(const rb_sweep* sweep, size_t index, double* eta_emitter,
                       rb_search_result* row) {
  if (auto rc = require_c(sweep != nullptr && index < sweep->rows.size(),
                          "sweep index out of range"))
    return rc;
  const rb::SweepRow& r = sweep->rows[index];
  if (eta_emitter != nullptr) *eta_emitter = r.eta_emitter;
  if (!r.result.has_value()) {
    return set_error(RB_ERR_INFEASIBLE, r.error.c_str());
  }
  if (row != nullptr) *row = to_c(*r.result);
  return RB_OK;
}

const char* rb_sweep_error(const rb_sweep* sweep, size_t index) {
  if (sweep == nullptr || index >= sweep->rows.size()) return "";
  return sweep->rows[index].error.c_str();
}

void rb_sweep_free(rb_sweep* sweep) { delete sweep; }

/* ---------------- Gaussian-process surrogate ---------------- */

void rb_gp_fit_options_defaults(rb_gp_fit_options* out) {
  if (out == nullptr) return;
  const rb::GpFitOptions opts;
  out->w_hyp = opts.w_hyp;
  out->seed = opts.seed;
  out->multistarts = opts.multistarts;
  out->lengthscale_lo = opts.lengthscale_lo;
  out->lengthscale_hi = opts.lengthscale_hi;
}

rb_status rb_gp_fit(const double* points, size_t count, size_t dim,
                    const double* values, const rb_gp_fit_options* options,
                    const rb_gp* previous, rb_gp** out) {
  if (auto rc = require_c(points != nullptr && values != nullptr && out != nullptr &&
                              count >= 1 && dim >= 1,
                          "null argument or empty data"))
    return rc;
  return guarded([&] {
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                         Eigen::RowMajor>>
        inputs(points, static_cast<Eigen::Index>(count),
               static_cast<Eigen::Index>(dim));
    const Eigen::Map<const Eigen::VectorXd> y(values,
                                              static_cast<Eigen::Index>(count));
    rb::GpFitOptions opts;
    if (options != nullptr) opts = from_c(*options);
    *out = new rb_gp{rb::GpModel::fit(inputs, y, opts,
                                      previous != nullptr ? &previous->model
                                                          : nullptr)};
  });
}

rb_status rb_gp_predict(const rb_gp* gp, const double* point, double* mean,
                        double* variance) {
  if (auto rc = require_c(gp != nullptr && point != nullptr && mean != nullptr &&
                              variance != nullptr,
                          "null argument"))
    return rc;
  return guarded([&] {
    const Eigen::Map<const Eigen::VectorXd> p(point, gp->model.dim());
    const auto pred = gp->model.predict(p);
    *mean = pred.mean;
    *variance = pred.variance;
  });
}

rb_status rb_gp_predict_batch(const rb_gp* gp, const double* points, size_t count,
                              double* means, double* variances) {
  if (auto rc = require_c(gp != nullptr && points != nullptr && means != nullptr &&
                              variances != nullptr && count >= 1,
                          "null argument"))
    return rc;
  return guarded([&] {
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                         Eigen::RowMajor>>
        p(points, static_cast<Eigen::Index>(count), gp->model.dim());
    Eigen::VectorXd m, v;
    gp->model.predict_batch(p, m, v);
    Eigen::Map<Eigen::VectorXd>(means, m.size()) = m;
    Eigen::Map<Eigen::VectorXd>(variances, v.size()) = v;
  });
}

rb_status rb_gp_log_marginal_likelihood(const rb_gp* gp, double* out) {
  if (auto rc = require_c(gp != nullptr && out != nullptr, "null argument")) return rc;
  return guarded([&] { *out = gp->model.log_marginal_likelihood(); });
}

rb_status rb_gp_hyper(const rb_gp* gp, double* mu0, double* v0, double* lengthscales) {
  if (auto rc = require_c(gp != nullptr, "null gp")) return rc;
  const rb::GpHyper& h = gp->model.hyper();
  if (mu0 != nullptr) *mu0 = h.mu0;
  if (v0 != nullptr) *v0 = h.v0;
  if (lengthscales != nullptr) {
    for (Eigen::Index d = 0; d < h.lengthscales.size(); ++d) {
      lengthscales[d] = h.lengthscales[d];
    }
  }
  return RB_OK;
}

size_t rb_gp_dim(const rb_gp* gp) {
  return gp != nullptr ? static_cast<size_t>(gp->model.dim()) : 0;
}

size_t rb_gp_size(const rb_gp* gp) {
  return gp != nullptr ? static_cast<size_t>(gp->model.size()) : 0;
}

rb_status rb_gp_to_json(const rb_gp* gp, char** out) {
  if (auto rc = require_c(gp != nullptr && out != nullptr, "null argument")) return rc;
  return guarded([&] { *out = copy_string(gp->model.to_json()); });
}

rb_status rb_gp_from_json(const char* json_text, rb_gp** out) {
  if (auto rc = require_c(json_text != nullptr && out != nullptr, "null argument"))
    return rc;
  return guarded([&] { *out = new rb_gp{rb::GpModel::from_json(json_text)}; });
}

void rb_gp_free(rb_gp* gp) { delete gp; }

/* ---------------- Bayesian optimization ---------------- */

rb_status rb_expected_improvement_value(double mean, double variance, double f_min,
                                        double* out) {
  if (auto rc = require_c(out != nullptr, "null argument")) return rc;
  return guarded([&] { *out = rb::expected_improvement_value(mean, variance, f_min); });
}

rb_status rb_expected_improvement(const rb_gp* gp, const double* point, double f_min,
                                  double* out) {
  if (auto rc = require_c(gp != nullptr && point != nullptr && out != nullptr,
                          "null argument"))
    return rc;
  return guarded([&] {
    const Eigen::Map<const Eigen::VectorXd> p(point, gp->model.dim());
    *out = rb::expected_improvement(gp->model, p, f_min);
  });
}

rb_status rb_bo_suggest(const rb_gp* gp, const double* lo, const double* hi,
                        size_t dim, double f_min, uint64_t seed, double* out) {
  if (auto rc = require_c(gp != nullptr && lo != nullptr && hi != nullptr &&
                              out != nullptr && dim >= 1,
                          "null argument"))
    return rc;
  return guarded([&] {
    rb::BoDomain domain;
    domain.lo = Eigen::Map<const Eigen::VectorXd>(lo, static_cast<Eigen::Index>(dim));
    domain.hi = Eigen::Map<const Eigen::VectorXd>(hi, static_cast<Eigen::Index>(dim));
    const Eigen::VectorXd p = rb::suggest(gp->model, domain, f_min, seed);
    Eigen::Map<Eigen::VectorXd>(out, p.size()) = p;
  });
}

void rb_bo_options_defaults(rb_bo_options* out) {
  if (out == nullptr) return;
  const rb::BoOptions opts;
  out->seed = opts.seed;
  out->budget = opts.budget;
  out->init_count = opts.init_count;
  out->candidates = opts.candidates;
  out->polish = opts.polish;
  out->w_hyp = opts.gp.w_hyp;
  out->raw_min_variant = opts.raw_min_variant ? 1 : 0;
}

rb_status rb_bo_minimize(rb_objective_fn objective, void* user, const double* lo,
                         const double* hi, size_t dim, const rb_bo_options* options,
                         rb_bo_trace** out) {
  if (auto rc = require_c(objective != nullptr && lo != nullptr && hi != nullptr &&
                              options != nullptr && out != nullptr && dim >= 1,
                          "null argument"))
    return rc;
  return guarded([&] {
    rb::BoDomain domain;
    domain.lo = Eigen::Map<const Eigen::VectorXd>(lo, static_cast<Eigen::Index>(dim));
    domain.hi = Eigen::Map<const Eigen::VectorXd>(hi, static_cast<Eigen::Index>(dim));
    rb::BoOptions opts;
    opts.seed = options->seed;
    opts.budget = options->budget;
    opts.init_count = options->init_count;
    opts.candidates = options->candidates;
    opts.polish = options->polish;
    opts.gp.w_hyp = options->w_hyp;
    opts.raw_min_variant = options->raw_min_variant != 0;
    const auto fn = [&](const Eigen::VectorXd& p) {
      double value = 0.0;
      const rb_status rc =
          objective(p.data(), static_cast<size_t>(p.size()), &value, user);
      if (rc != RB_OK) {
        rb::fail(rb::Status::internal_error, "objective evaluation failed");
      }
      return value;
    };
    *out = new rb_bo_trace{rb::minimize(fn, domain, opts)};
  });
}

size_t rb_bo_trace_size(const rb_bo_trace* trace) {
  return trace != nullptr ? trace->state.history.size() : 0;
}

rb_status rb_bo_trace_entry(const rb_bo_trace* trace, size_t index, double* point,
                            double* value, int* ok, double* f_min_after) {
  if (auto rc = require_c(trace != nullptr && index < trace->state.history.size(),
                          "trace index out of range"))
    return rc;
  const rb::BoEvaluation& e = trace->state.history[index];
  if (point != nullptr) {
    Eigen::Map<Eigen::VectorXd>(point, e.point.size()) = e.point;
  }
  if (value != nullptr) *value = e.value;
  if (ok != nullptr) *ok = e.ok ? 1 : 0;
  if (f_min_after != nullptr) *f_min_after = e.f_min_after;
  return RB_OK;
}

rb_status rb_bo_best(const rb_bo_trace* trace, double* point, double* f_min) {
  if (auto rc = require_c(trace != nullptr, "null trace")) return rc;
  if (auto rc = require_c(trace->state.best_point.size() > 0,
                          "no successful evaluation recorded"))
    return rc;
  if (point != nullptr) {
    Eigen::Map<Eigen::VectorXd>(point, trace->state.best_point.size()) =
        trace->state.best_point;
  }
  if (f_min != nullptr) *f_min = trace->state.f_min;
  return RB_OK;
}

void rb_bo_trace_free(rb_bo_trace* trace) { delete trace; }

/* ---------------- Monte Carlo uncertainty ---------------- */

void rb_mc_config_defaults(rb_mc_config* out) {
  if (out == nullptr) return;
  const rb::McConfig cfg;
  out->delta_n = cfg.delta_n;
  out->n_min = cfg.n_min;
  out->sigma_lb = cfg.sigma_lb;
  out->has_validity_min = 0;
  out->validity_min = 0.0;
  out->discard_warning_fraction = cfg.discard_warning_fraction;
}

rb_status rb_mc_training_set(const double* mean, const double* sd, size_t dim,
                             double kappa, size_t w_train, uint64_t seed,
                             double* out_points) {
  if (auto rc = require_c(mean != nullptr && sd != nullptr && out_points != nullptr &&
                              dim >= 1 && w_train >= 1,
                          "null argument"))
    return rc;
  return guarded([&] {
    rb::MvnSpec device;
    device.mean = Eigen::Map<const Eigen::VectorXd>(mean, static_cast<Eigen::Index>(dim));
    device.sd = Eigen::Map<const Eigen::VectorXd>(sd, static_cast<Eigen::Index>(dim));
    const Eigen::MatrixXd points = rb::make_training_set(
        device, kappa, static_cast<int32_t>(w_train), seed);
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        out_points, points.rows(), points.cols()) = points;
  });
}

rb_status rb_mc_filter_outliers(const double* points, const double* values,
                                size_t count, size_t dim, int32_t k_neighbors,
                                double threshold, uint8_t* keep, size_t* removed) {
  if (auto rc = require_c(points != nullptr && values != nullptr && keep != nullptr &&
                              removed != nullptr && count >= 1 && dim >= 1,
                          "null argument"))
    return rc;
  return guarded([&] {
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                         Eigen::RowMajor>>
        p(points, static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
    const Eigen::Map<const Eigen::VectorXd> v(values,
                                              static_cast<Eigen::Index>(count));
    const rb::OutlierFilter filter = rb::filter_outliers(p, v, k_neighbors, threshold);
    for (size_t i = 0; i < count; ++i) keep[i] = 0;
    for (const int32_t idx : filter.kept) keep[static_cast<size_t>(idx)] = 1;
    *removed = static_cast<size_t>(filter.removed);
  });
}

rb_status rb_mc_analyze(rb_predictor_fn predictor, void* user, const double* mean,
                        const double* sd, size_t dim, const rb_mc_config* config,
                        uint64_t seed, rb_mc_report* out) {
  if (auto rc = require_c(predictor != nullptr && mean != nullptr && sd != nullptr &&
                              config != nullptr && out != nullptr && dim >= 1,
                          "null argument"))
    return rc;
  return guarded([&] {
    rb::MvnSpec dist;
    dist.mean = Eigen::Map<const Eigen::VectorXd>(mean, static_cast<Eigen::Index>(dim));
    dist.sd = Eigen::Map<const Eigen::VectorXd>(sd, static_cast<Eigen::Index>(dim));
    const rb::BatchPredictor batch = [&](const Eigen::MatrixXd& pts,
                                         Eigen::VectorXd& means,
                                         Eigen::VectorXd& vars) {
      // Hand the callback a row-major copy so the C layout is contiguous.
      const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
          rows = pts;
      means.resize(pts.rows());
      vars.resize(pts.rows());
      const rb_status rc =
          predictor(rows.data(), static_cast<size_t>(pts.rows()),
                    static_cast<size_t>(pts.cols()), means.data(), vars.data(), user);
      if (rc != RB_OK) {
        rb::fail(rb::Status::internal_error, "predictor callback failed");
      }
    };
    *out = to_c(rb::mc_analyze(batch, dist, from_c(*config), seed,
                               validity_from_c(*config)));
  });
}

rb_status rb_mc_analyze_gp(const rb_gp* gp, const double* mean, const double* sd,
                           size_t dim, const rb_mc_config* config, uint64_t seed,
                           rb_mc_report* out) {
  if (auto rc = require_c(gp != nullptr && mean != nullptr && sd != nullptr &&
                              config != nullptr && out != nullptr && dim >= 1,
                          "null argument"))
    return rc;
  return guarded([&] {
    rb::MvnSpec dist;
    dist.mean = Eigen::Map<const Eigen::VectorXd>(mean, static_cast<Eigen::Index>(dim));
    dist.sd = Eigen::Map<const Eigen::VectorXd>(sd, static_cast<Eigen::Index>(dim));
    *out = to_c(rb::mc_analyze(rb::gp_predictor(gp->model), dist, from_c(*config),
                               seed, validity_from_c(*config)));
  });
}

void rb_mc_study_options_defaults(rb_mc_study_options* out) {
  if (out == nullptr) return;
  const rb::StudyOptions opts;
  out->kappa = opts.kappa;
  out->w_train = opts.w_train;
  out->k_neighbors = opts.k_neighbors;
  out->outlier_threshold = opts.outlier_threshold;
  rb_gp_fit_options_defaults(&out->gp);
}

rb_status rb_mc_end_to_end(rb_objective_fn expensive_fn, void* user,
                           const double* mean, const double* sd, size_t dim,
                           const rb_mc_study_options* study,
                           const rb_mc_config* config, uint64_t seed,
                           rb_mc_report* report, rb_mc_study_counts* counts) {
  if (auto rc = require_c(expensive_fn != nullptr && mean != nullptr &&
                              sd != nullptr && study != nullptr &&
                              config != nullptr && report != nullptr && dim >= 1,
                          "null argument"))
    return rc;
  return guarded([&] {
    rb::MvnSpec device;
    device.mean = Eigen::Map<const Eigen::VectorXd>(mean, static_cast<Eigen::Index>(dim));
    device.sd = Eigen::Map<const Eigen::VectorXd>(sd, static_cast<Eigen::Index>(dim));
    rb::StudyOptions opts;
    opts.kappa = study->kappa;
    opts.w_train = study->w_train;
    opts.k_neighbors = study->k_neighbors;
    opts.outlier_threshold = study->outlier_threshold;
    opts.gp = from_c(study->gp);
    const auto fn = [&](const Eigen::VectorXd& p) {
      double value = 0.0;
      const rb_status rc =
          expensive_fn(p.data(), static_cast<size_t>(p.size()), &value, user);
      if (rc != RB_OK) {
        rb::fail(rb::Status::internal_error, "expensive model evaluation failed");
      }
      return value;
    };
    const rb::StudyReport out = rb::end_to_end_study(
        fn, device, opts, from_c(*config), seed, validity_from_c(*config));
    *report = to_c(out.mc);
    if (counts != nullptr) {
      counts->w_requested = out.counts.w_requested;
      counts->w_failed = out.counts.w_failed;
      counts->w_outliers_removed = out.counts.w_outliers_removed;
      counts->w_used = out.counts.w_used;
    }
  });
}

/* ---------------- resonance estimation ---------------- */

void rb_lorentz_options_defaults(rb_lorentz_options* out) {
  if (out == nullptr) return;
  const rb::LorentzOptions opts;
  out->fix_offset_zero = opts.fix_offset_zero ? 1 : 0;
  out->gradient_tol = opts.gradient_tol;
  out->max_iterations = opts.max_iterations;
  out->has_initial_guess = 0;
  out->guess_nu0_hz = 0.0;
  out->guess_fwhm_hz = 0.0;
  out->guess_amplitude = 0.0;
  out->guess_offset = 0.0;
}

rb_status rb_fit_lorentzian(const double* frequency_hz, const double* transmission,
                            size_t count, const rb_lorentz_options* options,
                            rb_lorentz_fit* out) {
  if (auto rc = require_c(frequency_hz != nullptr && transmission != nullptr &&
                              out != nullptr,
                          "null argument"))
    return rc;
  return guarded([&] {
    rb::LorentzOptions opts;
    if (options != nullptr) {
      opts.fix_offset_zero = options->fix_offset_zero != 0;
      opts.gradient_tol = options->gradient_tol;
      opts.max_iterations = options->max_iterations;
      if (options->has_initial_guess) {
        rb::LorentzianFit guess;
        guess.nu0 = options->guess_nu0_hz;
        guess.fwhm = options->guess_fwhm_hz;
        guess.amplitude = options->guess_amplitude;
        guess.offset = options->guess_offset;
        opts.initial_guess = guess;
      }
    }
    const rb::LorentzianFit fit = rb::fit_lorentzian(
        std::span<const double>(frequency_hz, count),
        std::span<const double>(transmission, count), opts);
    out->nu0_hz = fit.nu0;
    out->fwhm_hz = fit.fwhm;
    out->amplitude = fit.amplitude;
    out->offset = fit.offset;
    out->q = fit.q;
    out->residual_norm = fit.residual_norm;
    out->iterations = fit.iterations;
  });
}

rb_status rb_q_from_complex_frequency(double omega_re, double omega_im, double* q) {
  if (auto rc = require_c(q != nullptr, "null argument")) return rc;
  return guarded([&] {
    *q = rb::q_from_complex_frequency(std::complex<double>(omega_re, omega_im));
  });
}

/* ---------------- composite scenario file ---------------- */

rb_status rb_scenario_file_parse(const char* json_text, rb_scenario_file** out) {
  if (auto rc = require_c(json_text != nullptr && out != nullptr, "null argument"))
    return rc;
  return guarded([&] {
    auto file = std::make_unique<rb_scenario_file>();
    file->file = rb::scenario_file_from_json(json_text);
    file->emitter_handle.spec = file->file.emitter;
    *out = file.release();
  });
}

const rb_emitter* rb_scenario_file_emitter(const rb_scenario_file* file) {
  return file != nullptr ? &file->emitter_handle : nullptr;
}

rb_status rb_scenario_file_chain(const rb_scenario_file* file, double* f_p,
                                 double* beta_wg, double* beta_f, double* alpha_rad) {
  if (auto rc = require_c(file != nullptr, "null scenario file")) return rc;
  if (f_p != nullptr) *f_p = file->file.f_p;
  if (beta_wg != nullptr) *beta_wg = file->file.beta_wg;
  if (beta_f != nullptr) *beta_f = file->file.beta_f;
  if (alpha_rad != nullptr) *alpha_rad = file->file.alpha_rad;
  return RB_OK;
}

rb_status rb_scenario_file_scenario(const rb_scenario_file* file, rb_scenario* out) {
  if (auto rc = require_c(file != nullptr && out != nullptr, "null argument"))
    return rc;
  *out = to_c(file->file.repeater);
  return RB_OK;
}

rb_status rb_scenario_file_eta_emitter(const rb_scenario_file* file, double* out) {
  if (auto rc = require_c(file != nullptr && out != nullptr, "null argument"))
    return rc;
  return guarded([&] { *out = file->file.eta_emitter(); });
}

int rb_scenario_file_has_sweep(const rb_scenario_file* file) {
  return file != nullptr && file->file.sweep.has_value() ? 1 : 0;
}

rb_status rb_scenario_file_sweep(const rb_scenario_file* file, double* eta_from,
                                 double* eta_to, int32_t* steps) {
  if (auto rc = require_c(file != nullptr, "null scenario file")) return rc;
  if (auto rc = require_c(file->file.sweep.has_value(), "scenario has no sweep block"))
    return rc;
  if (eta_from != nullptr) *eta_from = file->file.sweep->eta_from;
  if (eta_to != nullptr) *eta_to = file->file.sweep->eta_to;
  if (steps != nullptr) *steps = file->file.sweep->steps;
  return RB_OK;
}

rb_status rb_scenario_file_to_json(const rb_scenario_file* file, char** out) {
  if (auto rc = require_c(file != nullptr && out != nullptr, "null argument"))
    return rc;
  return guarded([&] { *out = copy_string(rb::scenario_file_to_json(file->file)); });
}

void rb_scenario_file_free(rb_scenario_file* file) { delete file; }

} /* extern "C" */
