// Command-line front end. All functionality goes through the C API in
// repeater_budget.h; this file only handles argument parsing and file I/O.

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "repeater_budget.h"

namespace {

using nlohmann::json;

struct CliError {
  rb_status status;
  std::string message;
};

[[noreturn]] void raise(rb_status status, const std::string& message) {
  throw CliError{status, message};
}

void check(rb_status status) {
  if (status != RB_OK) raise(status, rb_last_error());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(RB_ERR_IO, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(RB_ERR_IO, "cannot write '" + path + "'");
  out << content;
  if (!out) raise(RB_ERR_IO, "write to '" + path + "' failed");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct ScenarioFileHandle {
  rb_scenario_file* file = nullptr;
  ~ScenarioFileHandle() { rb_scenario_file_free(file); }
};

struct EmitterHandle {
  rb_emitter* emitter = nullptr;
  ~EmitterHandle() { rb_emitter_free(emitter); }
};

struct GpHandle {
  rb_gp* gp = nullptr;
  ~GpHandle() { rb_gp_free(gp); }
};

void load_scenario_file(const std::string& path, ScenarioFileHandle& handle) {
  check(rb_scenario_file_parse(read_file(path).c_str(), &handle.file));
}

json search_result_to_json(double eta_emitter, const rb_search_result& r) {
  json j;
  j["eta_emitter"] = eta_emitter;
  j["c_min"] = r.c_min;
  j["b"] = {r.b[0], r.b[1], r.b[2]};
  j["m"] = r.m;
  j["n_ph"] = r.n_ph;
  j["gamma_tcs_hz"] = r.gamma_tcs_hz;
  j["f"] = r.f;
  j["p_trans"] = r.p_trans;
  j["eta"] = r.eta_link;
  j["eta_e"] = r.eta_e;
  return j;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << '\n';
  } else {
    write_file(out_path, content);
  }
}

// ---- budget ----

int cmd_budget(const std::string& scenario_path, const std::string& out_path) {
  ScenarioFileHandle handle;
  load_scenario_file(scenario_path, handle);
  double f_p = 0.0, beta_wg = 0.0, beta_f = 0.0, alpha = 0.0;
  check(rb_scenario_file_chain(handle.file, &f_p, &beta_wg, &beta_f, &alpha));
  const rb_emitter* emitter = rb_scenario_file_emitter(handle.file);

  const auto budget_json = [&](const rb_emitter* e) {
    rb_budget_row row;
    check(rb_budget(e, f_p, alpha, beta_wg, beta_f, &row));
    const char* name = nullptr;
    double tau0 = 0.0, dw0 = 0.0, xi = 0.0, zpl = 0.0;
    check(rb_emitter_fields(e, &name, &tau0, &dw0, &xi, &zpl));
    json j;
    j["name"] = name;
    j["tau0_ns"] = tau0 * 1e9;
    j["dw0"] = dw0;
    j["xi"] = xi;
    j["zpl_thz"] = zpl * 1e-12;
    j["f_p_effective"] = row.f_p_effective;
    j["beta_c"] = row.beta_c;
    j["dw"] = row.dw;
    j["tau_ns"] = row.tau_s * 1e9;
    j["eta_emitter"] = row.eta_emitter;
    return j;
  };

  json report;
  report["chain"] = {{"f_p", f_p},
                     {"alpha_deg", alpha * 180.0 / 3.141592653589793},
                     {"beta_wg", beta_wg},
                     {"beta_f", beta_f}};
  report["emitter"] = budget_json(emitter);
  json presets = json::array();
  for (size_t i = 0; i < rb_emitter_preset_count(); ++i) {
    const char* name = nullptr;
    check(rb_emitter_preset_name(i, &name));
    EmitterHandle preset;
    check(rb_emitter_preset(name, &preset.emitter));
    presets.push_back(budget_json(preset.emitter));
  }
  report["presets"] = presets;
  emit(out_path, report.dump(2) + "\n");
  return 0;
}

// ---- sweep / optimize ----

std::string sweep_to_csv(const rb_sweep* sweep) {
  std::ostringstream csv;
  csv << "eta_emitter,b0,b1,b2,m,n_ph,eta,eta_e,p_trans,f,gamma_tcs_hz,cost\n";
  for (size_t i = 0; i < rb_sweep_size(sweep); ++i) {
    double eta_emitter = 0.0;
    rb_search_result row;
    if (rb_sweep_row(sweep, i, &eta_emitter, &row) != RB_OK) {
      std::cerr << json{{"warning",
                         {{"eta_emitter", eta_emitter},
                          {"message", rb_sweep_error(sweep, i)}}}}
                       .dump()
                << "\n";
      continue;
    }
    csv << format_double(eta_emitter) << ',' << row.b[0] << ',' << row.b[1] << ','
        << row.b[2] << ',' << row.m << ',' << row.n_ph << ','
        << format_double(row.eta_link) << ',' << format_double(row.eta_e) << ','
        << format_double(row.p_trans) << ',' << format_double(row.f) << ','
        << format_double(row.gamma_tcs_hz) << ',' << format_double(row.c_min)
        << '\n';
  }
  return csv.str();
}

int cmd_sweep(const std::string& scenario_path, std::optional<double> eta_from,
              std::optional<double> eta_to, std::optional<int> steps, int threads,
              bool require_two_levels, const std::string& out_path) {
  ScenarioFileHandle handle;
  load_scenario_file(scenario_path, handle);
  rb_scenario scenario;
  check(rb_scenario_file_scenario(handle.file, &scenario));

  double from = 0.0, to = 0.0;
  int32_t count = 0;
  if (eta_from && eta_to && steps) {
    from = *eta_from;
    to = *eta_to;
    count = *steps;
  } else if (rb_scenario_file_has_sweep(handle.file)) {
    check(rb_scenario_file_sweep(handle.file, &from, &to, &count));
  } else {
    raise(RB_ERR_INVALID_ARGUMENT,
          "no sweep grid: pass --eta-from/--eta-to/--steps or add a 'sweep' "
          "block to the scenario file");
  }
  if (count < 1) raise(RB_ERR_INVALID_ARGUMENT, "sweep needs steps >= 1");

  std::vector<double> grid(static_cast<size_t>(count));
  for (int32_t i = 0; i < count; ++i) {
    grid[static_cast<size_t>(i)] =
        count == 1 ? from : from + (to - from) * i / (count - 1);
  }

  rb_search_options options;
  rb_search_options_defaults(&options);
  options.threads = threads;
  options.require_two_levels = require_two_levels ? 1 : 0;

  rb_sweep* sweep = nullptr;
  check(rb_sweep_efficiency(&scenario, grid.data(), grid.size(), &options, &sweep));
  const std::string csv = sweep_to_csv(sweep);
  rb_sweep_free(sweep);
  emit(out_path, csv);
  return 0;
}

int cmd_optimize(const std::string& scenario_path, std::optional<double> eta,
                 int threads, bool require_two_levels, const std::string& out_path) {
  ScenarioFileHandle handle;
  load_scenario_file(scenario_path, handle);
  rb_scenario scenario;
  check(rb_scenario_file_scenario(handle.file, &scenario));

  double eta_emitter = 0.0;
  if (eta) {
    eta_emitter = *eta;
  } else {
    check(rb_scenario_file_eta_emitter(handle.file, &eta_emitter));
  }

  rb_search_options options;
  rb_search_options_defaults(&options);
  options.threads = threads;
  options.require_two_levels = require_two_levels ? 1 : 0;

  rb_search_result result;
  check(rb_minimize_cost(&scenario, eta_emitter, &options, &result));
  emit(out_path, search_result_to_json(eta_emitter, result).dump(2) + "\n");
  return 0;
}

// ---- bo ----

rb_status objective_quadratic(const double* p, size_t dim, double* value, void*) {
  double sum = 0.0;
  for (size_t i = 0; i < dim; ++i) sum += (p[i] - 0.3) * (p[i] - 0.3);
  *value = sum;
  return RB_OK;
}

rb_status objective_abs(const double* p, size_t dim, double* value, void*) {
  double sum = 0.0;
  for (size_t i = 0; i < dim; ++i) sum += std::fabs(p[i]);
  *value = sum;
  return RB_OK;
}

int cmd_bo_run(const std::string& objective, int dim, int budget, int init,
               std::uint64_t seed, double lo, double hi,
               const std::string& out_path) {
  rb_objective_fn fn = nullptr;
  if (objective == "builtin:quadratic") {
    fn = objective_quadratic;
  } else if (objective == "builtin:abs") {
    fn = objective_abs;
  } else {
    raise(RB_ERR_INVALID_ARGUMENT,
          "unknown objective '" + objective +
              "' (available: builtin:quadratic, builtin:abs)");
  }
  if (dim < 1) raise(RB_ERR_INVALID_ARGUMENT, "--dim must be >= 1");
  if (lo >= hi) raise(RB_ERR_INVALID_ARGUMENT, "--lo must be below --hi");

  std::vector<double> lower(static_cast<size_t>(dim), lo);
  std::vector<double> upper(static_cast<size_t>(dim), hi);
  rb_bo_options options;
  rb_bo_options_defaults(&options);
  options.seed = seed;
  options.budget = budget;
  options.init_count = init;

  rb_bo_trace* trace = nullptr;
  check(rb_bo_minimize(fn, nullptr, lower.data(), upper.data(),
                       static_cast<size_t>(dim), &options, &trace));

  std::ostringstream csv;
  csv << "iter";
  for (int d = 0; d < dim; ++d) csv << ",p" << d;
  csv << ",value,ok,f_min\n";
  std::vector<double> point(static_cast<size_t>(dim));
  for (size_t i = 0; i < rb_bo_trace_size(trace); ++i) {
    double value = 0.0, f_min = 0.0;
    int ok = 0;
    check(rb_bo_trace_entry(trace, i, point.data(), &value, &ok, &f_min));
    csv << i;
    for (int d = 0; d < dim; ++d) {
      csv << ',' << format_double(point[static_cast<size_t>(d)]);
    }
    csv << ',' << format_double(value) << ',' << ok << ',' << format_double(f_min)
        << '\n';
  }
  rb_bo_trace_free(trace);
  emit(out_path, csv.str());
  return 0;
}

// ---- uq ----

rb_status predictor_coordinate(const double* points, size_t count, size_t dim,
                               double* means, double* variances, void*) {
  for (size_t i = 0; i < count; ++i) {
    means[i] = points[i * dim];
    variances[i] = 0.0;
  }
  return RB_OK;
}

rb_status predictor_sumsq(const double* points, size_t count, size_t dim,
                          double* means, double* variances, void*) {
  for (size_t i = 0; i < count; ++i) {
    double sum = 0.0;
    for (size_t d = 0; d < dim; ++d) sum += points[i * dim + d] * points[i * dim + d];
    means[i] = sum;
    variances[i] = 0.0;
  }
  return RB_OK;
}

int cmd_uq_study(const std::string& model, const std::string& device_path,
                 const std::string& config_path, std::uint64_t seed,
                 const std::string& out_path) {
  json device_json;
  try {
    device_json = json::parse(read_file(device_path));
  } catch (const json::exception& e) {
    raise(RB_ERR_PARSE, std::string("device file: ") + e.what());
  }
  if (!device_json.is_object() || !device_json.contains("mean") ||
      !device_json.contains("sd")) {
    raise(RB_ERR_PARSE, "device file needs 'mean' and 'sd' arrays");
  }
  const std::vector<double> mean = device_json["mean"].get<std::vector<double>>();
  const std::vector<double> sd = device_json["sd"].get<std::vector<double>>();
  if (mean.empty() || mean.size() != sd.size()) {
    raise(RB_ERR_PARSE, "device file: 'mean' and 'sd' must be equal-length arrays");
  }

  rb_mc_config config;
  rb_mc_config_defaults(&config);
  if (!config_path.empty()) {
    json config_json;
    try {
      config_json = json::parse(read_file(config_path));
    } catch (const json::exception& e) {
      raise(RB_ERR_PARSE, std::string("mc config file: ") + e.what());
    }
    for (const auto& item : config_json.items()) {
      const std::string& key = item.key();
      if (key == "delta_n") config.delta_n = item.value().get<int32_t>();
      else if (key == "n_min") config.n_min = item.value().get<int32_t>();
      else if (key == "sigma_lb") config.sigma_lb = item.value().get<double>();
      else if (key == "validity_min") {
        config.has_validity_min = 1;
        config.validity_min = item.value().get<double>();
      } else if (key == "discard_warning_fraction") {
        config.discard_warning_fraction = item.value().get<double>();
      } else {
        raise(RB_ERR_PARSE, "mc config file: unknown key '" + key + "'");
      }
    }
  }

  rb_mc_report report;
  if (model.rfind("builtin:", 0) == 0) {
    rb_predictor_fn fn = nullptr;
    if (model == "builtin:coordinate") {
      fn = predictor_coordinate;
    } else if (model == "builtin:sumsq") {
      fn = predictor_sumsq;
    } else {
      raise(RB_ERR_INVALID_ARGUMENT,
            "unknown model '" + model +
                "' (available: builtin:coordinate, builtin:sumsq)");
    }
    check(rb_mc_analyze(fn, nullptr, mean.data(), sd.data(), mean.size(), &config,
                        seed, &report));
  } else {
    GpHandle gp;
    check(rb_gp_from_json(read_file(model).c_str(), &gp.gp));
    if (rb_gp_dim(gp.gp) != mean.size()) {
      raise(RB_ERR_INVALID_ARGUMENT,
            "model dimension does not match the device distribution");
    }
    check(rb_mc_analyze_gp(gp.gp, mean.data(), sd.data(), mean.size(), &config, seed,
                           &report));
  }

  json out;
  out["p16"] = report.p16;
  out["p50"] = report.p50;
  out["p84"] = report.p84;
  out["sigma_minus"] = report.sigma_minus;
  out["sigma_plus"] = report.sigma_plus;
  out["sigma_mc"] = report.sigma_mc;
  out["sigma_gp"] = report.sigma_gp;
  out["sigma_median"] = report.sigma_median;
  out["n_total"] = report.n_total;
  out["n_discarded"] = report.n_discarded;
  out["discard_warning"] = report.discard_warning != 0;
  out["seed"] = seed;
  out["config"] = {{"delta_n", config.delta_n},
                   {"n_min", config.n_min},
                   {"sigma_lb", config.sigma_lb}};
  if (config.has_validity_min) out["config"]["validity_min"] = config.validity_min;
  emit(out_path, out.dump(2) + "\n");
  return 0;
}

// ---- resfit ----

int cmd_resfit(const std::string& in_path, bool fix_offset,
               const std::string& out_path) {
  std::ifstream in(in_path);
  if (!in) raise(RB_ERR_IO, "cannot open '" + in_path + "'");
  std::vector<double> freq;
  std::vector<double> trans;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a = 0.0, b = 0.0;
    if (row >> a >> b) {
      freq.push_back(a);
      trans.push_back(b);
    } else if (freq.empty()) {
      continue;  // header line
    } else {
      raise(RB_ERR_PARSE, "malformed CSV row: '" + line + "'");
    }
  }
  if (freq.size() < 4) {
    raise(RB_ERR_INVALID_ARGUMENT, "need at least 4 (frequency, transmission) rows");
  }

  rb_lorentz_options options;
  rb_lorentz_options_defaults(&options);
  options.fix_offset_zero = fix_offset ? 1 : 0;

  rb_lorentz_fit fit;
  check(rb_fit_lorentzian(freq.data(), trans.data(), freq.size(), &options, &fit));

  json out;
  out["nu0_hz"] = fit.nu0_hz;
  out["fwhm_hz"] = fit.fwhm_hz;
  out["amplitude"] = fit.amplitude;
  out["offset"] = fit.offset;
  out["q"] = fit.q;
  out["residual_norm"] = fit.residual_norm;
  out["iterations"] = fit.iterations;
  emit(out_path, out.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photon-budget and repeater resource-cost toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_path;
  app.add_option("--seed", seed, "Seed for all randomized steps");
  app.add_option("--threads", threads,
                 "Worker threads (0: REPEATER_BUDGET_THREADS, then hardware)");
  app.add_option("--out", out_path, "Output file (default: stdout)");

  auto* budget = app.add_subcommand("budget", "Emitter-to-fiber photon budget");
  std::string budget_scenario;
  budget->add_option("--scenario", budget_scenario, "Scenario JSON file")->required();

  auto* sweep = app.add_subcommand("sweep", "Cost minimum over an efficiency grid");
  std::string sweep_scenario;
  double sweep_from = 0.0, sweep_to = 0.0;
  int sweep_steps = 0;
  bool sweep_two_levels = false;
  sweep->add_option("--scenario", sweep_scenario, "Scenario JSON file")->required();
  auto* opt_from = sweep->add_option("--eta-from", sweep_from, "Grid start");
  auto* opt_to = sweep->add_option("--eta-to", sweep_to, "Grid end");
  auto* opt_steps = sweep->add_option("--steps", sweep_steps, "Grid point count");
  sweep->add_flag("--require-two-levels", sweep_two_levels,
                  "Enumerate only trees with b1 >= 1 and b2 >= 1");

  auto* optimize = app.add_subcommand("optimize", "Cost minimum at one efficiency");
  std::string optimize_scenario;
  double optimize_eta = 0.0;
  bool optimize_two_levels = false;
  optimize->add_option("--scenario", optimize_scenario, "Scenario JSON file")
      ->required();
  auto* opt_eta = optimize->add_option(
      "--eta", optimize_eta, "Emitter-to-fiber efficiency (default: from the chain)");
  optimize->add_flag("--require-two-levels", optimize_two_levels,
                     "Enumerate only trees with b1 >= 1 and b2 >= 1");

  auto* bo = app.add_subcommand("bo", "Bayesian optimization");
  auto* bo_run = bo->add_subcommand("run", "Minimize a built-in objective");
  std::string bo_objective = "builtin:quadratic";
  int bo_dim = 2, bo_budget = 60, bo_init = 0;
  double bo_lo = 0.0, bo_hi = 1.0;
  bo_run->add_option("--objective", bo_objective, "builtin:quadratic or builtin:abs");
  bo_run->add_option("--dim", bo_dim, "Dimension");
  bo_run->add_option("--budget", bo_budget, "Total objective evaluations");
  bo_run->add_option("--init", bo_init, "Initial design size (0: max(4, 2*dim))");
  bo_run->add_option("--lo", bo_lo, "Lower bound (all dimensions)");
  bo_run->add_option("--hi", bo_hi, "Upper bound (all dimensions)");

  auto* uq = app.add_subcommand("uq", "Surrogate Monte Carlo uncertainty");
  auto* uq_study = uq->add_subcommand("study", "Percentile study over a model");
  std::string uq_model, uq_device, uq_config;
  uq_study
      ->add_option("--model", uq_model,
                   "GP model JSON, builtin:coordinate, or builtin:sumsq")
      ->required();
  uq_study->add_option("--device", uq_device, "Device distribution JSON")->required();
  uq_study->add_option("--config", uq_config, "MC config JSON (optional)");

  auto* resfit = app.add_subcommand("resfit", "Lorentzian resonance fit");
  std::string resfit_in;
  bool resfit_fix_offset = false;
  resfit->add_option("--in", resfit_in, "CSV of (frequency_hz, transmission)")
      ->required();
  resfit->add_flag("--fix-offset", resfit_fix_offset, "Freeze the baseline at 0");

  CLI11_PARSE(app, argc, argv);

  try {
    if (budget->parsed()) return cmd_budget(budget_scenario, out_path);
    if (sweep->parsed()) {
      return cmd_sweep(sweep_scenario,
                       opt_from->count() ? std::optional<double>(sweep_from)
                                         : std::nullopt,
                       opt_to->count() ? std::optional<double>(sweep_to)
                                       : std::nullopt,
                       opt_steps->count() ? std::optional<int>(sweep_steps)
                                          : std::nullopt,
                       threads, sweep_two_levels, out_path);
    }
    if (optimize->parsed()) {
      return cmd_optimize(optimize_scenario,
                          opt_eta->count() ? std::optional<double>(optimize_eta)
                                           : std::nullopt,
                          threads, optimize_two_levels, out_path);
    }
    if (bo_run->parsed()) {
      return cmd_bo_run(bo_objective, bo_dim, bo_budget, bo_init, seed, bo_lo, bo_hi,
                        out_path);
    }
    if (uq_study->parsed()) {
      return cmd_uq_study(uq_model, uq_device, uq_config, seed, out_path);
    }
    if (resfit->parsed()) return cmd_resfit(resfit_in, resfit_fix_offset, out_path);
    std::cerr << app.help();
    return 1;
  } catch (const CliError& e) {
    std::cerr << json{{"error",
                       {{"code", rb_status_name(e.status)}, {"message", e.message}}}}
                     .dump()
              << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"code", "internal_error"}, {"message", e.what()}}}}
                     .dump()
              << "\n";
    return 1;
  }
}
