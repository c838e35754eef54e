#include "emitter.hpp"

#include <cmath>

#include "common.hpp"
#include "constants.hpp"

namespace rb {

void EmitterSpec::validate() const {
  require(tau0 > 0.0, Status::invalid_argument, "emitter: tau0 must be > 0");
  require(dw0 > 0.0 && dw0 < 1.0, Status::invalid_argument,
          "emitter: dw0 must be in (0, 1)");
  require(xi > 0.0 && xi <= 1.0, Status::invalid_argument,
          "emitter: xi must be in (0, 1]");
  require(zpl_frequency > 0.0, Status::invalid_argument,
          "emitter: zpl_frequency must be > 0");
}

DecayRates decay_rates(const EmitterSpec& spec) {
  spec.validate();
  const double gamma_zpl = spec.dw0 / spec.tau0;
  const double gamma_psb = (1.0 - spec.dw0) / spec.tau0;
  return {gamma_zpl, gamma_psb, spec.xi * gamma_zpl};
}

double dw_purcell(const EmitterSpec& spec, double f_p) {
  spec.validate();
  require(f_p >= 0.0, Status::invalid_argument, "dw_purcell: f_p must be >= 0");
  const double a = spec.xi * spec.dw0 * f_p;
  return (a + spec.dw0) / (a + 1.0);
}

double purcell_lifetime(const EmitterSpec& spec, double f_p) {
  spec.validate();
  require(f_p >= 0.0, Status::invalid_argument,
          "purcell_lifetime: f_p must be >= 0");
  return spec.tau0 / (1.0 + spec.xi * spec.dw0 * f_p);
}

double calibrate_branching(double dw0, double f_p, double dw_target) {
  require(dw0 > 0.0 && dw0 < 1.0, Status::invalid_argument,
          "calibrate_branching: dw0 must be in (0, 1)");
  require(f_p > 0.0, Status::invalid_argument,
          "calibrate_branching: f_p must be > 0");
  require(dw_target > dw0 && dw_target < 1.0, Status::infeasible,
          "calibrate_branching: dw_target must satisfy dw0 < dw_target < 1");
  return (dw_target - dw0) / (dw0 * f_p * (1.0 - dw_target));
}

double radiative_rate(double omega, double refractive_index, double dipole_moment) {
  require(omega > 0.0, Status::invalid_argument, "radiative_rate: omega must be > 0");
  require(refractive_index >= 1.0, Status::invalid_argument,
          "radiative_rate: refractive index must be >= 1");
  require(dipole_moment >= 0.0, Status::invalid_argument,
          "radiative_rate: dipole moment must be >= 0");
  using namespace constants;
  return omega * omega * omega * refractive_index * dipole_moment * dipole_moment /
         (3.0 * pi * vacuum_permittivity * reduced_planck *
          speed_of_light * speed_of_light * speed_of_light);
}

double orientation_scaled_purcell(double f_p_ideal, double alpha) {
  require(f_p_ideal >= 0.0, Status::invalid_argument,
          "orientation_scaled_purcell: f_p_ideal must be >= 0");
  const double c = std::cos(alpha);
  return f_p_ideal * c * c;
}

double beta_c(double f_p) {
  require(f_p >= 0.0, Status::invalid_argument, "beta_c: f_p must be >= 0");
  return f_p / (f_p + 1.0);
}

double chain_efficiency(const EmitterSpec& spec, double f_p, double beta_wg,
                        double beta_f) {
  require(beta_wg >= 0.0 && beta_wg <= 1.0, Status::invalid_argument,
          "chain_efficiency: beta_wg must be in [0, 1]");
  require(beta_f >= 0.0 && beta_f <= 1.0, Status::invalid_argument,
          "chain_efficiency: beta_f must be in [0, 1]");
  return beta_c(f_p) * beta_wg * beta_f * dw_purcell(spec, f_p);
}

double purcell_factor_for_efficiency(const EmitterSpec& spec, double beta_wg,
                                     double beta_f, double eta_target) {
  spec.validate();
  require(eta_target > 0.0 && eta_target < 1.0, Status::invalid_argument,
          "purcell_factor_for_efficiency: eta_target must be in (0, 1)");
  const double limit = beta_wg * beta_f;  // f_p -> inf
  require(eta_target < limit, Status::infeasible,
          "purcell_factor_for_efficiency: target exceeds the beta_wg*beta_f limit");
  double lo = 0.0;
  double hi = 1.0;
  while (chain_efficiency(spec, hi, beta_wg, beta_f) < eta_target) {
    hi *= 2.0;
    require(hi < 1e18, Status::no_convergence,
            "purcell_factor_for_efficiency: bracketing failed");
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chain_efficiency(spec, mid, beta_wg, beta_f) < eta_target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

// Reference enhancement at which the branching fractions are calibrated,
// together with the Purcell-enhanced Debye-Waller factor measured there.
constexpr double kCalibrationPurcell = 46.4;

std::vector<EmitterSpec> make_presets() {
  std::vector<EmitterSpec> presets;
  // name, bulk lifetime [ns], bulk DW, enhanced-DW anchor at F_P = 46.4,
  // ZPL frequency [THz].
  struct Row {
    const char* name;
    double tau0_ns;
    double dw0;
    double dw_anchor;  // <= 0 means xi = 1 (single-branch ZPL)
    double zpl_thz;
  };
  constexpr Row rows[] = {
      {"NV", 12.2, 0.03, -1.0, 470.6},
      {"SiV", 1.7, 0.80, 0.992, 406.8},
      {"GeV", 3.8, 0.60, 0.980, 498.0},
      {"SnV", 4.5, 0.60, 0.980, 484.3},
  };
  for (const Row& r : rows) {
    EmitterSpec spec;
    spec.name = r.name;
    spec.tau0 = r.tau0_ns * 1e-9;
    spec.dw0 = r.dw0;
    spec.xi = r.dw_anchor > 0.0
                  ? calibrate_branching(r.dw0, kCalibrationPurcell, r.dw_anchor)
                  : 1.0;
    spec.zpl_frequency = r.zpl_thz * 1e12;
    spec.validate();
    presets.push_back(spec);
  }
  return presets;
}

}  // namespace

std::span<const EmitterSpec> emitter_presets() {
  static const std::vector<EmitterSpec> presets = make_presets();
  return presets;
}

const EmitterSpec& emitter_preset(const std::string& name) {
  for (const EmitterSpec& spec : emitter_presets()) {
    if (spec.name == name) return spec;
  }
  fail(Status::invalid_argument, "unknown emitter preset '" + name + "'");
}

}  // namespace rb
