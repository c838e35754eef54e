#ifndef RB_EMITTER_HPP
#define RB_EMITTER_HPP

#include <span>
#include <string>
#include <vector>

namespace rb {

// Photophysics of one color center. Rates derived from these fields satisfy
// gamma_zpl + gamma_psb = 1/tau0 exactly.
struct EmitterSpec {
  std::string name;
  double tau0 = 0.0;           // bulk excited-state lifetime [s]
  double dw0 = 0.0;            // bulk Debye-Waller factor, in (0, 1)
  double xi = 1.0;             // ZPL branching fraction gamma31/gamma_zpl, in (0, 1]
  double zpl_frequency = 0.0;  // optical frequency [Hz]

  void validate() const;
};

struct DecayRates {
  double gamma_zpl;  // 1/s
  double gamma_psb;  // 1/s
  double gamma31;    // 1/s, cavity-enhanced transition
};

DecayRates decay_rates(const EmitterSpec& spec);

// Debye-Waller factor with the gamma31 transition enhanced by f_p:
//   DW(F) = (xi*dw0*F + dw0) / (xi*dw0*F + 1).
// With xi = 1 this reduces to DW0*(1+F) / (1 + DW0*F).
double dw_purcell(const EmitterSpec& spec, double f_p);

// Excited-state lifetime under enhancement: tau0 / (1 + xi*dw0*f_p).
double purcell_lifetime(const EmitterSpec& spec, double f_p);

// Inverse of dw_purcell in xi: the branching fraction that makes the enhanced
// Debye-Waller factor hit dw_target at the given f_p.
double calibrate_branching(double dw0, double f_p, double dw_target);

// Spontaneous-emission rate omega^3 * n * |mu|^2 / (3 pi eps0 hbar c^3),
// CODATA-2018 constants (see constants.hpp).
double radiative_rate(double omega, double refractive_index, double dipole_moment);

// cos^2(alpha) scaling of the Purcell factor for a dipole rotated away from
// the mode axis by alpha radians.
double orientation_scaled_purcell(double f_p_ideal, double alpha);

// Probability of emission into the cavity mode: f_p / (f_p + 1).
double beta_c(double f_p);

// Emitter-to-fiber efficiency for this emitter at Purcell factor f_p:
//   beta_c(f_p) * beta_wg * beta_f * dw_purcell(f_p).
double chain_efficiency(const EmitterSpec& spec, double f_p, double beta_wg, double beta_f);

// Solves chain_efficiency(spec, f_p, beta_wg, beta_f) = eta_target for f_p by
// bisection. Fails as infeasible when the target exceeds the f_p -> inf limit
// beta_wg * beta_f.
double purcell_factor_for_efficiency(const EmitterSpec& spec, double beta_wg,
                                     double beta_f, double eta_target);

// Built-in presets (NV, SiV, GeV, SnV). Branching fractions are calibrated at
// start-up via calibrate_branching against published Purcell-enhanced
// Debye-Waller anchors; the NV uses xi = 1.
std::span<const EmitterSpec> emitter_presets();
const EmitterSpec& emitter_preset(const std::string& name);

}  // namespace rb

#endif
