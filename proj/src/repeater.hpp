#ifndef RB_REPEATER_HPP
#define RB_REPEATER_HPP

#include <cstdint>

#include "tree.hpp"

namespace rb {

// Multiplicative factors of the emitter-to-fiber efficiency.
struct EfficiencyChain {
  double beta_c = 1.0;
  double beta_wg = 1.0;
  double beta_f = 1.0;
  double dw = 1.0;

  void validate() const;
};

double emitter_efficiency(const EfficiencyChain& chain);

// Protocol constants of the one-way repeater link. Times are SI seconds;
// the CLI layer converts from ns/km-keyed JSON.
struct RepeaterScenario {
  double l_km = 1000.0;       // total distance
  double l_att_km = 20.0;     // fiber attenuation length
  double tau_ph_s = 10e-9;    // photon emission time
  double tau_cz_s = 100e-9;   // controlled-Z gate time (default 10 * tau_ph)
  double eps_r = 1e-4;        // reencoding error per station
  double eta_det = 0.995;     // detection efficiency
  double l_min_km = 1.0;      // minimal station spacing
  std::int32_t n_ph_max = 1000;

  void validate() const;
  // Largest station count keeping l_km / (m + 1) >= l_min_km.
  std::int32_t max_stations() const;
};

// Transmission probability of one tree-encoded qubit at single-photon
// transmission eta. Evaluates the indirect-measurement recursion
//   R_k = 1 - [1 - (1-mu)(1 - mu + mu R_{k+2})^{b_{k+1}}]^{b_k},  mu = 1 - eta,
// with R_{d+1} = 0 and b_{d+1} = 0, then
//   eta_e = [(1 - mu + mu R_1)^{b0} - (mu R_1)^{b0}] (1 - mu + mu R_2)^{b1}.
double encoded_transmission(double eta, const TreeVector& b);

// eta_e^(m+1): one encoded hop per segment, m stations split the line into
// m + 1 segments.
double message_transmission(double eta_e, std::int32_t m);

// eta_detection * eta_emitter * exp(-l0 / l_att).
double link_efficiency(double eta_emitter, double eta_det, double l0_km,
                       double l_att_km);

// Binary entropy with the continuous extension g(0) = g(1) = 0.
double binary_entropy(double x);

// Six-state secret-bit fraction at qubit error rate Q = 2(1+m)eps_r/3:
//   f = 1 - g(Q) - Q - (1-Q) g((1 - 3Q/2)/(1 - Q)).
// Throws a domain error when Q >= 1 or the inner entropy argument leaves
// [0, 1]; may return negative values before that point.
double secret_fraction(double eps_r, std::int32_t m);

// Tree generation rate for depth <= 2 trees:
//   1/Gamma = b0 [100 + b1 (1 + b2)] tau_ph + b0 [3 + b1 (1 + b2)] tau_cz.
double tcs_generation_rate(const TreeVector& b, double tau_ph_s, double tau_cz_s);

struct CostBreakdown {
  double cost = 0.0;  // +inf when infeasible
  double eta_link = 0.0;
  double eta_e = 0.0;
  double p_trans = 0.0;
  double f = 0.0;
  double gamma_tcs_hz = 0.0;
  std::int64_t n_ph = 0;
  bool feasible = false;
};

// Full cost C = 1/(Gamma f p_trans) * m l_att / (tau_ph l) with station
// spacing l/(m+1). Nonpositive secret fraction or vanishing transmission maps
// to an infinite cost; a spacing below l_min is rejected.
CostBreakdown repeater_cost(const RepeaterScenario& scn, const TreeVector& b,
                            std::int32_t m, double eta_emitter);

namespace detail {

// x^e for integer e >= 0 by square-and-multiply; 0^0 == 1. Shared by the
// public recursion and the search fast path so both produce identical bits.
inline double ipow(double x, std::int64_t e) {
  double result = 1.0;
  double base = x;
  while (e > 0) {
    if (e & 1) result *= base;
    base *= base;
    e >>= 1;
  }
  return result;
}

// Depth <= 2 encoded transmission on raw levels (b1/b2 may be 0).
double encoded_transmission_depth2(double mu, std::int32_t b0, std::int32_t b1,
                                   std::int32_t b2);

}  // namespace detail

}  // namespace rb

#endif
