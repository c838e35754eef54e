#include "repeater.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common.hpp"

namespace rb {

TreeVector::TreeVector(std::vector<std::int32_t> levels) : levels_(std::move(levels)) {
  while (levels_.size() > 1 && levels_.back() == 0) levels_.pop_back();
  require(!levels_.empty(), Status::invalid_argument, "tree: branching vector is empty");
  require(levels_.front() >= 1, Status::invalid_argument, "tree: b0 must be >= 1");
  for (std::size_t k = 0; k < levels_.size(); ++k) {
    require(levels_[k] >= 1, Status::invalid_argument,
            "tree: interior levels must be >= 1 (only trailing zeros allowed)");
  }
}

std::int64_t TreeVector::photon_count() const {
  std::int64_t total = 0;
  std::int64_t prod = 1;
  for (const std::int32_t bk : levels_) {
    prod *= bk;
    total += prod;
  }
  return total;
}

void EfficiencyChain::validate() const {
  const double factors[] = {beta_c, beta_wg, beta_f, dw};
  for (const double v : factors) {
    require(v >= 0.0 && v <= 1.0, Status::invalid_argument,
            "efficiency chain: factors must be in [0, 1]");
  }
}

double emitter_efficiency(const EfficiencyChain& chain) {
  chain.validate();
  return chain.beta_c * chain.beta_wg * chain.beta_f * chain.dw;
}

void RepeaterScenario::validate() const {
  require(l_km > 0.0, Status::invalid_argument, "scenario: l_km must be > 0");
  require(l_att_km > 0.0, Status::invalid_argument, "scenario: l_att_km must be > 0");
  require(tau_ph_s > 0.0, Status::invalid_argument, "scenario: tau_ph must be > 0");
  require(tau_cz_s >= 0.0, Status::invalid_argument, "scenario: tau_cz must be >= 0");
  require(eps_r >= 0.0 && eps_r < 1.0, Status::invalid_argument,
          "scenario: eps_r must be in [0, 1)");
  require(eta_det > 0.0 && eta_det <= 1.0, Status::invalid_argument,
          "scenario: eta_det must be in (0, 1]");
  require(l_min_km > 0.0, Status::invalid_argument, "scenario: l_min_km must be > 0");
  require(n_ph_max >= 1, Status::invalid_argument, "scenario: n_ph_max must be >= 1");
}

std::int32_t RepeaterScenario::max_stations() const {
  const double bound = l_km / l_min_km - 1.0;
  if (bound < 1.0) return 0;
  return static_cast<std::int32_t>(std::floor(bound + 1e-9));
}

namespace detail {

double encoded_transmission_depth2(double mu, std::int32_t b0, std::int32_t b1,
                                   std::int32_t b2) {
  const double one_minus_mu = 1.0 - mu;
  // R2 = 1 - mu^b2 (zero boundary beyond the deepest level).
  const double r2 = b2 > 0 ? 1.0 - ipow(mu, b2) : 0.0;
  // R1 = 1 - [1 - (1-mu)(1-mu)^b2]^b1 with R3 = 0.
  const double r1 =
      b1 > 0 ? 1.0 - ipow(1.0 - one_minus_mu * ipow(one_minus_mu, b2), b1) : 0.0;
  const double eta_e = (ipow(one_minus_mu + mu * r1, b0) - ipow(mu * r1, b0)) *
                       ipow(one_minus_mu + mu * r2, b1);
  return std::clamp(eta_e, 0.0, 1.0);
}

}  // namespace detail

double encoded_transmission(double eta, const TreeVector& b) {
  require(eta >= 0.0 && eta <= 1.0, Status::invalid_argument,
          "encoded_transmission: eta must be in [0, 1]");
  const double mu = 1.0 - eta;
  const std::size_t d = b.depth();
  if (d <= 2) {
    return detail::encoded_transmission_depth2(mu, b.level(0), b.level(1), b.level(2));
  }
  // General depth. R_k for k in [1, d], zero beyond; computed downward so each
  // step only needs R_{k+2}.
  std::vector<double> r(d + 3, 0.0);
  for (std::size_t k = d; k >= 1; --k) {
    const double inner = detail::ipow(1.0 - mu + mu * r[k + 2], b.level(k + 1));
    r[k] = 1.0 - detail::ipow(1.0 - (1.0 - mu) * inner, b.level(k));
  }
  const double r1 = r[1];
  const double r2 = r[2];
  const double eta_e =
      (detail::ipow(1.0 - mu + mu * r1, b.level(0)) -
       detail::ipow(mu * r1, b.level(0))) *
      detail::ipow(1.0 - mu + mu * r2, b.level(1));
  return std::clamp(eta_e, 0.0, 1.0);
}

double message_transmission(double eta_e, std::int32_t m) {
  require(eta_e >= 0.0 && eta_e <= 1.0, Status::invalid_argument,
          "message_transmission: eta_e must be in [0, 1]");
  require(m >= 0, Status::invalid_argument, "message_transmission: m must be >= 0");
  return std::pow(eta_e, static_cast<double>(m) + 1.0);
}

double link_efficiency(double eta_emitter, double eta_det, double l0_km,
                       double l_att_km) {
  require(eta_emitter >= 0.0 && eta_emitter <= 1.0, Status::invalid_argument,
          "link_efficiency: eta_emitter must be in [0, 1]");
  require(eta_det >= 0.0 && eta_det <= 1.0, Status::invalid_argument,
          "link_efficiency: eta_det must be in [0, 1]");
  require(l0_km >= 0.0, Status::invalid_argument, "link_efficiency: l0 must be >= 0");
  require(l_att_km > 0.0, Status::invalid_argument,
          "link_efficiency: l_att must be > 0");
  return eta_det * eta_emitter * std::exp(-l0_km / l_att_km);
}

double binary_entropy(double x) {
  require(x >= 0.0 && x <= 1.0, Status::domain_error,
          "binary_entropy: argument must be in [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double secret_fraction(double eps_r, std::int32_t m) {
  require(eps_r >= 0.0, Status::invalid_argument,
          "secret_fraction: eps_r must be >= 0");
  require(m >= 0, Status::invalid_argument, "secret_fraction: m must be >= 0");
  const double eps_trans = (1.0 + static_cast<double>(m)) * eps_r;
  const double q = 2.0 * eps_trans / 3.0;
  require(q < 1.0, Status::domain_error, "secret_fraction: qubit error rate >= 1");
  const double inner = (1.0 - 1.5 * q) / (1.0 - q);
  require(inner >= 0.0 && inner <= 1.0, Status::domain_error,
          "secret_fraction: entropy argument outside [0, 1]");
  return 1.0 - binary_entropy(q) - q - (1.0 - q) * binary_entropy(inner);
}

double tcs_generation_rate(const TreeVector& b, double tau_ph_s, double tau_cz_s) {
  require(tau_ph_s > 0.0, Status::invalid_argument, "tcs_rate: tau_ph must be > 0");
  require(tau_cz_s >= 0.0, Status::invalid_argument, "tcs_rate: tau_cz must be >= 0");
  require(b.depth() <= 2, Status::invalid_argument,
          "tcs_rate: only trees of depth <= 2 are supported");
  const double b0 = b.level(0);
  const double x = static_cast<double>(b.level(1)) * (1.0 + b.level(2));
  const double inv_gamma = b0 * (100.0 + x) * tau_ph_s + b0 * (3.0 + x) * tau_cz_s;
  return 1.0 / inv_gamma;
}

CostBreakdown repeater_cost(const RepeaterScenario& scn, const TreeVector& b,
                            std::int32_t m, double eta_emitter) {
  scn.validate();
  require(m >= 1, Status::invalid_argument, "cost: m must be >= 1");
  require(eta_emitter >= 0.0 && eta_emitter <= 1.0, Status::invalid_argument,
          "cost: eta_emitter must be in [0, 1]");
  const double l0 = scn.l_km / (static_cast<double>(m) + 1.0);
  require(l0 >= scn.l_min_km * (1.0 - 1e-12), Status::infeasible,
          "cost: station spacing below l_min");

  CostBreakdown out;
  out.n_ph = b.photon_count();
  out.eta_link = link_efficiency(eta_emitter, scn.eta_det, l0, scn.l_att_km);
  out.eta_e = encoded_transmission(out.eta_link, b);
  out.p_trans = message_transmission(out.eta_e, m);
  out.f = secret_fraction(scn.eps_r, m);
  out.gamma_tcs_hz = tcs_generation_rate(b, scn.tau_ph_s, scn.tau_cz_s);
  if (out.f <= 0.0 || out.p_trans <= 0.0) {
    out.cost = std::numeric_limits<double>::infinity();
    out.feasible = false;
    return out;
  }
  out.cost = (1.0 / (out.gamma_tcs_hz * out.f * out.p_trans)) *
             (static_cast<double>(m) * scn.l_att_km / (scn.tau_ph_s * scn.l_km));
  out.feasible = true;
  return out;
}

}  // namespace rb
