#include "search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common.hpp"
#include "parallel.hpp"

namespace rb {

namespace {

struct TreeCandidate {
  std::int32_t b0, b1, b2;
  std::int64_t n_ph;
  double gamma;  // generation rate at the scenario's gate times
};

// Total-order key used for the deterministic argmin reduction.
struct BestPoint {
  double cost = std::numeric_limits<double>::infinity();
  std::int64_t n_ph = 0;
  std::int32_t m = 0;
  std::int32_t b0 = 0, b1 = 0, b2 = 0;

  bool better_than(const BestPoint& other) const {
    if (cost != other.cost) return cost < other.cost;
    if (n_ph != other.n_ph) return n_ph < other.n_ph;
    if (m != other.m) return m < other.m;
    if (b0 != other.b0) return b0 < other.b0;
    if (b1 != other.b1) return b1 < other.b1;
    return b2 < other.b2;
  }
  bool valid() const { return std::isfinite(cost); }
};

}  // namespace

std::vector<TreeVector> enumerate_trees(std::int32_t n_ph_max,
                                        bool require_two_levels) {
  require(n_ph_max >= 1, Status::invalid_argument, "enumerate_trees: n_ph_max >= 1");
  std::vector<TreeVector> trees;
  for (std::int32_t b0 = 1; b0 <= n_ph_max; ++b0) {
    if (!require_two_levels) trees.emplace_back(std::vector<std::int32_t>{b0});
    for (std::int32_t b1 = 1;; ++b1) {
      const std::int64_t base = static_cast<std::int64_t>(b0) * (1 + b1);
      if (base > n_ph_max) break;
      if (!require_two_levels) {
        trees.emplace_back(std::vector<std::int32_t>{b0, b1});
      }
      for (std::int32_t b2 = 1;; ++b2) {
        const std::int64_t n_ph =
            static_cast<std::int64_t>(b0) *
            (1 + static_cast<std::int64_t>(b1) * (1 + b2));
        if (n_ph > n_ph_max) break;
        trees.emplace_back(std::vector<std::int32_t>{b0, b1, b2});
      }
    }
  }
  return trees;
}

SearchResult minimize_cost(const RepeaterScenario& scn, double eta_emitter,
                           const SearchOptions& options) {
  scn.validate();
  require(eta_emitter > 0.0 && eta_emitter <= 1.0, Status::invalid_argument,
          "minimize_cost: eta_emitter must be in (0, 1]");

  const std::int32_t m_max = scn.max_stations();
  require(m_max >= 1, Status::infeasible,
          "minimize_cost: no station count satisfies the l_min constraint");

  std::vector<TreeCandidate> candidates;
  {
    const auto trees = enumerate_trees(scn.n_ph_max, options.require_two_levels);
    candidates.reserve(trees.size());
    for (const TreeVector& t : trees) {
      candidates.push_back({t.level(0), t.level(1), t.level(2), t.photon_count(),
                            tcs_generation_rate(t, scn.tau_ph_s, scn.tau_cz_s)});
    }
  }

  const unsigned workers = resolve_threads(options.threads);
  std::vector<BestPoint> local(workers);

  // Parallel over station counts; each m carries its own link efficiency and
  // secret fraction, shared across all trees.
  parallel_chunks(static_cast<std::size_t>(m_max), workers,
                  [&](unsigned w, std::size_t begin, std::size_t end) {
    BestPoint best;
    for (std::size_t idx = begin; idx < end; ++idx) {
      const auto m = static_cast<std::int32_t>(idx + 1);
      double f;
      try {
        f = secret_fraction(scn.eps_r, m);
      } catch (const Error&) {
        continue;  // qubit error rate out of range: infeasible station count
      }
      if (f <= 0.0) continue;
      const double l0 = scn.l_km / (static_cast<double>(m) + 1.0);
      const double eta =
          link_efficiency(eta_emitter, scn.eta_det, l0, scn.l_att_km);
      const double mu = 1.0 - eta;
      const double m_factor =
          static_cast<double>(m) * scn.l_att_km / (scn.tau_ph_s * scn.l_km);
      for (const TreeCandidate& t : candidates) {
        const double eta_e =
            detail::encoded_transmission_depth2(mu, t.b0, t.b1, t.b2);
        const double p_trans =
            std::pow(eta_e, static_cast<double>(m) + 1.0);
        if (p_trans <= 0.0) continue;
        // Same expression tree as repeater_cost() so the scan and the final
        // re-evaluation agree bitwise.
        const double cost = (1.0 / (t.gamma * f * p_trans)) * m_factor;
        if (!std::isfinite(cost)) continue;
        const BestPoint candidate{cost, t.n_ph, m, t.b0, t.b1, t.b2};
        if (candidate.better_than(best)) best = candidate;
      }
    }
    local[w] = best;
  });

  BestPoint best;
  for (const BestPoint& b : local) {
    if (b.better_than(best)) best = b;
  }
  require(best.valid(), Status::infeasible,
          "minimize_cost: every enumerated configuration is infeasible");

  const TreeVector tree({best.b0, best.b1, best.b2});
  const CostBreakdown cb = repeater_cost(scn, tree, best.m, eta_emitter);
  SearchResult result;
  result.c_min = cb.cost;
  result.best_tree = tree;
  result.best_m = best.m;
  result.n_ph = cb.n_ph;
  result.gamma_tcs_hz = cb.gamma_tcs_hz;
  result.f = cb.f;
  result.p_trans = cb.p_trans;
  result.eta_link = cb.eta_link;
  result.eta_e = cb.eta_e;
  return result;
}

std::vector<SweepRow> sweep_efficiency(const RepeaterScenario& scn,
                                       std::span<const double> eta_grid,
                                       const SearchOptions& options) {
  scn.validate();
  std::vector<SweepRow> rows;
  rows.reserve(eta_grid.size());
  for (const double eta : eta_grid) {
    SweepRow row;
    row.eta_emitter = eta;
    try {
      row.result = minimize_cost(scn, eta, options);
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace rb
