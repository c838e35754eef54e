#ifndef RB_SEARCH_HPP
#define RB_SEARCH_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "repeater.hpp"

namespace rb {

struct SearchResult {
  double c_min = 0.0;
  TreeVector best_tree{1};
  std::int32_t best_m = 0;
  std::int64_t n_ph = 0;
  double gamma_tcs_hz = 0.0;
  double f = 0.0;
  double p_trans = 0.0;
  double eta_link = 0.0;
  double eta_e = 0.0;
};

struct SearchOptions {
  int threads = 0;               // 0: auto (env, then hardware)
  bool require_two_levels = false;  // restrict enumeration to b1 >= 1 and b2 >= 1
};

// Exhaustive minimum of the cost over depth <= 2 trees with
// photon_count <= n_ph_max and station counts m in [1, l/l_min - 1].
// Ties break deterministically by (cost, photon count, m, lexicographic b).
SearchResult minimize_cost(const RepeaterScenario& scn, double eta_emitter,
                           const SearchOptions& options = {});

struct SweepRow {
  double eta_emitter = 0.0;
  std::optional<SearchResult> result;
  std::string error;  // set when the point failed; the sweep continues
};

std::vector<SweepRow> sweep_efficiency(const RepeaterScenario& scn,
                                       std::span<const double> eta_grid,
                                       const SearchOptions& options = {});

// All enumeration candidates for a scenario (exposed for audit tests).
std::vector<TreeVector> enumerate_trees(std::int32_t n_ph_max,
                                        bool require_two_levels = false);

}  // namespace rb

#endif
