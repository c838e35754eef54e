#ifndef RB_BAYES_OPT_HPP
#define RB_BAYES_OPT_HPP

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "gp.hpp"

namespace rb {

struct BoDomain {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  void validate() const;
  Eigen::Index dim() const { return lo.size(); }
};

// Closed-form expected improvement below f_min for a normal prediction:
//   EI = (f_min - mean) Phi(z) + sigma phi(z),  z = (f_min - mean) / sigma.
// Nonnegative; collapses to max(0, f_min - mean) as sigma -> 0.
double expected_improvement_value(double mean, double variance, double f_min);

// Literal E[min(0, f_min - f)] variant (nonpositive), kept for fidelity
// experiments; equals (f_min - mean) - EI.
double min_improvement_value(double mean, double variance, double f_min);

double expected_improvement(const GpModel& model, Eigen::Ref<const Eigen::VectorXd> p,
                            double f_min);

// Approximate argmax of the acquisition: dense candidate screening followed
// by local polish from the best screened points. Deterministic given seed.
Eigen::VectorXd suggest(const GpModel& model, const BoDomain& domain, double f_min,
                        std::uint64_t seed, int candidates = 4096, int polish = 8,
                        bool raw_min_variant = false);

struct BoOptions {
  std::uint64_t seed = 0;
  int budget = 0;
  int init_count = 0;  // 0: max(4, 2 * dim)
  int candidates = 4096;
  int polish = 8;
  GpFitOptions gp;
  bool raw_min_variant = false;
};

struct BoEvaluation {
  Eigen::VectorXd point;
  double value = 0.0;
  bool ok = false;
  double f_min_after = 0.0;  // running best over successful evaluations
};

struct BoState {
  std::vector<BoEvaluation> history;
  double f_min = 0.0;
  Eigen::VectorXd best_point;
  int n_failed = 0;
};

// Space-filling initialization followed by an EI suggest/evaluate/refit loop
// until `budget` objective evaluations have been spent. Failed evaluations
// (thrown errors or non-finite values) are recorded and excluded from the
// training set.
BoState minimize(const std::function<double(const Eigen::VectorXd&)>& objective,
                 const BoDomain& domain, const BoOptions& options);

}  // namespace rb

#endif
