#ifndef RB_NELDER_MEAD_HPP
#define RB_NELDER_MEAD_HPP

#include <Eigen/Core>
#include <functional>

namespace rb {

struct NelderMeadOptions {
  int max_iterations = 200;
  double x_tol = 1e-9;
  double f_tol = 1e-12;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
};

// Bounded Nelder-Mead minimization; proposed vertices are clamped to
// [lo, hi]. Fully deterministic for a given start and step.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& fn,
                             const Eigen::VectorXd& start,
                             const Eigen::VectorXd& step,
                             const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                             const NelderMeadOptions& options = {});

}  // namespace rb

#endif
