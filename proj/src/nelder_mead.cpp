#include "nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "common.hpp"

namespace rb {

namespace {

Eigen::VectorXd clamp_to(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                         const Eigen::VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& fn,
                             const Eigen::VectorXd& start,
                             const Eigen::VectorXd& step,
                             const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                             const NelderMeadOptions& options) {
  const auto n = static_cast<int>(start.size());
  require(n >= 1, Status::invalid_argument, "nelder_mead: empty start point");
  require(step.size() == n && lo.size() == n && hi.size() == n,
          Status::invalid_argument, "nelder_mead: dimension mismatch");

  constexpr double kReflect = 1.0;
  constexpr double kExpand = 2.0;
  constexpr double kContract = 0.5;
  constexpr double kShrink = 0.5;

  std::vector<Eigen::VectorXd> simplex;
  std::vector<double> values;
  simplex.reserve(n + 1);
  values.reserve(n + 1);
  simplex.push_back(clamp_to(start, lo, hi));
  values.push_back(fn(simplex.front()));
  for (int d = 0; d < n; ++d) {
    Eigen::VectorXd v = simplex.front();
    v[d] += step[d];
    if (v[d] > hi[d]) v[d] = simplex.front()[d] - step[d];
    simplex.push_back(clamp_to(v, lo, hi));
    values.push_back(fn(simplex.back()));
  }

  std::vector<int> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return values[a] < values[b]; });
  };

  int iterations = 0;
  for (; iterations < options.max_iterations; ++iterations) {
    sort_simplex();
    const int best = order.front();
    const int worst = order.back();
    const int second_worst = order[n - 1];

    double spread = 0.0;
    double f_spread = 0.0;
    for (int i = 1; i <= n; ++i) {
      spread = std::max(spread, (simplex[order[i]] - simplex[best]).cwiseAbs().maxCoeff());
      f_spread = std::max(f_spread, std::fabs(values[order[i]] - values[best]));
    }
    if (spread < options.x_tol && f_spread < options.f_tol * (1.0 + std::fabs(values[best]))) {
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i) {
      if (i != worst) centroid += simplex[i];
    }
    centroid /= n;

    const Eigen::VectorXd reflected =
        clamp_to(centroid + kReflect * (centroid - simplex[worst]), lo, hi);
    const double f_reflected = fn(reflected);

    if (f_reflected < values[best]) {
      const Eigen::VectorXd expanded =
          clamp_to(centroid + kExpand * (reflected - centroid), lo, hi);
      const double f_expanded = fn(expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }
    const Eigen::VectorXd contracted =
        clamp_to(centroid + kContract * (simplex[worst] - centroid), lo, hi);
    const double f_contracted = fn(contracted);
    if (f_contracted < values[worst]) {
      simplex[worst] = contracted;
      values[worst] = f_contracted;
      continue;
    }
    for (int i = 1; i <= n; ++i) {
      const int idx = order[i];
      simplex[idx] = clamp_to(
          simplex[order[0]] + kShrink * (simplex[idx] - simplex[order[0]]), lo, hi);
      values[idx] = fn(simplex[idx]);
    }
  }

  sort_simplex();
  return {simplex[order.front()], values[order.front()], iterations};
}

}  // namespace rb
