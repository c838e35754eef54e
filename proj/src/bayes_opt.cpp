#include "bayes_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common.hpp"
#include "nelder_mead.hpp"
#include "rng.hpp"

namespace rb {

void BoDomain::validate() const {
  require(lo.size() >= 1, Status::invalid_argument, "bo domain: empty bounds");
  require(lo.size() == hi.size(), Status::invalid_argument,
          "bo domain: bound size mismatch");
  require((lo.array() < hi.array()).all(), Status::invalid_argument,
          "bo domain: lower bounds must be strictly below upper bounds");
}

double expected_improvement_value(double mean, double variance, double f_min) {
  const double sigma = std::sqrt(std::max(variance, 0.0));
  const double delta = f_min - mean;
  if (sigma <= 0.0) return std::max(delta, 0.0);
  const double z = delta / sigma;
  return std::max(delta * normal_cdf(z) + sigma * normal_pdf(z), 0.0);
}

double min_improvement_value(double mean, double variance, double f_min) {
  return (f_min - mean) - expected_improvement_value(mean, variance, f_min);
}

double expected_improvement(const GpModel& model, Eigen::Ref<const Eigen::VectorXd> p,
                            double f_min) {
  const auto pred = model.predict(p);
  return expected_improvement_value(pred.mean, pred.variance, f_min);
}

Eigen::VectorXd suggest(const GpModel& model, const BoDomain& domain, double f_min,
                        std::uint64_t seed, int candidates, int polish,
                        bool raw_min_variant) {
  domain.validate();
  require(domain.dim() == model.dim(), Status::invalid_argument,
          "suggest: domain/model dimension mismatch");
  require(candidates >= 1, Status::invalid_argument, "suggest: need candidates >= 1");
  const Eigen::Index n = domain.dim();
  const Eigen::VectorXd span = domain.hi - domain.lo;

  const auto acquisition = [&](double mean, double variance) {
    return raw_min_variant ? min_improvement_value(mean, variance, f_min)
                           : expected_improvement_value(mean, variance, f_min);
  };

  CounterRng rng(seed);
  Eigen::MatrixXd points(candidates, n);
  for (int j = 0; j < candidates; ++j) {
    for (Eigen::Index d = 0; d < n; ++d) {
      points(j, d) = domain.lo[d] +
                     rng.uniform(static_cast<std::uint64_t>(j),
                                 static_cast<std::uint32_t>(d)) * span[d];
    }
  }
  Eigen::VectorXd means, variances;
  model.predict_batch(points, means, variances);

  std::vector<int> order(candidates);
  for (int j = 0; j < candidates; ++j) order[j] = j;
  std::vector<double> scores(candidates);
  for (int j = 0; j < candidates; ++j) scores[j] = acquisition(means[j], variances[j]);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });

  const int refine = std::min<int>(std::max(polish, 1), candidates);
  Eigen::VectorXd best_point = points.row(order.front());
  double best_score = scores[order.front()];

  NelderMeadOptions nm;
  nm.max_iterations = 80;
  nm.x_tol = 1e-8 * span.maxCoeff();
  nm.f_tol = 1e-12;
  const Eigen::VectorXd step = 0.05 * span;
  const auto negative_acq = [&](const Eigen::VectorXd& x) {
    const auto pred = model.predict(x);
    return -acquisition(pred.mean, pred.variance);
  };
  for (int r = 0; r < refine; ++r) {
    const Eigen::VectorXd start = points.row(order[static_cast<std::size_t>(r)]);
    const NelderMeadResult res =
        nelder_mead(negative_acq, start, step, domain.lo, domain.hi, nm);
    if (-res.f > best_score) {
      best_score = -res.f;
      best_point = res.x;
    }
  }
  return best_point;
}

BoState minimize(const std::function<double(const Eigen::VectorXd&)>& objective,
                 const BoDomain& domain, const BoOptions& options) {
  domain.validate();
  const Eigen::Index n = domain.dim();
  const int init_count = options.init_count > 0
                             ? options.init_count
                             : std::max(4, 2 * static_cast<int>(n));
  require(options.budget >= init_count && init_count >= 2, Status::invalid_argument,
          "bo minimize: need budget >= init_count >= 2");

  CounterRng rng(options.seed);
  ScrambledHalton halton(static_cast<std::size_t>(n), rng.derive(0x626f696euLL));
  const Eigen::VectorXd span = domain.hi - domain.lo;

  BoState state;
  state.f_min = std::numeric_limits<double>::infinity();
  std::uint64_t halton_cursor = 0;

  const auto halton_point = [&]() {
    const std::vector<double> u = halton.point(halton_cursor++);
    Eigen::VectorXd x(n);
    for (Eigen::Index d = 0; d < n; ++d) {
      x[d] = domain.lo[d] + u[static_cast<std::size_t>(d)] * span[d];
    }
    return x;
  };

  const auto evaluate = [&](const Eigen::VectorXd& x) {
    BoEvaluation entry;
    entry.point = x;
    try {
      entry.value = objective(x);
      entry.ok = std::isfinite(entry.value);
    } catch (...) {
      entry.ok = false;
      entry.value = std::numeric_limits<double>::quiet_NaN();
    }
    if (!entry.ok) ++state.n_failed;
    if (entry.ok && entry.value < state.f_min) {
      state.f_min = entry.value;
      state.best_point = x;
    }
    entry.f_min_after = state.f_min;
    state.history.push_back(entry);
  };

  for (int i = 0; i < init_count; ++i) evaluate(halton_point());

  std::optional<GpModel> model;
  while (static_cast<int>(state.history.size()) < options.budget) {
    // Collect the successful evaluations as training data.
    std::vector<const BoEvaluation*> ok_entries;
    ok_entries.reserve(state.history.size());
    for (const auto& e : state.history) {
      if (e.ok) ok_entries.push_back(&e);
    }
    Eigen::VectorXd next;
    if (ok_entries.size() >= 2) {
      Eigen::MatrixXd inputs(static_cast<Eigen::Index>(ok_entries.size()), n);
      Eigen::VectorXd values(static_cast<Eigen::Index>(ok_entries.size()));
      for (std::size_t i = 0; i < ok_entries.size(); ++i) {
        inputs.row(static_cast<Eigen::Index>(i)) = ok_entries[i]->point;
        values[static_cast<Eigen::Index>(i)] = ok_entries[i]->value;
      }
      GpFitOptions fit_options = options.gp;
      fit_options.seed = rng.derive(0x66697400uLL + state.history.size());
      model = GpModel::fit(inputs, values, fit_options,
                           model.has_value() ? &*model : nullptr);
      next = suggest(*model, domain, state.f_min,
                     rng.derive(0x73756700uLL + state.history.size()),
                     options.candidates, options.polish, options.raw_min_variant);
    } else {
      // Not enough successes to train on; keep space-filling.
      next = halton_point();
    }
    evaluate(next);
  }
  return state;
}

}  // namespace rb
