#include "mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common.hpp"
#include "rng.hpp"

namespace rb {

void MvnSpec::validate() const {
  require(mean.size() >= 1, Status::invalid_argument, "mvn: empty mean");
  require(mean.size() == sd.size(), Status::invalid_argument,
          "mvn: mean/sd size mismatch");
  require((sd.array() > 0.0).all(), Status::invalid_argument,
          "mvn: standard deviations must be > 0");
}

void McConfig::validate() const {
  require(delta_n >= 1, Status::invalid_argument, "mc config: delta_n must be >= 1");
  require(n_min >= delta_n, Status::invalid_argument,
          "mc config: n_min must be >= delta_n");
  require(sigma_lb > 0.0, Status::invalid_argument, "mc config: sigma_lb must be > 0");
  require(discard_warning_fraction >= 0.0 && discard_warning_fraction <= 1.0,
          Status::invalid_argument, "mc config: warning fraction must be in [0, 1]");
}

double percentile(const std::vector<double>& sorted_values, double p) {
  require(!sorted_values.empty(), Status::invalid_argument, "percentile: empty sample");
  require(p >= 0.0 && p <= 1.0, Status::invalid_argument,
          "percentile: p must be in [0, 1]");
  const std::size_t n = sorted_values.size();
  if (n == 1) return sorted_values.front();
  const double h = p * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(h);
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double w = h - static_cast<double>(lo);
  return sorted_values[lo] + w * (sorted_values[hi] - sorted_values[lo]);
}

Eigen::MatrixXd make_training_set(const MvnSpec& device, double kappa,
                                  std::int32_t w_train, std::uint64_t seed) {
  device.validate();
  require(kappa > 1.0, Status::invalid_argument,
          "make_training_set: kappa must be > 1 (enclosing distribution)");
  require(w_train >= 1, Status::invalid_argument,
          "make_training_set: w_train must be >= 1");
  const Eigen::Index n = device.dim();
  Eigen::MatrixXd points(w_train, n);
  CounterRng rng(seed);
  for (std::int32_t i = 0; i < w_train; ++i) {
    for (Eigen::Index d = 0; d < n; ++d) {
      points(i, d) = device.mean[d] +
                     kappa * device.sd[d] *
                         rng.normal(static_cast<std::uint64_t>(i),
                                    static_cast<std::uint32_t>(d));
    }
  }
  return points;
}

OutlierFilter filter_outliers(const Eigen::MatrixXd& points,
                              const Eigen::VectorXd& values,
                              std::int32_t k_neighbors, double threshold) {
  const Eigen::Index n = points.rows();
  require(values.size() == n, Status::invalid_argument,
          "filter_outliers: points/values size mismatch");
  require(k_neighbors >= 1 && k_neighbors < n, Status::invalid_argument,
          "filter_outliers: need 1 <= k_neighbors < point count");
  require(threshold > 0.0, Status::invalid_argument,
          "filter_outliers: threshold must be > 0");

  // Standardize coordinates so mixed-unit dimensions weigh equally.
  Eigen::MatrixXd scaled = points;
  for (Eigen::Index d = 0; d < points.cols(); ++d) {
    const double mean = points.col(d).mean();
    const double var = (points.col(d).array() - mean).square().sum() /
                       static_cast<double>(n);
    const double sd = std::sqrt(var);
    scaled.col(d) = (points.col(d).array() - mean) / (sd > 0.0 ? sd : 1.0);
  }

  OutlierFilter out;
  std::vector<std::pair<double, std::int32_t>> dist(static_cast<std::size_t>(n));
  std::vector<double> neighbor_values(static_cast<std::size_t>(k_neighbors));
  std::vector<double> deviations(static_cast<std::size_t>(k_neighbors));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      dist[static_cast<std::size_t>(j)] = {
          (scaled.row(i) - scaled.row(j)).squaredNorm(), static_cast<std::int32_t>(j)};
    }
    dist[static_cast<std::size_t>(i)].first = std::numeric_limits<double>::infinity();
    std::partial_sort(dist.begin(), dist.begin() + k_neighbors, dist.end());
    for (std::int32_t k = 0; k < k_neighbors; ++k) {
      neighbor_values[static_cast<std::size_t>(k)] =
          values[dist[static_cast<std::size_t>(k)].second];
    }
    std::sort(neighbor_values.begin(), neighbor_values.end());
    const double med = percentile(neighbor_values, 0.5);
    for (std::int32_t k = 0; k < k_neighbors; ++k) {
      deviations[static_cast<std::size_t>(k)] =
          std::fabs(neighbor_values[static_cast<std::size_t>(k)] - med);
    }
    std::sort(deviations.begin(), deviations.end());
    const double mad = percentile(deviations, 0.5);
    const double scale = std::max(mad, 1e-12 * std::max(1.0, std::fabs(med)));
    if (std::fabs(values[i] - med) > threshold * scale) {
      ++out.removed;
    } else {
      out.kept.push_back(static_cast<std::int32_t>(i));
    }
  }
  return out;
}

ValidityPredicate min_validity(double bound) {
  return [bound](double value) { return value > bound; };
}

McReport mc_analyze(const BatchPredictor& predictor, const MvnSpec& sample_dist,
                    const McConfig& config, std::uint64_t seed,
                    const ValidityPredicate& validity) {
  sample_dist.validate();
  config.validate();
  const Eigen::Index dim = sample_dist.dim();
  CounterRng rng(seed);

  std::vector<double> predictions;   // retained mean predictions
  std::vector<double> variances;     // matching predicted variances
  std::int64_t n_total = 0;
  std::int64_t n_discarded = 0;
  double sigma_mc = 0.0;
  double sigma_rel = std::numeric_limits<double>::infinity();

  std::vector<double> sorted;
  while (sigma_rel >= config.sigma_lb && n_total < config.n_min) {
    Eigen::MatrixXd batch(config.delta_n, dim);
    for (std::int32_t j = 0; j < config.delta_n; ++j) {
      const auto index = static_cast<std::uint64_t>(n_total + j);
      for (Eigen::Index d = 0; d < dim; ++d) {
        batch(j, d) = sample_dist.mean[d] +
                      sample_dist.sd[d] *
                          rng.normal(index, static_cast<std::uint32_t>(d));
      }
    }
    Eigen::VectorXd means, vars;
    predictor(batch, means, vars);
    require(means.size() == config.delta_n && vars.size() == config.delta_n,
            Status::invalid_argument, "mc_analyze: predictor returned a short batch");
    for (std::int32_t j = 0; j < config.delta_n; ++j) {
      if (validity && !(std::isfinite(means[j]) && validity(means[j]))) {
        ++n_discarded;
        continue;
      }
      predictions.push_back(means[j]);
      variances.push_back(vars[j]);
    }
    n_total += config.delta_n;

    const auto count = static_cast<double>(predictions.size());
    if (predictions.size() >= 2) {
      double mean = 0.0;
      for (const double y : predictions) mean += y;
      mean /= count;
      double var = 0.0;
      for (const double y : predictions) var += (y - mean) * (y - mean);
      var /= count;  // population variance
      sigma_mc = std::sqrt(var / count);
      sorted = predictions;
      std::sort(sorted.begin(), sorted.end());
      const double p50 = percentile(sorted, 0.5);
      sigma_rel = p50 != 0.0 ? sigma_mc / std::fabs(p50)
                             : std::numeric_limits<double>::infinity();
    }
  }

  require(!predictions.empty(), Status::domain_error,
          "mc_analyze: every prediction was rejected by the validity rule");

  sorted = predictions;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> sorted_vars = variances;
  std::sort(sorted_vars.begin(), sorted_vars.end());

  McReport report;
  report.p16 = percentile(sorted, 0.16);
  report.p50 = percentile(sorted, 0.50);
  report.p84 = percentile(sorted, 0.84);
  report.sigma_minus = report.p50 - report.p16;
  report.sigma_plus = report.p84 - report.p50;
  report.sigma_mc = sigma_mc;
  report.sigma_gp = std::sqrt(std::max(percentile(sorted_vars, 0.5), 0.0));
  report.sigma_median =
      std::sqrt(report.sigma_mc * report.sigma_mc + report.sigma_gp * report.sigma_gp);
  report.n_total = n_total;
  report.n_discarded = n_discarded;
  report.discard_warning =
      static_cast<double>(n_discarded) >
      config.discard_warning_fraction * static_cast<double>(n_total);
  return report;
}

BatchPredictor gp_predictor(const GpModel& model) {
  return [&model](const Eigen::MatrixXd& points, Eigen::VectorXd& means,
                  Eigen::VectorXd& vars) { model.predict_batch(points, means, vars); };
}

StudyReport end_to_end_study(const std::function<double(const Eigen::VectorXd&)>& fn,
                             const MvnSpec& device, const StudyOptions& options,
                             const McConfig& config, std::uint64_t seed,
                             const ValidityPredicate& validity) {
  device.validate();
  config.validate();
  require(options.w_train >= 2, Status::invalid_argument,
          "end_to_end_study: w_train must be >= 2");

  CounterRng rng(seed);
  const Eigen::MatrixXd training =
      make_training_set(device, options.kappa, options.w_train, rng.derive(1));

  StudyReport report;
  report.counts.w_requested = options.w_train;

  std::vector<Eigen::Index> evaluated;
  std::vector<double> values;
  for (Eigen::Index i = 0; i < training.rows(); ++i) {
    double y = std::numeric_limits<double>::quiet_NaN();
    try {
      y = fn(training.row(i));
    } catch (...) {
    }
    if (std::isfinite(y)) {
      evaluated.push_back(i);
      values.push_back(y);
    } else {
      ++report.counts.w_failed;
    }
  }
  require(evaluated.size() >= 2, Status::invalid_argument,
          "end_to_end_study: fewer than 2 usable training evaluations");

  Eigen::MatrixXd points(static_cast<Eigen::Index>(evaluated.size()), device.dim());
  Eigen::VectorXd y(static_cast<Eigen::Index>(evaluated.size()));
  for (std::size_t i = 0; i < evaluated.size(); ++i) {
    points.row(static_cast<Eigen::Index>(i)) = training.row(evaluated[i]);
    y[static_cast<Eigen::Index>(i)] = values[i];
  }

  Eigen::MatrixXd kept_points = points;
  Eigen::VectorXd kept_values = y;
  if (points.rows() > options.k_neighbors + 1) {
    const OutlierFilter filter =
        filter_outliers(points, y, options.k_neighbors, options.outlier_threshold);
    report.counts.w_outliers_removed = filter.removed;
    if (filter.removed > 0) {
      kept_points.resize(static_cast<Eigen::Index>(filter.kept.size()), device.dim());
      kept_values.resize(static_cast<Eigen::Index>(filter.kept.size()));
      for (std::size_t i = 0; i < filter.kept.size(); ++i) {
        kept_points.row(static_cast<Eigen::Index>(i)) = points.row(filter.kept[i]);
        kept_values[static_cast<Eigen::Index>(i)] = y[filter.kept[i]];
      }
    }
  }
  report.counts.w_used = static_cast<std::int32_t>(kept_points.rows());
  require(report.counts.w_used >= 2, Status::invalid_argument,
          "end_to_end_study: fewer than 2 training points after filtering");

  GpFitOptions fit_options = options.gp;
  fit_options.seed = rng.derive(2);
  const GpModel model = GpModel::fit(kept_points, kept_values, fit_options);
  report.mc = mc_analyze(gp_predictor(model), device, config, rng.derive(3), validity);
  return report;
}

}  // namespace rb
