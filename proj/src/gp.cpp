#include "gp.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <vector>

#include "common.hpp"
#include "constants.hpp"
#include "nelder_mead.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace rb {

namespace {

double matern52_correlation(Eigen::Ref<const Eigen::VectorXd> p,
                            Eigen::Ref<const Eigen::VectorXd> q,
                            const Eigen::VectorXd& lengthscales) {
  double r2 = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double d = (p[i] - q[i]) / lengthscales[i];
    r2 += d * d;
  }
  const double r = std::sqrt(r2);
  const double sqrt5_r = std::sqrt(5.0) * r;
  return (1.0 + sqrt5_r + (5.0 / 3.0) * r2) * std::exp(-sqrt5_r);
}

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& inputs,
                                   const Eigen::VectorXd& lengthscales) {
  const Eigen::Index w = inputs.rows();
  Eigen::MatrixXd corr(w, w);
  for (Eigen::Index i = 0; i < w; ++i) {
    corr(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < w; ++j) {
      const double v = matern52_correlation(inputs.row(i), inputs.row(j), lengthscales);
      corr(i, j) = v;
      corr(j, i) = v;
    }
  }
  return corr;
}

constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-4;

struct CorrFactor {
  Eigen::MatrixXd chol;  // lower triangular
  double jitter = 0.0;
};

// Cholesky with escalating diagonal jitter. Jitter is relative to the unit
// correlation diagonal, i.e. jitter * v0 on the kernel matrix itself.
std::optional<CorrFactor> try_factor(const Eigen::MatrixXd& corr) {
  for (double jitter = kJitterStart; jitter <= kJitterMax * (1.0 + 1e-12);
       jitter *= 10.0) {
    Eigen::MatrixXd a = corr;
    a.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      return CorrFactor{Eigen::MatrixXd(llt.matrixL()), jitter};
    }
  }
  return std::nullopt;
}

struct ProfileFit {
  double mu0 = 0.0;
  double v0 = 0.0;
  double lml = 0.0;
};

// Closed-form mu0 and v0 given a factorized correlation matrix, plus the
// resulting profile log marginal likelihood.
ProfileFit profile_fit(const CorrFactor& factor, const Eigen::VectorXd& values) {
  const auto w = static_cast<double>(values.size());
  const auto& l = factor.chol;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(values.size());
  const Eigen::VectorXd r_inv_y =
      l.transpose().triangularView<Eigen::Upper>().solve(
          l.triangularView<Eigen::Lower>().solve(values));
  const Eigen::VectorXd r_inv_1 =
      l.transpose().triangularView<Eigen::Upper>().solve(
          l.triangularView<Eigen::Lower>().solve(ones));
  const double denom = r_inv_1.sum();
  ProfileFit out;
  out.mu0 = denom != 0.0 ? r_inv_y.sum() / denom : values.mean();
  const Eigen::VectorXd resid = values.array() - out.mu0;
  const Eigen::VectorXd r_inv_resid =
      l.transpose().triangularView<Eigen::Upper>().solve(
          l.triangularView<Eigen::Lower>().solve(resid));
  const double qf = resid.dot(r_inv_resid);
  out.v0 = std::max(qf / w, 1e-300);
  const double logdet = 2.0 * l.diagonal().array().log().sum();
  out.lml = -0.5 * (w + w * std::log(2.0 * constants::pi * out.v0) + logdet);
  return out;
}

std::string hex_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_double(const nlohmann::json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    require(end != nullptr && *end == '\0', Status::parse_error,
            std::string("gp model: malformed number in ") + what);
    return v;
  }
  fail(Status::parse_error, std::string("gp model: expected number for ") + what);
}

}  // namespace

double matern52(Eigen::Ref<const Eigen::VectorXd> p, Eigen::Ref<const Eigen::VectorXd> q,
                const GpHyper& hyper) {
  require(p.size() == q.size() && p.size() == hyper.lengthscales.size(),
          Status::invalid_argument, "matern52: dimension mismatch");
  return hyper.v0 * matern52_correlation(p, q, hyper.lengthscales);
}

void GpModel::factorize() {
  const Eigen::MatrixXd corr = correlation_matrix(inputs_, hyper_.lengthscales);
  const auto factor = try_factor(corr);
  require(factor.has_value(), Status::no_convergence,
          "gp: correlation matrix not positive definite after maximum jitter");
  corr_chol_ = factor->chol;
  jitter_ = factor->jitter;
  const Eigen::VectorXd resid = values_.array() - hyper_.mu0;
  alpha_ = corr_chol_.transpose().triangularView<Eigen::Upper>().solve(
      corr_chol_.triangularView<Eigen::Lower>().solve(resid));
}

GpModel GpModel::assemble(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& values,
                          const GpHyper& hyper, int w_hyp) {
  require(inputs.rows() >= 1, Status::invalid_argument, "gp: empty training set");
  require(inputs.rows() == values.size(), Status::invalid_argument,
          "gp: inputs/values size mismatch");
  require(hyper.lengthscales.size() == inputs.cols(), Status::invalid_argument,
          "gp: lengthscale dimension mismatch");
  require(hyper.v0 > 0.0, Status::invalid_argument, "gp: v0 must be > 0");
  require((hyper.lengthscales.array() > 0.0).all(), Status::invalid_argument,
          "gp: lengthscales must be > 0");
  GpModel model;
  model.inputs_ = inputs;
  model.values_ = values;
  model.hyper_ = hyper;
  model.w_hyp_ = w_hyp;
  model.factorize();
  return model;
}

GpModel GpModel::fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& values,
                     const GpFitOptions& options, const GpModel* previous) {
  const Eigen::Index w = inputs.rows();
  const Eigen::Index n = inputs.cols();
  require(w >= 2, Status::invalid_argument, "gp fit: need at least 2 observations");
  require(n >= 1, Status::invalid_argument, "gp fit: need at least 1 dimension");
  require(values.size() == w, Status::invalid_argument,
          "gp fit: inputs/values size mismatch");
  require(values.allFinite() && inputs.allFinite(), Status::invalid_argument,
          "gp fit: non-finite training data");

  Eigen::VectorXd range(n);
  for (Eigen::Index d = 0; d < n; ++d) {
    const double r = inputs.col(d).maxCoeff() - inputs.col(d).minCoeff();
    range[d] = r > 0.0 ? r : 1.0;
  }

  // All observations identical: the variance collapses; return a flat model.
  if (values.maxCoeff() - values.minCoeff() == 0.0) {
    GpHyper hyper;
    hyper.mu0 = values[0];
    hyper.v0 = 1e-12;
    hyper.lengthscales = range;
    return assemble(inputs, values, hyper, options.w_hyp);
  }

  Eigen::VectorXd lengthscales;
  const bool freeze = previous != nullptr && previous->dim() == n &&
                      options.w_hyp > 0 && w > options.w_hyp;
  if (freeze) {
    lengthscales = previous->hyper().lengthscales;
  } else {
    const Eigen::VectorXd log_lo =
        (options.lengthscale_lo * range.array()).log().matrix();
    const Eigen::VectorXd log_hi =
        (options.lengthscale_hi * range.array()).log().matrix();

    const auto objective = [&](const Eigen::VectorXd& log_l) {
      const Eigen::VectorXd l = log_l.array().exp().matrix();
      const auto factor = try_factor(correlation_matrix(inputs, l));
      if (!factor) return std::numeric_limits<double>::infinity();
      return -profile_fit(*factor, values).lml;
    };

    const int starts = std::max(1, options.multistarts);
    std::vector<Eigen::VectorXd> start_points;
    start_points.reserve(starts);
    start_points.push_back(
        range.array().log().matrix().cwiseMax(log_lo).cwiseMin(log_hi));
    if (starts > 1) {
      CounterRng rng(options.seed);
      ScrambledHalton halton(static_cast<std::size_t>(n), rng.derive(0x67706669uLL));
      for (int s = 1; s < starts; ++s) {
        std::vector<double> u = halton.point(static_cast<std::uint64_t>(s - 1));
        Eigen::VectorXd x(n);
        for (Eigen::Index d = 0; d < n; ++d) {
          x[d] = log_lo[d] + u[static_cast<std::size_t>(d)] * (log_hi[d] - log_lo[d]);
        }
        start_points.push_back(std::move(x));
      }
    }

    NelderMeadOptions nm;
    nm.max_iterations = std::min(400, 100 + 60 * static_cast<int>(n));
    nm.x_tol = 1e-6;
    nm.f_tol = 1e-10;
    Eigen::VectorXd step = (log_hi - log_lo).cwiseMin(0.5 * Eigen::VectorXd::Ones(n));

    std::vector<NelderMeadResult> results(start_points.size());
    parallel_chunks(start_points.size(), resolve_threads(0),
                    [&](unsigned, std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        results[i] = nelder_mead(objective, start_points[i], step, log_lo, log_hi, nm);
      }
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < results.size(); ++i) {
      if (results[i].f < results[best].f) best = i;
    }
    require(std::isfinite(results[best].f), Status::no_convergence,
            "gp fit: likelihood optimization failed for every start");
    lengthscales = results[best].x.array().exp().matrix();
  }

  const auto factor = try_factor(correlation_matrix(inputs, lengthscales));
  require(factor.has_value(), Status::no_convergence,
          "gp fit: correlation matrix not positive definite after maximum jitter");
  const ProfileFit pf = profile_fit(*factor, values);

  GpHyper hyper;
  hyper.mu0 = pf.mu0;
  hyper.v0 = pf.v0;
  hyper.lengthscales = lengthscales;
  return assemble(inputs, values, hyper, options.w_hyp);
}

GpModel::Prediction GpModel::predict(Eigen::Ref<const Eigen::VectorXd> p) const {
  require(p.size() == inputs_.cols(), Status::invalid_argument,
          "gp predict: dimension mismatch");
  const Eigen::Index w = inputs_.rows();
  Eigen::VectorXd corr(w);
  for (Eigen::Index i = 0; i < w; ++i) {
    corr[i] = matern52_correlation(p, inputs_.row(i), hyper_.lengthscales);
  }
  const double mean = hyper_.mu0 + corr.dot(alpha_);
  const Eigen::VectorXd z = corr_chol_.triangularView<Eigen::Lower>().solve(corr);
  const double variance = hyper_.v0 * (1.0 - z.squaredNorm());
  return {mean, std::max(variance, 0.0)};
}

void GpModel::predict_batch(const Eigen::MatrixXd& points, Eigen::VectorXd& means,
                            Eigen::VectorXd& variances) const {
  require(points.cols() == inputs_.cols(), Status::invalid_argument,
          "gp predict: dimension mismatch");
  const Eigen::Index w = inputs_.rows();
  const Eigen::Index count = points.rows();
  Eigen::MatrixXd corr(w, count);
  for (Eigen::Index j = 0; j < count; ++j) {
    for (Eigen::Index i = 0; i < w; ++i) {
      corr(i, j) =
          matern52_correlation(points.row(j), inputs_.row(i), hyper_.lengthscales);
    }
  }
  means = (corr.transpose() * alpha_).array() + hyper_.mu0;
  const Eigen::MatrixXd z = corr_chol_.triangularView<Eigen::Lower>().solve(corr);
  variances =
      (hyper_.v0 * (1.0 - z.colwise().squaredNorm().array())).cwiseMax(0.0).matrix();
}

double GpModel::log_marginal_likelihood() const {
  const auto w = static_cast<double>(inputs_.rows());
  const Eigen::VectorXd resid = values_.array() - hyper_.mu0;
  const double qf = resid.dot(alpha_) / hyper_.v0;
  const double logdet =
      w * std::log(hyper_.v0) + 2.0 * corr_chol_.diagonal().array().log().sum();
  return -0.5 * qf - 0.5 * logdet - 0.5 * w * std::log(2.0 * constants::pi);
}

Eigen::MatrixXd GpModel::kernel_factor() const {
  return std::sqrt(hyper_.v0) * corr_chol_;
}

Eigen::MatrixXd GpModel::kernel_matrix() const {
  Eigen::MatrixXd k = correlation_matrix(inputs_, hyper_.lengthscales);
  k.diagonal().array() += jitter_;
  return hyper_.v0 * k;
}

std::string GpModel::to_json() const {
  nlohmann::json j;
  j["kind"] = "gp-matern52";
  j["dim"] = dim();
  j["w_hyp"] = w_hyp_;
  nlohmann::json hyper;
  hyper["mu0"] = hex_double(hyper_.mu0);
  hyper["v0"] = hex_double(hyper_.v0);
  nlohmann::json scales = nlohmann::json::array();
  for (Eigen::Index d = 0; d < hyper_.lengthscales.size(); ++d) {
    scales.push_back(hex_double(hyper_.lengthscales[d]));
  }
  hyper["lengthscales"] = scales;
  j["hyper"] = hyper;
  nlohmann::json inputs = nlohmann::json::array();
  for (Eigen::Index i = 0; i < inputs_.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index d = 0; d < inputs_.cols(); ++d) {
      row.push_back(hex_double(inputs_(i, d)));
    }
    inputs.push_back(row);
  }
  j["inputs"] = inputs;
  nlohmann::json values = nlohmann::json::array();
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    values.push_back(hex_double(values_[i]));
  }
  j["values"] = values;
  return j.dump(2);
}

GpModel GpModel::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(Status::parse_error, std::string("gp model: ") + e.what());
  }
  try {
    require(j.is_object() && j.value("kind", "") == "gp-matern52",
            Status::parse_error, "gp model: missing kind 'gp-matern52'");
    const auto dim = j.at("dim").get<Eigen::Index>();
    const int w_hyp = j.at("w_hyp").get<int>();
    const auto& hyper_json = j.at("hyper");
    GpHyper hyper;
    hyper.mu0 = parse_double(hyper_json.at("mu0"), "mu0");
    hyper.v0 = parse_double(hyper_json.at("v0"), "v0");
    const auto& scales = hyper_json.at("lengthscales");
    require(scales.is_array() && static_cast<Eigen::Index>(scales.size()) == dim,
            Status::parse_error, "gp model: lengthscales must match dim");
    hyper.lengthscales.resize(dim);
    for (Eigen::Index d = 0; d < dim; ++d) {
      hyper.lengthscales[d] = parse_double(scales[static_cast<std::size_t>(d)],
                                           "lengthscales");
    }
    const auto& inputs_json = j.at("inputs");
    const auto& values_json = j.at("values");
    require(inputs_json.is_array() && values_json.is_array() &&
                inputs_json.size() == values_json.size() && !inputs_json.empty(),
            Status::parse_error, "gp model: inputs/values arrays mismatch");
    const auto w = static_cast<Eigen::Index>(inputs_json.size());
    Eigen::MatrixXd inputs(w, dim);
    Eigen::VectorXd values(w);
    for (Eigen::Index i = 0; i < w; ++i) {
      const auto& row = inputs_json[static_cast<std::size_t>(i)];
      require(row.is_array() && static_cast<Eigen::Index>(row.size()) == dim,
              Status::parse_error, "gp model: input row has wrong dimension");
      for (Eigen::Index d = 0; d < dim; ++d) {
        inputs(i, d) = parse_double(row[static_cast<std::size_t>(d)], "inputs");
      }
      values[i] = parse_double(values_json[static_cast<std::size_t>(i)], "values");
    }
    return assemble(inputs, values, hyper, w_hyp);
  } catch (const nlohmann::json::exception& e) {
    fail(Status::parse_error, std::string("gp model: ") + e.what());
  }
}

}  // namespace rb
