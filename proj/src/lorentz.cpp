#include "lorentz.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <vector>

#include "common.hpp"

namespace rb {

namespace {

struct ScaledData {
  Eigen::VectorXd u;  // (nu - nu_ref) / span
  Eigen::VectorXd t;
  double nu_ref = 0.0;
  double span = 1.0;
};

// Model and Jacobian in scaled coordinates. Parameters: u0, w (> 0 via |w|),
// amplitude, offset.
void evaluate(const ScaledData& data, const Eigen::Vector4d& theta, bool fix_offset,
              Eigen::VectorXd& residual, Eigen::MatrixXd& jacobian) {
  const double u0 = theta[0];
  const double w = theta[1];
  const double amp = theta[2];
  const double off = fix_offset ? 0.0 : theta[3];
  const auto n = data.u.size();
  residual.resize(n);
  jacobian.resize(n, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = 2.0 * (data.u[i] - u0) / w;
    const double denom = 1.0 + z * z;
    const double model = off + amp / denom;
    residual[i] = model - data.t[i];
    const double inv_d2 = 1.0 / (denom * denom);
    jacobian(i, 0) = amp * 4.0 * z * inv_d2 / w;        // d/du0
    jacobian(i, 1) = amp * 2.0 * z * z * inv_d2 / w;    // d/dw
    jacobian(i, 2) = 1.0 / denom;                       // d/damp
    jacobian(i, 3) = fix_offset ? 0.0 : 1.0;            // d/doffset
  }
}

Eigen::Vector4d initial_guess(const ScaledData& data, bool fix_offset) {
  const auto n = data.u.size();
  Eigen::Index peak = 0;
  data.t.maxCoeff(&peak);
  const double t_min = data.t.minCoeff();
  const double t_max = data.t[peak];
  const double off = fix_offset ? 0.0 : t_min;
  const double amp = std::max(t_max - off, 1e-12);
  const double half = off + 0.5 * amp;

  // Width from half-height crossings around the peak, linearly interpolated.
  double left = data.u.minCoeff();
  double right = data.u.maxCoeff();
  bool found_left = false;
  bool found_right = false;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return data.u[a] < data.u[b]; });
  Eigen::Index peak_pos = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] == peak) peak_pos = static_cast<Eigen::Index>(i);
  }
  for (Eigen::Index i = peak_pos; i > 0; --i) {
    const Eigen::Index a = order[static_cast<std::size_t>(i - 1)];
    const Eigen::Index b = order[static_cast<std::size_t>(i)];
    if (data.t[a] <= half && data.t[b] >= half) {
      const double frac = (half - data.t[a]) / std::max(data.t[b] - data.t[a], 1e-300);
      left = data.u[a] + frac * (data.u[b] - data.u[a]);
      found_left = true;
      break;
    }
  }
  for (std::size_t i = static_cast<std::size_t>(peak_pos); i + 1 < order.size(); ++i) {
    const Eigen::Index a = order[i];
    const Eigen::Index b = order[i + 1];
    if (data.t[a] >= half && data.t[b] <= half) {
      const double frac = (data.t[a] - half) / std::max(data.t[a] - data.t[b], 1e-300);
      right = data.u[a] + frac * (data.u[b] - data.u[a]);
      found_right = true;
      break;
    }
  }
  double width = right - left;
  if (!found_left && found_right) width = 2.0 * (right - data.u[peak]);
  if (found_left && !found_right) width = 2.0 * (data.u[peak] - left);
  if (width <= 0.0 || !std::isfinite(width)) width = 0.25;
  return {data.u[peak], width, amp, off};
}

}  // namespace

LorentzianFit fit_lorentzian(std::span<const double> frequency_hz,
                             std::span<const double> transmission,
                             const LorentzOptions& options) {
  const std::size_t n = frequency_hz.size();
  require(n == transmission.size(), Status::invalid_argument,
          "fit_lorentzian: frequency/transmission size mismatch");
  require(n >= 4, Status::invalid_argument, "fit_lorentzian: need at least 4 points");

  ScaledData data;
  data.t = Eigen::Map<const Eigen::VectorXd>(transmission.data(),
                                             static_cast<Eigen::Index>(n));
  Eigen::VectorXd nu = Eigen::Map<const Eigen::VectorXd>(
      frequency_hz.data(), static_cast<Eigen::Index>(n));
  const double nu_min = nu.minCoeff();
  const double nu_max = nu.maxCoeff();
  require(nu_max > nu_min, Status::invalid_argument,
          "fit_lorentzian: all samples share one frequency");
  require(data.t.maxCoeff() > data.t.minCoeff(), Status::invalid_argument,
          "fit_lorentzian: flat transmission data");
  data.nu_ref = nu_min;
  data.span = nu_max - nu_min;
  data.u = (nu.array() - data.nu_ref) / data.span;

  Eigen::Vector4d theta;
  if (options.initial_guess) {
    const LorentzianFit& g = *options.initial_guess;
    require(g.fwhm > 0.0, Status::invalid_argument,
            "fit_lorentzian: initial fwhm must be > 0");
    theta = {(g.nu0 - data.nu_ref) / data.span, g.fwhm / data.span, g.amplitude,
             options.fix_offset_zero ? 0.0 : g.offset};
  } else {
    theta = initial_guess(data, options.fix_offset_zero);
  }

  Eigen::VectorXd residual;
  Eigen::MatrixXd jacobian;
  evaluate(data, theta, options.fix_offset_zero, residual, jacobian);
  double sse = residual.squaredNorm();

  const double t_scale = std::max(data.t.cwiseAbs().maxCoeff(), 1e-300);
  double lambda = 1e-3;
  int iterations = 0;
  bool converged = false;
  const int active = options.fix_offset_zero ? 3 : 4;
  for (; iterations < options.max_iterations; ++iterations) {
    const Eigen::VectorXd gradient = jacobian.transpose() * residual;
    // Relative gradient criterion: residuals scale with the data, the
    // Jacobian with the scaled model.
    if (gradient.head(active).cwiseAbs().maxCoeff() <=
        options.gradient_tol * t_scale * t_scale) {
      converged = true;
      break;
    }
    const Eigen::Matrix4d hessian = jacobian.transpose() * jacobian;
    bool stepped = false;
    for (int attempt = 0; attempt < 16; ++attempt) {
      Eigen::Matrix4d damped = hessian;
      for (int d = 0; d < 4; ++d) {
        damped(d, d) += lambda * std::max(hessian(d, d), 1e-12);
      }
      if (options.fix_offset_zero) damped(3, 3) = 1.0;
      const Eigen::Vector4d delta = damped.ldlt().solve(-gradient);
      Eigen::Vector4d trial = theta + delta;
      if (options.fix_offset_zero) trial[3] = 0.0;
      trial[1] = std::fabs(trial[1]);
      if (trial[1] < 1e-12) trial[1] = 1e-12;
      Eigen::VectorXd trial_residual;
      Eigen::MatrixXd trial_jacobian;
      evaluate(data, trial, options.fix_offset_zero, trial_residual, trial_jacobian);
      const double trial_sse = trial_residual.squaredNorm();
      if (trial_sse <= sse) {
        theta = trial;
        residual.swap(trial_residual);
        jacobian.swap(trial_jacobian);
        sse = trial_sse;
        lambda = std::max(lambda / 3.0, 1e-12);
        stepped = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!stepped) {
      // No damping value improves the fit: numerically at a minimum.
      const Eigen::Vector4d gradient_now = jacobian.transpose() * residual;
      converged = gradient_now.head(active).cwiseAbs().maxCoeff() <=
                  1e-6 * t_scale * t_scale;
      break;
    }
  }
  require(converged, Status::no_convergence,
          "fit_lorentzian: no convergence within the iteration limit");

  LorentzianFit fit;
  fit.nu0 = data.nu_ref + theta[0] * data.span;
  fit.fwhm = std::fabs(theta[1]) * data.span;
  fit.amplitude = theta[2];
  fit.offset = options.fix_offset_zero ? 0.0 : theta[3];
  fit.q = fit.nu0 / fit.fwhm;
  fit.residual_norm = std::sqrt(sse);
  fit.iterations = iterations;
  return fit;
}

double q_from_complex_frequency(std::complex<double> omega) {
  require(omega.imag() != 0.0, Status::domain_error,
          "q_from_complex_frequency: purely real eigenfrequency");
  return 0.5 * std::fabs(omega.real() / omega.imag());
}

}  // namespace rb
