#ifndef RB_GP_HPP
#define RB_GP_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>

namespace rb {

// Constant-mean Gaussian process with a Matern 5/2 kernel. The kernel
// prefactor is stored as a variance v0, so k(p, p) = v0 and the predictive
// variance tends to v0 far away from the data.
struct GpHyper {
  double mu0 = 0.0;
  double v0 = 1.0;
  Eigen::VectorXd lengthscales;
};

// k(p, q) = v0 (1 + sqrt(5) r + 5/3 r^2) exp(-sqrt(5) r),
// r^2 = sum_i ((p_i - q_i) / l_i)^2.
double matern52(Eigen::Ref<const Eigen::VectorXd> p, Eigen::Ref<const Eigen::VectorXd> q,
                const GpHyper& hyper);

struct GpFitOptions {
  int w_hyp = 40;          // beyond this many observations, lengthscales freeze
  std::uint64_t seed = 0;  // multistart placement
  int multistarts = 8;
  // Lengthscale bounds as factors of the per-dimension data range.
  double lengthscale_lo = 1e-3;
  double lengthscale_hi = 1e3;
};

class GpModel {
 public:
  // Maximum-likelihood fit (profile likelihood over log-lengthscales with
  // closed-form mu0 and v0). When `previous` is given and the data has grown
  // past w_hyp, its lengthscales are kept and only mu0/v0 are refit.
  static GpModel fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& values,
                     const GpFitOptions& options = {},
                     const GpModel* previous = nullptr);

  // Assembles a model from explicit hyperparameters (deserialization, tests).
  static GpModel assemble(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& values,
                          const GpHyper& hyper, int w_hyp);

  struct Prediction {
    double mean;
    double variance;  // clamped at >= 0
  };
  Prediction predict(Eigen::Ref<const Eigen::VectorXd> p) const;
  void predict_batch(const Eigen::MatrixXd& points, Eigen::VectorXd& means,
                     Eigen::VectorXd& variances) const;

  double log_marginal_likelihood() const;

  const Eigen::MatrixXd& train_inputs() const { return inputs_; }
  const Eigen::VectorXd& train_values() const { return values_; }
  const GpHyper& hyper() const { return hyper_; }
  int w_hyp() const { return w_hyp_; }
  double jitter() const { return jitter_; }
  std::int64_t size() const { return inputs_.rows(); }
  std::int64_t dim() const { return inputs_.cols(); }

  // Lower-triangular factor of K = v0 (R + jitter I) and K itself (tests).
  Eigen::MatrixXd kernel_factor() const;
  Eigen::MatrixXd kernel_matrix() const;

  std::string to_json() const;
  static GpModel from_json(const std::string& text);

 private:
  GpModel() = default;
  void factorize();

  Eigen::MatrixXd inputs_;   // W x N
  Eigen::VectorXd values_;   // W
  GpHyper hyper_;
  int w_hyp_ = 40;
  double jitter_ = 0.0;          // relative diagonal added to the correlation
  Eigen::MatrixXd corr_chol_;    // L with L L^T = R + jitter I
  Eigen::VectorXd alpha_;        // (R + jitter I)^{-1} (Y - mu0)
};

}  // namespace rb

#endif
