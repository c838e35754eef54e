#ifndef RB_MC_HPP
#define RB_MC_HPP

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "gp.hpp"

namespace rb {

// Diagonal multivariate normal.
struct MvnSpec {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;

  void validate() const;
  Eigen::Index dim() const { return mean.size(); }
};

struct McConfig {
  std::int32_t delta_n = 1000;    // sample increment per loop pass
  std::int32_t n_min = 50000;     // draw count bound of the stopping rule
  double sigma_lb = 1e-3;         // relative MC error lower bound
  double discard_warning_fraction = 0.05;

  void validate() const;
};

// Validity rule applied to predicted values; rejected predictions are
// excluded from the statistics but counted. An empty predicate keeps all.
using ValidityPredicate = std::function<bool(double)>;

// Threshold preset: predictions must exceed `bound` to count as a working
// device (e.g. bound = 1 for Purcell factors, where <= 1 means no resonance).
ValidityPredicate min_validity(double bound);

struct McReport {
  double p16 = 0.0, p50 = 0.0, p84 = 0.0;
  double sigma_minus = 0.0;   // P50 - P16
  double sigma_plus = 0.0;    // P84 - P50
  double sigma_mc = 0.0;      // sqrt(Var / N) over retained predictions
  double sigma_gp = 0.0;      // sqrt(P50 of predicted variances)
  double sigma_median = 0.0;  // sqrt(sigma_mc^2 + sigma_gp^2)
  std::int64_t n_total = 0;       // samples drawn
  std::int64_t n_discarded = 0;   // predictions rejected by the validity rule
  bool discard_warning = false;
};

// Linear interpolation between closest ranks ("type 7") on sorted data.
double percentile(const std::vector<double>& sorted_values, double p);

// w_train draws from N(mean, (kappa * sd)^2): the training distribution
// enclosing the device distribution (kappa scales standard deviations).
Eigen::MatrixXd make_training_set(const MvnSpec& device, double kappa,
                                  std::int32_t w_train, std::uint64_t seed);

struct OutlierFilter {
  std::vector<std::int32_t> kept;  // indices into the original arrays
  std::int32_t removed = 0;
};

// Removes points whose value deviates from the median of its k nearest
// neighbors' values by more than threshold times the neighbors' MAD.
// Distances use per-dimension standardized coordinates; a vanishing MAD is
// floored so identical neighborhoods remove nothing.
OutlierFilter filter_outliers(const Eigen::MatrixXd& points,
                              const Eigen::VectorXd& values,
                              std::int32_t k_neighbors, double threshold);

// Batched surrogate predictor: fills means/variances for a block of points.
using BatchPredictor =
    std::function<void(const Eigen::MatrixXd&, Eigen::VectorXd&, Eigen::VectorXd&)>;

// Incremental Monte Carlo percentile estimation over a surrogate:
// draws delta_n samples per pass and stops as soon as the relative MC error
// drops below sigma_lb or n_total reaches n_min.
McReport mc_analyze(const BatchPredictor& predictor, const MvnSpec& sample_dist,
                    const McConfig& config, std::uint64_t seed,
                    const ValidityPredicate& validity = {});

BatchPredictor gp_predictor(const GpModel& model);

struct StudyOptions {
  double kappa = 1.4;
  std::int32_t w_train = 200;
  std::int32_t k_neighbors = 8;
  double outlier_threshold = 5.0;
  GpFitOptions gp;
};

struct StudyCounts {
  std::int32_t w_requested = 0;
  std::int32_t w_failed = 0;            // expensive-model failures
  std::int32_t w_outliers_removed = 0;
  std::int32_t w_used = 0;
};

struct StudyReport {
  McReport mc;
  StudyCounts counts;
};

// Full pipeline: training set -> expensive evaluations -> outlier filter ->
// GP fit -> Monte Carlo analysis. Expensive-model failures (thrown errors or
// non-finite values) are excluded from the training set.
StudyReport end_to_end_study(const std::function<double(const Eigen::VectorXd&)>& fn,
                             const MvnSpec& device, const StudyOptions& options,
                             const McConfig& config, std::uint64_t seed,
                             const ValidityPredicate& validity = {});

}  // namespace rb

#endif
