#ifndef SIGSCALE_MARGINALS_HPP
#define SIGSCALE_MARGINALS_HPP

#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sigscale::marginals {

// Model fitting failed or the family does not apply to the data.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Family { truncated_normal, beta, beta_binomial, discrete_kde };

std::string family_label(Family family);
Family family_from_string(const std::string& s);

struct FitReport {
  Family family;
  double log_likelihood = 0.0;
  double aic = 0.0;  // 2*n_params - 2*log_likelihood
  int n_params = 0;
};

// A fitted per-system score distribution on [0, 1]. Continuous families
// carry shape parameters; discrete families carry an explicit support with
// point probabilities. The mean is cached at construction.
class MarginalModel {
 public:
  Family family() const { return family_; }
  const std::vector<double>& params() const { return params_; }
  const std::vector<double>& support() const { return support_; }
  const std::vector<double>& probs() const { return probs_; }
  bool discrete() const {
    return family_ == Family::beta_binomial || family_ == Family::discrete_kde;
  }

  double mean() const { return mean_; }
  double cdf(double x) const;
  // Generalized inverse: smallest x with cdf(x) >= u. Throws std::domain_error
  // for u outside (0, 1).
  double inverse_cdf(double u) const;

  static MarginalModel truncated_normal(double location, double scale);
  static MarginalModel beta(double alpha, double beta);
  // Beta-binomial over the indices of a sorted support grid, parameterized by
  // (mean_param, concentration) with alpha = mean_param * concentration.
  static MarginalModel beta_binomial(std::vector<double> support,
                                     double mean_param, double concentration);
  static MarginalModel discrete(std::vector<double> support,
                                std::vector<double> probs);

 private:
  MarginalModel() = default;

  Family family_ = Family::discrete_kde;
  std::vector<double> params_;
  std::vector<double> support_;  // sorted ascending; empty for continuous
  std::vector<double> probs_;    // aligned with support_; empty for continuous
  double mean_ = 0.0;
};

struct FitOptions {
  // Declared support for the discrete families. Empty means "use the
  // distinct observed values".
  std::vector<double> support;
};

// Maximum-likelihood fit of one family. Throws FitError when the family is
// inapplicable (constant data for continuous families, observed value off
// the declared support for discrete ones, boundary-degenerate optimum).
std::pair<MarginalModel, FitReport> fit_marginal(std::span<const double> scores,
                                                 Family family,
                                                 const FitOptions& options = {});

// Fits every candidate and keeps the minimum-AIC model. When the candidate
// set mixes continuous and discrete families the likelihoods are compared on
// a common discretization of the observed values, otherwise pdf and pmf
// likelihoods would not be on the same scale.
std::pair<MarginalModel, FitReport> select_marginal(
    std::span<const double> scores, const std::vector<Family>& candidates,
    const FitOptions& options = {});

// Same-family distribution with the requested mean. Shape is preserved per
// family: beta keeps alpha+beta, truncated-normal keeps its scale,
// beta-binomial keeps its concentration, discrete models are exponentially
// tilted.
MarginalModel transform_mean(const MarginalModel& m, double target_mean);

// {0} U {1/r : r <= k}, the support of reciprocal rank at cutoff k.
std::vector<double> rr_support(int k);
// Distinct sorted observed values.
std::vector<double> empirical_support(std::span<const double> scores);
// Metric-aware default candidate sets; metric names look like "rr@10".
std::vector<Family> default_candidates(const std::string& metric_name);
// Declared support for a metric, empty when the metric is continuous.
std::vector<double> metric_support(const std::string& metric_name);

}  // namespace sigscale::marginals

#endif  // SIGSCALE_MARGINALS_HPP
