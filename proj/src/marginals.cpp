#include "sigscale/marginals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "sigscale/numeric.hpp"

namespace sigscale::marginals {

namespace {

constexpr double kClampEps = 1e-6;       // beta fit clamps scores into (eps, 1-eps)
constexpr double kSupportTol = 1e-9;     // matching observed values to a support
constexpr double kMinConcentration = 0.02;
constexpr double kMaxConcentration = 2e7;

const boost::math::normal_distribution<double> kStdNormal;

double norm_pdf(double x) { return boost::math::pdf(kStdNormal, x); }
double norm_cdf(double x) { return boost::math::cdf(kStdNormal, x); }
double norm_quantile(double u) { return boost::math::quantile(kStdNormal, u); }

double lbeta(double a, double b) {
  return boost::math::lgamma(a) + boost::math::lgamma(b) -
         boost::math::lgamma(a + b);
}

double norm_sf(double x) {
  return boost::math::cdf(boost::math::complement(kStdNormal, x));
}

struct TruncNormParts {
  double a, b, z, phi_a, phi_b, cdf_a, sf_a;
  bool upper_tail;  // both bounds right of the mode: work with survivals
};

TruncNormParts trunc_parts(double mu, double sigma) {
  TruncNormParts p;
  p.a = (0.0 - mu) / sigma;
  p.b = (1.0 - mu) / sigma;
  p.upper_tail = p.a >= 0.0;
  p.cdf_a = norm_cdf(p.a);
  p.sf_a = norm_sf(p.a);
  // Phi(b) - Phi(a) cancels when both bounds sit in the same far tail.
  p.z = p.upper_tail ? p.sf_a - norm_sf(p.b) : norm_cdf(p.b) - p.cdf_a;
  p.phi_a = norm_pdf(p.a);
  p.phi_b = norm_pdf(p.b);
  return p;
}

double trunc_mean(double mu, double sigma) {
  const TruncNormParts p = trunc_parts(mu, sigma);
  return mu + sigma * (p.phi_a - p.phi_b) / p.z;
}

double clamp_unit(double x) { return std::min(1.0, std::max(0.0, x)); }

std::vector<double> sorted_distinct(std::span<const double> scores) {
  std::vector<double> v(scores.begin(), scores.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Index of x in the sorted support, or -1 when off-support.
int support_index(const std::vector<double>& support, double x) {
  auto it = std::lower_bound(support.begin(), support.end(), x - kSupportTol);
  if (it == support.end() || std::abs(*it - x) > kSupportTol) return -1;
  return static_cast<int>(it - support.begin());
}

void check_scores(std::span<const double> scores) {
  if (scores.size() < 10) {
    throw FitError("need at least 10 scores to fit a marginal, got " +
                   std::to_string(scores.size()));
  }
  for (double x : scores) {
    if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
      throw FitError("score outside [0,1]: " + std::to_string(x));
    }
  }
}

// Beta-binomial log-pmf over indices 0..N for alpha = m*nu, beta = (1-m)*nu.
std::vector<double> beta_binomial_log_pmf(std::size_t n_points, double mean_param,
                                          double concentration) {
  const double a = mean_param * concentration;
  const double b = (1.0 - mean_param) * concentration;
  const double nd = static_cast<double>(n_points - 1);
  const double base = -lbeta(a, b);
  std::vector<double> out(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double id = static_cast<double>(i);
    const double lchoose = boost::math::lgamma(nd + 1.0) -
                           boost::math::lgamma(id + 1.0) -
                           boost::math::lgamma(nd - id + 1.0);
    out[i] = lchoose + lbeta(id + a, nd - id + b) + base;
  }
  return out;
}

// Minimizes nll(mean_param, concentration) by Brent over log-concentration
// with an inner Brent over the mean parameter. Shared by the beta and
// beta-binomial fits, whose likelihoods are smooth and unimodal in this
// parameterization.
struct MeanConcentrationFit {
  double mean_param;
  double concentration;
  double nll;
};

template <typename Nll>
MeanConcentrationFit fit_mean_concentration(Nll&& nll, const char* what) {
  constexpr double m_lo = 1e-7;
  constexpr double m_hi = 1.0 - 1e-7;
  auto inner = [&](double log_nu) {
    const double nu = std::exp(log_nu);
    auto [m, value] =
        numeric::minimize_brent([&](double m) { return nll(m, nu); }, m_lo, m_hi);
    (void)m;
    return value;
  };
  auto [log_nu, value] = numeric::minimize_brent(
      inner, std::log(kMinConcentration), std::log(kMaxConcentration));
  (void)value;
  const double nu = std::exp(log_nu);
  auto [m, best] =
      numeric::minimize_brent([&](double m) { return nll(m, nu); }, m_lo, m_hi);

  if (m < 3e-6 || m > 1.0 - 3e-6) {
    throw FitError(std::string(what) + " fit degenerate: mean parameter at boundary");
  }
  return {m, nu, best};
}

FitReport make_report(Family family, double log_likelihood, int n_params) {
  FitReport r;
  r.family = family;
  r.log_likelihood = log_likelihood;
  r.n_params = n_params;
  r.aic = 2.0 * n_params - 2.0 * log_likelihood;
  return r;
}

}  // namespace

std::string family_label(Family family) {
  switch (family) {
    case Family::truncated_normal: return "truncated-normal";
    case Family::beta: return "beta";
    case Family::beta_binomial: return "beta-binomial";
    case Family::discrete_kde: return "discrete-kde";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  for (Family f : {Family::truncated_normal, Family::beta, Family::beta_binomial,
                   Family::discrete_kde}) {
    if (family_label(f) == s) return f;
  }
  throw FitError("unknown marginal family '" + s + "'");
}

// ---------------------------------------------------------------------------
// MarginalModel

MarginalModel MarginalModel::truncated_normal(double location, double scale) {
  if (!(scale > 0.0)) throw FitError("truncated-normal scale must be positive");
  MarginalModel m;
  m.family_ = Family::truncated_normal;
  m.params_ = {location, scale};
  m.mean_ = trunc_mean(location, scale);
  return m;
}

MarginalModel MarginalModel::beta(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw FitError("beta parameters must be positive");
  MarginalModel m;
  m.family_ = Family::beta;
  m.params_ = {alpha, beta};
  m.mean_ = alpha / (alpha + beta);
  return m;
}

MarginalModel MarginalModel::beta_binomial(std::vector<double> support,
                                           double mean_param,
                                           double concentration) {
  if (support.size() < 2) throw FitError("beta-binomial needs a support of >= 2 points");
  if (!std::is_sorted(support.begin(), support.end())) {
    throw FitError("support must be sorted ascending");
  }
  if (!(mean_param > 0.0 && mean_param < 1.0) || !(concentration > 0.0)) {
    throw FitError("beta-binomial parameters out of range");
  }
  MarginalModel m;
  m.family_ = Family::beta_binomial;
  m.params_ = {mean_param, concentration};
  m.support_ = std::move(support);
  const auto log_pmf =
      beta_binomial_log_pmf(m.support_.size(), mean_param, concentration);
  m.probs_.resize(log_pmf.size());
  double total = 0.0;
  for (std::size_t i = 0; i < log_pmf.size(); ++i) {
    m.probs_[i] = std::exp(log_pmf[i]);
    total += m.probs_[i];
  }
  for (double& p : m.probs_) p /= total;
  m.mean_ = std::inner_product(m.support_.begin(), m.support_.end(),
                               m.probs_.begin(), 0.0);
  return m;
}

MarginalModel MarginalModel::discrete(std::vector<double> support,
                                      std::vector<double> probs) {
  if (support.empty() || support.size() != probs.size()) {
    throw FitError("discrete model needs matching support and probabilities");
  }
  if (!std::is_sorted(support.begin(), support.end())) {
    throw FitError("support must be sorted ascending");
  }
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw FitError("negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw FitError("probabilities must sum to 1");
  MarginalModel m;
  m.family_ = Family::discrete_kde;
  m.support_ = std::move(support);
  m.probs_ = std::move(probs);
  m.mean_ = std::inner_product(m.support_.begin(), m.support_.end(),
                               m.probs_.begin(), 0.0);
  return m;
}

double MarginalModel::cdf(double x) const {
  switch (family_) {
    case Family::truncated_normal: {
      if (x <= 0.0) return 0.0;
      if (x >= 1.0) return 1.0;
      const double mu = params_[0];
      const double sigma = params_[1];
      const TruncNormParts p = trunc_parts(mu, sigma);
      const double xi = (x - mu) / sigma;
      const double mass =
          p.upper_tail ? p.sf_a - norm_sf(xi) : norm_cdf(xi) - p.cdf_a;
      return clamp_unit(mass / p.z);
    }
    case Family::beta: {
      if (x <= 0.0) return 0.0;
      if (x >= 1.0) return 1.0;
      boost::math::beta_distribution<double> dist(params_[0], params_[1]);
      return boost::math::cdf(dist, x);
    }
    case Family::beta_binomial:
    case Family::discrete_kde: {
      double acc = 0.0;
      for (std::size_t i = 0; i < support_.size(); ++i) {
        if (support_[i] <= x + kSupportTol) acc += probs_[i];
        else break;
      }
      return std::min(1.0, acc);
    }
  }
  return 0.0;
}

double MarginalModel::inverse_cdf(double u) const {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("inverse_cdf requires u in (0,1), got " + std::to_string(u));
  }
  switch (family_) {
    case Family::truncated_normal: {
      const double mu = params_[0];
      const double sigma = params_[1];
      const TruncNormParts p = trunc_parts(mu, sigma);
      const double xi =
          p.upper_tail
              ? boost::math::quantile(boost::math::complement(kStdNormal,
                                                              p.sf_a - u * p.z))
              : norm_quantile(p.cdf_a + u * p.z);
      return clamp_unit(mu + sigma * xi);
    }
    case Family::beta: {
      boost::math::beta_distribution<double> dist(params_[0], params_[1]);
      return boost::math::quantile(dist, u);
    }
    case Family::beta_binomial:
    case Family::discrete_kde: {
      double acc = 0.0;
      for (std::size_t i = 0; i < support_.size(); ++i) {
        acc += probs_[i];
        if (acc >= u) return support_[i];
      }
      return support_.back();
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Fitting

namespace {

std::pair<MarginalModel, FitReport> fit_truncated_normal(
    std::span<const double> scores) {
  const double n = static_cast<double>(scores.size());
  double sx = 0.0;
  double sxx = 0.0;
  for (double x : scores) {
    sx += x;
    sxx += x * x;
  }
  const double sample_mean = sx / n;
  const double sample_var = sxx / n - sample_mean * sample_mean;
  if (sample_var <= 0.0) {
    throw FitError("truncated-normal inapplicable to constant data");
  }

  const double half_log_2pi = 0.5 * std::log(2.0 * std::acos(-1.0));
  auto nll = [&](double mu, double sigma) {
    const TruncNormParts p = trunc_parts(mu, sigma);
    if (!(p.z > 0.0) || !std::isfinite(p.z)) {
      return std::numeric_limits<double>::max();
    }
    const double quad = (sxx - 2.0 * mu * sx + n * mu * mu) / (2.0 * sigma * sigma);
    return n * (std::log(sigma) + std::log(p.z) + half_log_2pi) + quad;
  };

  auto inner = [&](double log_sigma) {
    const double sigma = std::exp(log_sigma);
    auto [mu, value] = numeric::minimize_brent(
        [&](double mu) { return nll(mu, sigma); }, -4.0, 5.0);
    (void)mu;
    return value;
  };
  auto [log_sigma, outer_value] =
      numeric::minimize_brent(inner, std::log(1e-3), std::log(20.0));
  (void)outer_value;
  const double sigma = std::exp(log_sigma);
  auto [mu, best] = numeric::minimize_brent(
      [&](double mu) { return nll(mu, sigma); }, -4.0, 5.0);

  auto model = MarginalModel::truncated_normal(mu, sigma);
  return {model, make_report(Family::truncated_normal, -best, 2)};
}

std::pair<MarginalModel, FitReport> fit_beta(std::span<const double> scores) {
  const double n = static_cast<double>(scores.size());
  double s_log = 0.0;
  double s_log1m = 0.0;
  double sx = 0.0;
  double sxx = 0.0;
  for (double raw : scores) {
    const double x = std::min(1.0 - kClampEps, std::max(kClampEps, raw));
    s_log += std::log(x);
    s_log1m += std::log1p(-x);
    sx += x;
    sxx += x * x;
  }
  const double sample_mean = sx / n;
  const double sample_var = sxx / n - sample_mean * sample_mean;
  if (sample_var <= 0.0) throw FitError("beta inapplicable to constant data");

  auto nll = [&](double m, double nu) {
    const double a = m * nu;
    const double b = (1.0 - m) * nu;
    return n * lbeta(a, b) - (a - 1.0) * s_log - (b - 1.0) * s_log1m;
  };
  MeanConcentrationFit fit = fit_mean_concentration(nll, "beta");
  if (fit.concentration > 0.99 * kMaxConcentration) {
    throw FitError("beta fit degenerate: zero-variance limit");
  }

  // Newton polish on (alpha, beta); the Brent solution is already close.
  double a = fit.mean_param * fit.concentration;
  double b = (1.0 - fit.mean_param) * fit.concentration;
  for (int iter = 0; iter < 50; ++iter) {
    const double psi_ab = boost::math::digamma(a + b);
    const double ga = n * (boost::math::digamma(a) - psi_ab) - s_log;
    const double gb = n * (boost::math::digamma(b) - psi_ab) - s_log1m;
    const double tri_ab = boost::math::trigamma(a + b);
    const double haa = n * (boost::math::trigamma(a) - tri_ab);
    const double hbb = n * (boost::math::trigamma(b) - tri_ab);
    const double hab = -n * tri_ab;
    const double det = haa * hbb - hab * hab;
    if (!(std::abs(det) > 1e-300)) break;
    const double da = (ga * hbb - gb * hab) / det;
    const double db = (gb * haa - ga * hab) / det;
    const double na = a - da;
    const double nb = b - db;
    if (!(na > 1e-8) || !(nb > 1e-8) || !std::isfinite(na) || !std::isfinite(nb)) break;
    a = na;
    b = nb;
    if (std::abs(da) < 1e-12 * a && std::abs(db) < 1e-12 * b) break;
  }

  const double ll = -(n * lbeta(a, b) - (a - 1.0) * s_log - (b - 1.0) * s_log1m);
  return {MarginalModel::beta(a, b), make_report(Family::beta, ll, 2)};
}

std::pair<MarginalModel, FitReport> fit_beta_binomial(
    std::span<const double> scores, const FitOptions& options) {
  std::vector<double> support =
      options.support.empty() ? sorted_distinct(scores) : options.support;
  if (support.size() < 2) {
    throw FitError("beta-binomial needs a support of >= 2 points");
  }
  std::vector<double> counts(support.size(), 0.0);
  for (double x : scores) {
    const int idx = support_index(support, x);
    if (idx < 0) {
      throw FitError("observed value " + std::to_string(x) +
                     " is off the declared support");
    }
    counts[static_cast<std::size_t>(idx)] += 1.0;
  }

  auto nll = [&](double m, double nu) {
    const auto log_pmf = beta_binomial_log_pmf(support.size(), m, nu);
    double acc = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] > 0.0) acc -= counts[i] * log_pmf[i];
    }
    return acc;
  };
  MeanConcentrationFit fit = fit_mean_concentration(nll, "beta-binomial");

  auto model = MarginalModel::beta_binomial(std::move(support), fit.mean_param,
                                            fit.concentration);
  return {model, make_report(Family::beta_binomial, -fit.nll, 2)};
}

std::pair<MarginalModel, FitReport> fit_discrete_kde(
    std::span<const double> scores, const FitOptions& options) {
  std::vector<double> support =
      options.support.empty() ? sorted_distinct(scores) : options.support;
  std::vector<double> counts(support.size(), 0.0);
  for (double x : scores) {
    const int idx = support_index(support, x);
    if (idx < 0) {
      throw FitError("observed value " + std::to_string(x) +
                     " is off the declared support");
    }
    counts[static_cast<std::size_t>(idx)] += 1.0;
  }

  // Dirichlet smoothing, pseudo-count 0.5 per support point.
  const double total = static_cast<double>(scores.size()) +
                       0.5 * static_cast<double>(support.size());
  std::vector<double> probs(support.size());
  for (std::size_t i = 0; i < support.size(); ++i) {
    probs[i] = (counts[i] + 0.5) / total;
  }
  double ll = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (counts[i] > 0.0) ll += counts[i] * std::log(probs[i]);
  }
  const int n_params = static_cast<int>(support.size()) - 1;
  auto model = MarginalModel::discrete(std::move(support), std::move(probs));
  return {model, make_report(Family::discrete_kde, ll, std::max(n_params, 0))};
}

}  // namespace

std::pair<MarginalModel, FitReport> fit_marginal(std::span<const double> scores,
                                                 Family family,
                                                 const FitOptions& options) {
  check_scores(scores);
  switch (family) {
    case Family::truncated_normal: return fit_truncated_normal(scores);
    case Family::beta: return fit_beta(scores);
    case Family::beta_binomial: return fit_beta_binomial(scores, options);
    case Family::discrete_kde: return fit_discrete_kde(scores, options);
  }
  throw FitError("unknown family");
}

namespace {

// Log-likelihood of the observed values on a common discrete footing:
// exact pmf for discrete models, probability of the midpoint bin around
// each distinct value for continuous ones.
double discretized_log_likelihood(const MarginalModel& model,
                                  const std::vector<double>& values,
                                  const std::vector<double>& counts) {
  double ll = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    double prob = 0.0;
    if (model.discrete()) {
      const int idx = support_index(model.support(), values[j]);
      prob = idx < 0 ? 0.0 : model.probs()[static_cast<std::size_t>(idx)];
    } else {
      const double lower =
          j == 0 ? -1.0 : 0.5 * (values[j - 1] + values[j]);
      const double upper =
          j + 1 == values.size() ? 2.0 : 0.5 * (values[j] + values[j + 1]);
      prob = model.cdf(upper) - model.cdf(lower);
    }
    ll += counts[j] * std::log(std::max(prob, 1e-300));
  }
  return ll;
}

}  // namespace

std::pair<MarginalModel, FitReport> select_marginal(
    std::span<const double> scores, const std::vector<Family>& candidates,
    const FitOptions& options) {
  if (candidates.empty()) throw FitError("empty candidate family set");
  check_scores(scores);

  bool any_discrete = false;
  for (Family f : candidates) {
    if (f == Family::beta_binomial || f == Family::discrete_kde) any_discrete = true;
  }

  std::vector<double> values;
  std::vector<double> value_counts;
  if (any_discrete) {
    values = sorted_distinct(scores);
    value_counts.assign(values.size(), 0.0);
    for (double x : scores) {
      value_counts[static_cast<std::size_t>(support_index(values, x))] += 1.0;
    }
  }

  bool have_best = false;
  std::pair<MarginalModel, FitReport> best{MarginalModel::discrete({0.0}, {1.0}), {}};
  std::string failures;
  for (Family family : candidates) {
    try {
      auto [model, report] = fit_marginal(scores, family, options);
      if (any_discrete) {
        report = make_report(family,
                             discretized_log_likelihood(model, values, value_counts),
                             report.n_params);
      }
      if (!have_best || report.aic < best.second.aic) {
        best = {std::move(model), report};
        have_best = true;
      }
    } catch (const FitError& e) {
      failures += std::string(failures.empty() ? "" : "; ") + family_label(family) +
                  ": " + e.what();
    }
  }
  if (!have_best) {
    throw FitError("all candidate families failed: " + failures);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Mean transformation

MarginalModel transform_mean(const MarginalModel& m, double target_mean) {
  if (!(target_mean > 0.0 && target_mean < 1.0)) {
    throw FitError("target mean must lie in (0,1), got " + std::to_string(target_mean));
  }
  if (std::abs(target_mean - m.mean()) <= 1e-12) return m;

  switch (m.family()) {
    case Family::beta: {
      const double nu = m.params()[0] + m.params()[1];
      return MarginalModel::beta(nu * target_mean, nu * (1.0 - target_mean));
    }
    case Family::truncated_normal: {
      const double sigma = m.params()[1];
      // Locations beyond ~35 sigma of either boundary underflow the normal
      // pdf; targets that far out are unreachable in double precision.
      const double lo = -35.0 * sigma;
      const double hi = 1.0 + 35.0 * sigma;
      if (trunc_mean(lo, sigma) > target_mean || trunc_mean(hi, sigma) < target_mean) {
        throw FitError("target mean unreachable for truncated-normal");
      }
      const double mu = numeric::bisect_root(
          [&](double loc) { return trunc_mean(loc, sigma) - target_mean; }, lo, hi,
          1e-14, 1e-12);
      return MarginalModel::truncated_normal(mu, sigma);
    }
    case Family::beta_binomial: {
      const double nu = m.params()[1];
      const auto& support = m.support();
      if (target_mean <= support.front() || target_mean >= support.back()) {
        throw FitError("target mean outside the support range");
      }
      auto mean_at = [&](double mp) {
        const auto log_pmf = beta_binomial_log_pmf(support.size(), mp, nu);
        double total = 0.0;
        double acc = 0.0;
        for (std::size_t i = 0; i < support.size(); ++i) {
          const double p = std::exp(log_pmf[i]);
          total += p;
          acc += p * support[i];
        }
        return acc / total;
      };
      constexpr double mp_lo = 1e-9;
      constexpr double mp_hi = 1.0 - 1e-9;
      if (mean_at(mp_lo) > target_mean || mean_at(mp_hi) < target_mean) {
        throw FitError("target mean unreachable for beta-binomial");
      }
      const double mp = numeric::bisect_root(
          [&](double x) { return mean_at(x) - target_mean; }, mp_lo, mp_hi, 1e-15,
          1e-10);
      return MarginalModel::beta_binomial(support, mp, nu);
    }
    case Family::discrete_kde: {
      const auto& support = m.support();
      const auto& probs = m.probs();
      if (support.size() < 2 || target_mean <= support.front() ||
          target_mean >= support.back()) {
        throw FitError("target mean unreachable by tilting this support");
      }
      std::vector<double> log_p(probs.size());
      for (std::size_t i = 0; i < probs.size(); ++i) log_p[i] = std::log(probs[i]);
      auto tilted = [&](double theta) {
        std::vector<double> w(log_p.size());
        double max_w = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < w.size(); ++i) {
          w[i] = log_p[i] + theta * support[i];
          max_w = std::max(max_w, w[i]);
        }
        double total = 0.0;
        for (double& x : w) {
          x = std::exp(x - max_w);
          total += x;
        }
        for (double& x : w) x /= total;
        return w;
      };
      auto mean_at = [&](double theta) {
        const auto w = tilted(theta);
        return std::inner_product(support.begin(), support.end(), w.begin(), 0.0);
      };
      constexpr double theta_cap = 5e4;
      if (mean_at(-theta_cap) > target_mean || mean_at(theta_cap) < target_mean) {
        throw FitError("target mean unreachable by tilting this support");
      }
      const double theta = numeric::bisect_root(
          [&](double t) { return mean_at(t) - target_mean; }, -theta_cap, theta_cap,
          1e-12, 1e-10);
      return MarginalModel::discrete(support, tilted(theta));
    }
  }
  throw FitError("unknown family");
}

// ---------------------------------------------------------------------------
// Support helpers

std::vector<double> rr_support(int k) {
  if (k < 1) throw FitError("cutoff k must be >= 1");
  std::vector<double> support;
  support.reserve(static_cast<std::size_t>(k) + 1);
  support.push_back(0.0);
  for (int r = k; r >= 1; --r) support.push_back(1.0 / static_cast<double>(r));
  return support;
}

std::vector<double> empirical_support(std::span<const double> scores) {
  return sorted_distinct(scores);
}

namespace {

// Parses the cutoff from labels like "rr@10"; 0 when absent.
int metric_cutoff(const std::string& metric_name) {
  auto at = metric_name.find('@');
  if (at == std::string::npos) return 0;
  try {
    return std::stoi(metric_name.substr(at + 1));
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

std::vector<Family> default_candidates(const std::string& metric_name) {
  if (metric_name.rfind("rr", 0) == 0) {
    return {Family::beta_binomial, Family::discrete_kde};
  }
  return {Family::truncated_normal, Family::beta, Family::discrete_kde};
}

std::vector<double> metric_support(const std::string& metric_name) {
  if (metric_name.rfind("rr", 0) == 0) {
    const int k = metric_cutoff(metric_name);
    return rr_support(k > 0 ? k : 10);
  }
  return {};
}

}  // namespace sigscale::marginals
