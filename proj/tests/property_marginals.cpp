#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <boost/math/distributions/beta.hpp>

#include "sigscale/marginals.hpp"

using namespace sigscale::marginals;

namespace {

constexpr std::size_t kRecoveryDraws = 50000;

std::vector<double> draw_beta(double a, double b, std::size_t n, unsigned seed) {
  boost::math::beta_distribution<double> dist(a, b);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(1e-12, 1.0 - 1e-12);
  std::vector<double> out(n);
  for (double& x : out) x = boost::math::quantile(dist, unif(gen));
  return out;
}

// Rejection sampling from N(mu, sigma) truncated to [0, 1].
std::vector<double> draw_truncated_normal(double mu, double sigma, std::size_t n,
                                          unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(mu, sigma);
  std::vector<double> out;
  out.reserve(n);
  while (out.size() < n) {
    const double x = normal(gen);
    if (x >= 0.0 && x <= 1.0) out.push_back(x);
  }
  return out;
}

// Beta-binomial over a support: p ~ Beta(a, b), index ~ Binomial(N, p).
std::vector<double> draw_beta_binomial(const std::vector<double>& support,
                                       double mean_param, double concentration,
                                       std::size_t n, unsigned seed) {
  boost::math::beta_distribution<double> dist(mean_param * concentration,
                                              (1.0 - mean_param) * concentration);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(1e-12, 1.0 - 1e-12);
  std::bernoulli_distribution flip;
  std::vector<double> out(n);
  const std::size_t trials = support.size() - 1;
  for (double& x : out) {
    const double p = boost::math::quantile(dist, unif(gen));
    std::size_t hits = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      if (std::bernoulli_distribution(p)(gen)) ++hits;
    }
    x = support[hits];
  }
  return out;
}

}  // namespace

TEST_CASE("beta parameter recovery at 50k draws") {
  const auto scores = draw_beta(2.0, 6.0, kRecoveryDraws, 101);
  const auto [model, report] = fit_marginal(scores, Family::beta);
  (void)report;
  CHECK(model.params()[0] == doctest::Approx(2.0).epsilon(0.05));
  CHECK(model.params()[1] == doctest::Approx(6.0).epsilon(0.05));
  CHECK(model.mean() == doctest::Approx(0.25).epsilon(0.02));
  CHECK(std::abs(model.mean() - 0.25) < 0.005);
}

TEST_CASE("truncated normal parameter recovery at 50k draws") {
  const auto scores = draw_truncated_normal(0.4, 0.25, kRecoveryDraws, 102);
  const auto [model, report] = fit_marginal(scores, Family::truncated_normal);
  (void)report;
  CHECK(model.params()[0] == doctest::Approx(0.4).epsilon(0.05));
  CHECK(model.params()[1] == doctest::Approx(0.25).epsilon(0.05));
  const auto truth = MarginalModel::truncated_normal(0.4, 0.25);
  CHECK(std::abs(model.mean() - truth.mean()) < 0.005);
}

TEST_CASE("beta-binomial parameter recovery at 50k draws") {
  const auto support = rr_support(10);
  const auto scores = draw_beta_binomial(support, 0.35, 6.0, kRecoveryDraws, 103);
  FitOptions options;
  options.support = support;
  const auto [model, report] = fit_marginal(scores, Family::beta_binomial, options);
  (void)report;
  CHECK(model.params()[0] == doctest::Approx(0.35).epsilon(0.05));
  CHECK(model.params()[1] == doctest::Approx(6.0).epsilon(0.05));
  const auto truth = MarginalModel::beta_binomial(support, 0.35, 6.0);
  CHECK(std::abs(model.mean() - truth.mean()) < 0.005);
}

TEST_CASE("discrete kde recovery is within the smoothing bandwidth") {
  const std::vector<double> support = {0.0, 0.25, 0.5, 0.75, 1.0};
  const std::vector<double> probs = {0.3, 0.25, 0.2, 0.15, 0.1};
  std::mt19937_64 gen(104);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> scores(kRecoveryDraws);
  for (double& x : scores) {
    double u = unif(gen);
    std::size_t i = 0;
    while (i + 1 < probs.size() && u > probs[i]) {
      u -= probs[i];
      ++i;
    }
    x = support[i];
  }
  FitOptions options;
  options.support = support;
  const auto [model, report] = fit_marginal(scores, Family::discrete_kde, options);
  (void)report;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    CHECK(model.probs()[i] == doctest::Approx(probs[i]).epsilon(0.05));
  }
  double truth_mean = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) truth_mean += probs[i] * support[i];
  CHECK(std::abs(model.mean() - truth_mean) < 0.005);
}

TEST_CASE("probability integral transform round trip is uniform") {
  // Checks cdf / inverse_cdf consistency of the fitted continuous models:
  // u -> inverse_cdf -> cdf must return u, so the KS distance of the
  // round-tripped sample against Uniform(0,1) stays below the 1% critical
  // value on 10,000 draws.
  const auto scores = draw_beta(2.2, 4.4, 10000, 105);
  for (Family family : {Family::beta, Family::truncated_normal}) {
    const auto [model, report] = fit_marginal(scores, family);
    (void)report;
    std::mt19937_64 gen(106);
    std::uniform_real_distribution<double> unif(1e-9, 1.0 - 1e-9);
    std::vector<double> v(10000);
    for (double& x : v) x = model.cdf(model.inverse_cdf(unif(gen)));
    std::sort(v.begin(), v.end());
    double d = 0.0;
    const double n = static_cast<double>(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      d = std::max(d, std::max((i + 1.0) / n - v[i], v[i] - i / n));
    }
    INFO(family_label(family));
    CHECK(d < 1.63 / std::sqrt(n));
  }
}
