#ifndef SIGSCALE_COPULAS_HPP
#define SIGSCALE_COPULAS_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sigscale/rng.hpp"

namespace sigscale::copulas {

// Dependent pairs on the open unit square.
struct PseudoObservations {
  std::vector<double> u;
  std::vector<double> v;
  std::size_t n() const { return u.size(); }
};

enum class CopulaFamily { independence, gaussian, clayton, gumbel, frank };

std::string copula_label(CopulaFamily family);
CopulaFamily copula_from_string(const std::string& s);

// One-parameter bivariate dependence model between two systems' scores.
struct CopulaModel {
  CopulaFamily family = CopulaFamily::independence;
  double theta = 0.0;
  double kendall_tau = 0.0;  // tau(theta), consistent with the family map
  double log_likelihood = 0.0;
};

// Rank transform u_i = rank(x_i)/(n+1) with average ranks for ties. Keeps
// every value strictly inside (0,1).
PseudoObservations pseudo_observations(std::span<const double> x,
                                       std::span<const double> y);

// Parametric alternative: u_i = F(x_i) through a caller-supplied CDF,
// clamped into the open interval.
PseudoObservations pseudo_observations_cdf(
    std::span<const double> x, std::span<const double> y,
    const std::function<double(double)>& cdf_x,
    const std::function<double(double)>& cdf_y);

// Tie-adjusted Kendall tau-b in O(n log n). Returns 0 when either vector has
// no variance.
double kendall_tau(std::span<const double> x, std::span<const double> y);

// tau(theta) per family and its inverse (used to initialize the fit).
double tau_from_theta(CopulaFamily family, double theta);
double theta_from_tau(CopulaFamily family, double tau);

// Log pseudo-likelihood of observations under (family, theta).
double copula_log_likelihood(CopulaFamily family, double theta,
                             const PseudoObservations& p);

// Kendall-tau initialization refined by maximum pseudo-likelihood; the
// family with the highest log-likelihood wins. Families incompatible with
// the sample tau (negative tau for clayton/gumbel) are skipped; if every
// family is skipped the independence copula is returned.
CopulaModel fit_copula(const PseudoObservations& p,
                       const std::vector<CopulaFamily>& families);

const std::vector<CopulaFamily>& all_copula_families();

// Draws one dependent pair; gaussian via correlated normal quantiles, the
// archimedean families via the conditional-distribution (inverse h-function)
// method.
void sample_pair(const CopulaModel& c, Rng& rng, double& u, double& v);
void sample_into(const CopulaModel& c, Rng& rng, std::span<double> u,
                 std::span<double> v);
PseudoObservations sample_copula(const CopulaModel& c, std::size_t n,
                                 std::uint64_t seed);

}  // namespace sigscale::copulas

#endif  // SIGSCALE_COPULAS_HPP
