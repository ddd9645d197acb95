#include "sigscale/copulas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "sigscale/numeric.hpp"

namespace sigscale::copulas {

namespace {

constexpr double kMaxRho = 0.9999;
constexpr double kMaxArchimedeanTheta = 50.0;
constexpr double kMinClaytonTheta = 1e-4;
constexpr double kMinGumbelTheta = 1.0 + 1e-6;
constexpr double kUnitClamp = 1e-15;

const boost::math::normal_distribution<double> kStdNormal;

double norm_cdf(double x) { return boost::math::cdf(kStdNormal, x); }
double norm_quantile(double u) { return boost::math::quantile(kStdNormal, u); }

double clamp_open_unit(double x) {
  return std::min(1.0 - kUnitClamp, std::max(kUnitClamp, x));
}

// Average ranks, ties shared.
std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg;
    i = j;
  }
  return ranks;
}

// First-order Debye function D1(t) = (1/t) * integral_0^t s/(e^s - 1) ds for
// t > 0, by 64-point Gauss-Legendre quadrature of the smooth integrand
// s/expm1(s).
double debye1(double t) {
  static const int kPoints = 64;
  static std::vector<double> nodes;
  static std::vector<double> weights;
  if (nodes.empty()) {
    // Golub-Welsch via Newton on Legendre polynomials.
    nodes.resize(kPoints);
    weights.resize(kPoints);
    for (int i = 0; i < kPoints; ++i) {
      double x = std::cos(std::acos(-1.0) * (i + 0.75) / (kPoints + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= kPoints; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        const double dp = kPoints * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= kPoints; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = kPoints * (x * p1 - p0) / (x * x - 1.0);
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
  double acc = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    const double s = 0.5 * t * (nodes[i] + 1.0);
    const double f = s < 1e-12 ? 1.0 : s / std::expm1(s);
    acc += weights[i] * f;
  }
  return 0.5 * acc;  // (1/t) * (t/2) * sum
}

double frank_tau(double theta) {
  if (std::abs(theta) < 1e-9) return 0.0;
  const double t = std::abs(theta);
  const double tau = 1.0 - 4.0 / t * (1.0 - debye1(t));
  return theta > 0.0 ? tau : -tau;
}

}  // namespace

std::string copula_label(CopulaFamily family) {
  switch (family) {
    case CopulaFamily::independence: return "independence";
    case CopulaFamily::gaussian: return "gaussian";
    case CopulaFamily::clayton: return "clayton";
    case CopulaFamily::gumbel: return "gumbel";
    case CopulaFamily::frank: return "frank";
  }
  return "?";
}

CopulaFamily copula_from_string(const std::string& s) {
  for (CopulaFamily f : all_copula_families()) {
    if (copula_label(f) == s) return f;
  }
  throw std::invalid_argument("unknown copula family '" + s + "'");
}

const std::vector<CopulaFamily>& all_copula_families() {
  static const std::vector<CopulaFamily> families = {
      CopulaFamily::independence, CopulaFamily::gaussian, CopulaFamily::clayton,
      CopulaFamily::gumbel, CopulaFamily::frank};
  return families;
}

PseudoObservations pseudo_observations(std::span<const double> x,
                                       std::span<const double> y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("paired vectors differ in length");
  }
  if (x.size() < 2) throw std::invalid_argument("need at least 2 pairs");
  PseudoObservations p;
  p.u = average_ranks(x);
  p.v = average_ranks(y);
  const double denom = static_cast<double>(x.size()) + 1.0;
  for (double& r : p.u) r /= denom;
  for (double& r : p.v) r /= denom;
  return p;
}

PseudoObservations pseudo_observations_cdf(
    std::span<const double> x, std::span<const double> y,
    const std::function<double(double)>& cdf_x,
    const std::function<double(double)>& cdf_y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("paired vectors differ in length");
  }
  PseudoObservations p;
  p.u.resize(x.size());
  p.v.resize(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    p.u[i] = clamp_open_unit(cdf_x(x[i]));
    p.v[i] = clamp_open_unit(cdf_y(y[i]));
  }
  return p;
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw std::invalid_argument("paired vectors differ in length");
  if (n < 2) throw std::invalid_argument("need at least 2 pairs");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });

  auto pairs_of = [](double t) { return t * (t - 1.0) / 2.0; };

  // Tie counts among x and among joint (x, y) groups.
  double tie_x = 0.0;
  double tie_xy = 0.0;
  {
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j < n && x[order[j]] == x[order[i]]) ++j;
      tie_x += pairs_of(static_cast<double>(j - i));
      std::size_t a = i;
      while (a < j) {
        std::size_t b = a;
        while (b < j && y[order[b]] == y[order[a]]) ++b;
        tie_xy += pairs_of(static_cast<double>(b - a));
        a = b;
      }
      i = j;
    }
  }

  // Knight's algorithm: discordant pairs are the inversions of y once sorted
  // lexicographically by (x, y).
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  double swaps = 0.0;
  {
    std::vector<double> buffer(n);
    for (std::size_t width = 1; width < n; width *= 2) {
      for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
        const std::size_t mid = lo + width;
        const std::size_t hi = std::min(lo + 2 * width, n);
        std::size_t a = lo;
        std::size_t b = mid;
        std::size_t out = lo;
        while (a < mid && b < hi) {
          if (ys[a] <= ys[b]) {
            buffer[out++] = ys[a++];
          } else {
            swaps += static_cast<double>(mid - a);
            buffer[out++] = ys[b++];
          }
        }
        while (a < mid) buffer[out++] = ys[a++];
        while (b < hi) buffer[out++] = ys[b++];
        std::copy(buffer.begin() + static_cast<std::ptrdiff_t>(lo),
                  buffer.begin() + static_cast<std::ptrdiff_t>(hi),
                  ys.begin() + static_cast<std::ptrdiff_t>(lo));
      }
    }
  }

  double tie_y = 0.0;
  {
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j < n && ys[j] == ys[i]) ++j;
      tie_y += pairs_of(static_cast<double>(j - i));
      i = j;
    }
  }

  const double total = pairs_of(static_cast<double>(n));
  const double denom = std::sqrt((total - tie_x) * (total - tie_y));
  if (denom == 0.0) return 0.0;  // no variance in at least one vector
  const double con_minus_dis = total - tie_x - tie_y + tie_xy - 2.0 * swaps;
  return con_minus_dis / denom;
}

double tau_from_theta(CopulaFamily family, double theta) {
  switch (family) {
    case CopulaFamily::independence: return 0.0;
    case CopulaFamily::gaussian: return 2.0 / std::acos(-1.0) * std::asin(theta);
    case CopulaFamily::clayton: return theta / (theta + 2.0);
    case CopulaFamily::gumbel: return 1.0 - 1.0 / theta;
    case CopulaFamily::frank: return frank_tau(theta);
  }
  return 0.0;
}

double theta_from_tau(CopulaFamily family, double tau) {
  switch (family) {
    case CopulaFamily::independence:
      return 0.0;
    case CopulaFamily::gaussian:
      return std::sin(std::acos(-1.0) * tau / 2.0);
    case CopulaFamily::clayton:
      if (tau <= 0.0) throw std::domain_error("clayton requires tau > 0");
      return 2.0 * tau / (1.0 - tau);
    case CopulaFamily::gumbel:
      if (tau <= 0.0) throw std::domain_error("gumbel requires tau > 0");
      return 1.0 / (1.0 - tau);
    case CopulaFamily::frank: {
      if (std::abs(tau) < 1e-9) return 0.0;
      const double target = std::abs(tau);
      if (frank_tau(kMaxArchimedeanTheta) <= target) return std::copysign(kMaxArchimedeanTheta, tau);
      const double theta = numeric::bisect_root(
          [&](double t) { return frank_tau(t) - target; }, 1e-8,
          kMaxArchimedeanTheta, 1e-12, 1e-12);
      return std::copysign(theta, tau);
    }
  }
  return 0.0;
}

namespace {

double log_density(CopulaFamily family, double theta, double u, double v,
                   double zu, double zv) {
  switch (family) {
    case CopulaFamily::independence:
      return 0.0;
    case CopulaFamily::gaussian: {
      const double r2 = theta * theta;
      return -0.5 * std::log1p(-r2) +
             (2.0 * theta * zu * zv - r2 * (zu * zu + zv * zv)) / (2.0 * (1.0 - r2));
    }
    case CopulaFamily::clayton: {
      const double lu = std::log(u);
      const double lv = std::log(v);
      // log(u^-t + v^-t - 1) via log-sum-exp; the power terms overflow
      // directly for large theta.
      const double t1 = -theta * lu;
      const double t2 = -theta * lv;
      const double m = std::max(t1, t2);
      const double log_s =
          m + std::log(std::exp(t1 - m) + std::exp(t2 - m) - std::exp(-m));
      return std::log1p(theta) - (theta + 1.0) * (lu + lv) -
             (2.0 + 1.0 / theta) * log_s;
    }
    case CopulaFamily::gumbel: {
      const double x = -std::log(u);
      const double y = -std::log(v);
      const double lx = std::log(x);
      const double ly = std::log(y);
      const double t1 = theta * lx;
      const double t2 = theta * ly;
      const double m = std::max(t1, t2);
      const double log_a = (m + std::log1p(std::exp(std::min(t1, t2) - m))) / theta;
      const double a = std::exp(log_a);
      return -a + x + y + (theta - 1.0) * (lx + ly) + (1.0 - 2.0 * theta) * log_a +
             std::log(a + theta - 1.0);
    }
    case CopulaFamily::frank: {
      // D = e^{-tu} + e^{-tv} - e^{-t(u+v)} - e^{-t}, evaluated around its
      // largest exponent; the textbook (1-e^{-t}) - (1-e^{-tu})(1-e^{-tv})
      // cancels to zero in doubles when theta(u+v) is large.
      const double t1 = -theta * u;
      const double t2 = -theta * v;
      const double t3 = -theta * (u + v);
      const double t4 = -theta;
      const double m = std::max(std::max(t1, t2), std::max(t3, t4));
      const double d = std::exp(t1 - m) + std::exp(t2 - m) - std::exp(t3 - m) -
                       std::exp(t4 - m);
      return std::log(theta * (-std::expm1(-theta))) - theta * (u + v) -
             2.0 * (m + std::log(std::abs(d)));
    }
  }
  return 0.0;
}

}  // namespace

double copula_log_likelihood(CopulaFamily family, double theta,
                             const PseudoObservations& p) {
  std::vector<double> zu;
  std::vector<double> zv;
  if (family == CopulaFamily::gaussian) {
    zu.resize(p.n());
    zv.resize(p.n());
    for (std::size_t i = 0; i < p.n(); ++i) {
      zu[i] = norm_quantile(p.u[i]);
      zv[i] = norm_quantile(p.v[i]);
    }
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < p.n(); ++i) {
    acc += log_density(family, theta, p.u[i], p.v[i],
                       family == CopulaFamily::gaussian ? zu[i] : 0.0,
                       family == CopulaFamily::gaussian ? zv[i] : 0.0);
  }
  return acc;
}

CopulaModel fit_copula(const PseudoObservations& p,
                       const std::vector<CopulaFamily>& families) {
  if (p.n() < 30) {
    throw std::invalid_argument("copula fit needs at least 30 pairs");
  }
  for (std::size_t i = 0; i < p.n(); ++i) {
    if (!(p.u[i] > 0.0 && p.u[i] < 1.0 && p.v[i] > 0.0 && p.v[i] < 1.0)) {
      throw std::invalid_argument("pseudo-observations must lie strictly in (0,1)");
    }
  }
  const double sample_tau = kendall_tau(p.u, p.v);

  std::vector<double> zu(p.n());
  std::vector<double> zv(p.n());
  for (std::size_t i = 0; i < p.n(); ++i) {
    zu[i] = norm_quantile(p.u[i]);
    zv[i] = norm_quantile(p.v[i]);
  }
  auto loglik = [&](CopulaFamily family, double theta) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.n(); ++i) {
      acc += log_density(family, theta, p.u[i], p.v[i], zu[i], zv[i]);
    }
    return acc;
  };

  // Tie-break on exact log-likelihood ties: least-constrained family first.
  const CopulaFamily preference[] = {CopulaFamily::independence,
                                     CopulaFamily::gaussian, CopulaFamily::frank,
                                     CopulaFamily::clayton, CopulaFamily::gumbel};

  bool have_best = false;
  CopulaModel best;
  for (CopulaFamily family : preference) {
    if (std::find(families.begin(), families.end(), family) == families.end()) {
      continue;
    }
    CopulaModel candidate;
    candidate.family = family;
    if (family == CopulaFamily::independence) {
      candidate.theta = 0.0;
      candidate.log_likelihood = 0.0;
    } else if (family == CopulaFamily::clayton || family == CopulaFamily::gumbel) {
      if (sample_tau <= 0.0) continue;  // incompatible with negative dependence
      const double lo = family == CopulaFamily::clayton ? kMinClaytonTheta : kMinGumbelTheta;
      auto [theta, neg_ll] = numeric::minimize_brent(
          [&](double t) { return -loglik(family, t); }, lo, kMaxArchimedeanTheta);
      candidate.theta = theta;
      candidate.log_likelihood = -neg_ll;
    } else if (family == CopulaFamily::gaussian) {
      auto [theta, neg_ll] = numeric::minimize_brent(
          [&](double t) { return -loglik(family, t); }, -kMaxRho, kMaxRho);
      candidate.theta = theta;
      candidate.log_likelihood = -neg_ll;
    } else {  // frank
      auto [theta, neg_ll] = numeric::minimize_brent(
          [&](double t) { return -loglik(family, t); }, -kMaxArchimedeanTheta,
          kMaxArchimedeanTheta);
      if (std::abs(theta) < 1e-8) theta = std::copysign(1e-8, theta);
      candidate.theta = theta;
      candidate.log_likelihood = -neg_ll;
    }
    candidate.kendall_tau = tau_from_theta(family, candidate.theta);
    if (!have_best || candidate.log_likelihood > best.log_likelihood) {
      best = candidate;
      have_best = true;
    }
  }
  if (!have_best) {
    best.family = CopulaFamily::independence;
    best.theta = 0.0;
    best.kendall_tau = 0.0;
    best.log_likelihood = 0.0;
  }
  return best;
}

void sample_pair(const CopulaModel& c, Rng& rng, double& u, double& v) {
  const double w1 = rng.uniform();
  const double w2 = rng.uniform();
  switch (c.family) {
    case CopulaFamily::independence: {
      u = w1;
      v = w2;
      return;
    }
    case CopulaFamily::gaussian: {
      const double z1 = norm_quantile(w1);
      const double z2 = c.theta * z1 +
                        std::sqrt(1.0 - c.theta * c.theta) * norm_quantile(w2);
      u = w1;
      v = clamp_open_unit(norm_cdf(z2));
      return;
    }
    case CopulaFamily::clayton: {
      const double theta = c.theta;
      const double inner =
          (std::pow(w2, -theta / (1.0 + theta)) - 1.0) * std::pow(w1, -theta) + 1.0;
      u = w1;
      v = clamp_open_unit(std::pow(inner, -1.0 / theta));
      return;
    }
    case CopulaFamily::frank: {
      // Inverse h-function in the cancellation-free ratio form
      // v = -(1/theta) log[(a(1-w) + w e^{-theta}) / (a(1-w) + w)].
      const double theta = c.theta;
      const double a = std::exp(-theta * w1);
      const double num = a * (1.0 - w2) + w2 * std::exp(-theta);
      const double den = a * (1.0 - w2) + w2;
      u = w1;
      v = clamp_open_unit(-std::log(num / den) / theta);
      return;
    }
    case CopulaFamily::gumbel: {
      const double theta = c.theta;
      const double x = -std::log(w1);
      const double lx = std::log(x);
      const double lw = std::log(w2);
      // The conditional CDF given u is h(v|u) = exp(x - A) (A/x)^{1-theta}
      // with A = (x^theta + y^theta)^{1/theta} >= x. In logs this is
      // f(A) = x - A + (1-theta) ln(A) - rhs = 0, strictly decreasing in A;
      // Newton from the theta = 1 solution, kept inside a bisection bracket.
      const double rhs = lw - (theta - 1.0) * lx;
      auto f = [&](double a) { return x - a + (1.0 - theta) * std::log(a) - rhs; };
      double lo = x;
      double hi = x - lw + 8.0 * theta + 8.0;
      while (f(hi) > 0.0) hi *= 2.0;
      double a = std::min(std::max(x - lw, lo * (1.0 + 1e-12)), hi);
      for (int it = 0; it < 100; ++it) {
        const double fa = f(a);
        if (fa > 0.0) lo = a;
        else hi = a;
        const double da = fa / (-1.0 + (1.0 - theta) / a);
        double next = a - da;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - a) < 1e-14 * a) {
          a = next;
          break;
        }
        a = next;
      }
      // y = (A^theta - x^theta)^{1/theta} evaluated in logs to avoid
      // overflow: ln y = ln A + log1p(-(x/A)^theta) / theta.
      const double ratio_pow = std::exp(theta * (lx - std::log(a)));
      const double ln_y =
          std::log(a) + std::log1p(-std::min(ratio_pow, 1.0 - 1e-16)) / theta;
      u = w1;
      v = clamp_open_unit(std::exp(-std::exp(ln_y)));
      return;
    }
  }
}

void sample_into(const CopulaModel& c, Rng& rng, std::span<double> u,
                 std::span<double> v) {
  for (std::size_t i = 0; i < u.size(); ++i) sample_pair(c, rng, u[i], v[i]);
}

PseudoObservations sample_copula(const CopulaModel& c, std::size_t n,
                                 std::uint64_t seed) {
  PseudoObservations p;
  p.u.resize(n);
  p.v.resize(n);
  Rng rng(seed);
  sample_into(c, rng, p.u, p.v);
  return p;
}

}  // namespace sigscale::copulas
