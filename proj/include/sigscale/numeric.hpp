#ifndef SIGSCALE_NUMERIC_HPP
#define SIGSCALE_NUMERIC_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>

#include <boost/math/tools/minima.hpp>

namespace sigscale::numeric {

// Minimum of a unimodal function on [lo, hi] via Brent's method.
template <typename F>
std::pair<double, double> minimize_brent(F&& f, double lo, double hi,
                                         int bits = 45) {
  std::uintmax_t max_iter = 200;
  return boost::math::tools::brent_find_minima(std::forward<F>(f), lo, hi, bits,
                                               max_iter);
}

// Root of a continuous function on a bracketing interval by bisection.
// |f| <= f_tol or interval width <= x_tol terminates.
template <typename F>
double bisect_root(F&& f, double lo, double hi, double x_tol = 1e-13,
                   double f_tol = 1e-9, int max_iter = 200) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw std::domain_error("bisect_root: interval does not bracket a root");
  }
  double mid = 0.5 * (lo + hi);
  for (int i = 0; i < max_iter; ++i) {
    mid = 0.5 * (lo + hi);
    const double fmid = f(mid);
    if (std::abs(fmid) <= f_tol || (hi - lo) <= x_tol) return mid;
    if ((fmid > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return mid;
}

}  // namespace sigscale::numeric

#endif  // SIGSCALE_NUMERIC_HPP
