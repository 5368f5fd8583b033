#pragma once

// Reference implementations used only by tests. Deliberately written without touching the
// library's own helpers.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

// Risk transform and reward in long double.
inline long double f_bg(long double bg) {
  return 1.509L * (std::pow(std::log(bg), 1.084L) - 5.381L);
}

inline long double risk_index(long double bg) {
  const long double f = f_bg(bg);
  return 10.0L * f * f;  // exactly one of LBGI/HBGI is non-zero
}

inline long double reward(long double bg, bool terminated) {
  return (100.0L - risk_index(bg)) / 100.0L + (terminated ? -100.0L : 0.0L);
}

inline long double bisect(const std::function<long double(long double)>& f, long double lo,
                          long double hi, int iters = 200) {
  long double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const long double mid = 0.5L * (lo + hi);
    const long double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5L * (lo + hi);
}

// Composite Simpson on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Advantages as explicit truncated sums of discounted TD errors.
inline std::vector<double> brute_gae(const std::vector<double>& r, const std::vector<double>& v,
                                     const std::vector<double>& nv, const std::vector<bool>& end,
                                     double gamma, double lambda) {
  const std::size_t n = r.size();
  std::vector<double> adv(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double w = 1.0;
    for (std::size_t k = t; k < n; ++k) {
      adv[t] += w * (r[k] + gamma * nv[k] - v[k]);
      if (end[k]) break;
      w *= gamma * lambda;
    }
  }
  return adv;
}

inline double central_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2 * h);
}

}  // namespace oracle
