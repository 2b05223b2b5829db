#pragma once

#include <cmath>
#include <functional>
#include <limits>

namespace collabgame {

struct ScalarOptimum {
  double x = 0.0;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Brent's method (golden-section steps with parabolic interpolation) for the maximum of `f`
/// on [lo, hi]. Stops once the bracket is narrower than `bracket_tol`.
inline ScalarOptimum maximize_brent(const std::function<double(double)>& f, double lo, double hi,
                                    double bracket_tol = 1e-10, int max_iter = 500) {
  constexpr double kGolden = 0.3819660112501051;  // (3 - sqrt 5) / 2
  constexpr double kTiny = 1e-14;
  auto g = [&](double x) { return -f(x); };

  double a = lo, b = hi;
  double x = a + kGolden * (b - a);
  double w = x, v = x;
  double fx = g(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;

  ScalarOptimum out;
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it;
    const double mid = 0.5 * (a + b);
    const double tol1 = kTiny * std::abs(x) + 0.25 * bracket_tol;
    const double tol2 = 2.0 * tol1;
    if (b - a < bracket_tol) {
      out.converged = true;
      break;
    }
    bool golden = true;
    if (std::abs(e) > tol1) {
      // Parabola through (v, fv), (w, fw), (x, fx).
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double etemp = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = mid >= x ? tol1 : -tol1;
        golden = false;
      }
    }
    if (golden) {
      e = (x >= mid ? a : b) - x;
      d = kGolden * e;
    }
    const double u = std::abs(d) >= tol1 ? x + d : x + (d > 0 ? tol1 : -tol1);
    const double fu = g(u);
    if (fu <= fx) {
      if (u >= x) a = x;
      else b = x;
      v = w, fv = fw;
      w = x, fw = fx;
      x = u, fx = fu;
    } else {
      if (u < x) a = u;
      else b = u;
      if (fu <= fw || w == x) {
        v = w, fv = fw;
        w = u, fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u, fv = fu;
      }
    }
  }
  out.x = x;
  out.value = -fx;
  return out;
}

}  // namespace collabgame
