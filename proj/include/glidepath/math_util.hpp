#pragma once

// Numeric building blocks shared across the library: the auxiliary
// mean-reversion integrals Psi/Theta/Upsilon, the standard normal CDF,
// adaptive Simpson quadrature, a pivoted 2x2 linear solve, pairwise
// summation and a Brent root finder.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace glidepath {

/// Thrown when an iterative numeric routine cannot reach its tolerance.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

namespace detail {
// Below this value of |a*t| the closed forms of theta/upsilon lose digits to
// cancellation (relative error ~ eps/(a t)^2 resp. ~ eps/(a t)^3); the Taylor
// branch is fully converged well before the cutoff.
inline constexpr double kSeriesCutoff = 0.05;
}  // namespace detail

/// Psi(a,t) = int_0^t e^{-a u} du = (1 - e^{-a t})/a; equals t at a = 0.
inline double psi(double a, double t) {
  if (t < 0.0) throw std::invalid_argument("psi: t must be >= 0");
  if (a == 0.0) return t;
  return -std::expm1(-a * t) / a;
}

/// Theta(a,t) = int_0^t Psi(a,s) ds = (-1 + a t + e^{-a t})/a^2; t^2/2 at a = 0.
inline double theta(double a, double t) {
  if (t < 0.0) throw std::invalid_argument("theta: t must be >= 0");
  const double u = a * t;
  if (std::abs(u) > detail::kSeriesCutoff)
    return (-1.0 + u + std::exp(-u)) / (a * a);
  // Taylor branch: t^2 * sum_{k>=0} (-u)^k / (k+2)!
  double sum = 0.0, pow_u = 1.0, fact = 2.0;
  for (int k = 0; k <= 12; ++k) {
    const double term = pow_u / fact;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    pow_u *= -u;
    fact *= static_cast<double>(k + 3);
  }
  return t * t * sum;
}

/// Upsilon(a,t) = int_0^t Psi(a,s)^2 ds
///              = (-3 + 2 a t + 4 e^{-a t} - e^{-2 a t})/(2 a^3); t^3/3 at a = 0.
inline double upsilon(double a, double t) {
  if (t < 0.0) throw std::invalid_argument("upsilon: t must be >= 0");
  const double u = a * t;
  if (std::abs(u) > detail::kSeriesCutoff)
    return (-3.0 + 2.0 * u + 4.0 * std::exp(-u) - std::exp(-2.0 * u)) / (2.0 * a * a * a);
  // Taylor branch: t^3 * sum_{j>=0} [8(-2)^j - 4(-1)^j] u^j / (2 (j+3)!)
  double sum = 0.0, pow_u = 1.0, fact = 6.0, sign = 1.0, pow2 = 1.0;
  for (int j = 0; j <= 16; ++j) {
    const double term = (8.0 * pow2 - 4.0 * sign) * pow_u / (2.0 * fact);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    pow_u *= u;
    sign = -sign;
    pow2 *= -2.0;
    fact *= static_cast<double>(j + 4);
  }
  return t * t * t * sum;
}

/// Standard normal CDF via the complementary error function.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace detail {

template <class F>
double simpson_rec(const F& f, double a, double fa, double b, double fb, double m, double fm,
                   double whole, double tol, int depth, double& err_unresolved) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) * (fa + 4.0 * flm + fm) / 6.0;
  const double right = (b - m) * (fm + 4.0 * frm + fb) / 6.0;
  const double delta = left + right - whole;
  // Refining past the point where delta is dominated by roundoff in the
  // panel sums cannot improve the estimate, only recurse forever.
  const double roundoff = 16.0 * std::numeric_limits<double>::epsilon() *
                          (std::abs(left) + std::abs(right) + std::abs(whole));
  const bool converged = std::abs(delta) <= 15.0 * tol || std::abs(delta) <= roundoff;
  if (converged || depth <= 0) {
    if (!converged) err_unresolved += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1, err_unresolved) +
         simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1, err_unresolved);
}

}  // namespace detail

/// Adaptive Simpson integral of f over [a,b] with absolute tolerance abs_tol.
/// Throws NumericError when refinement bottoms out with the running error
/// estimate still above tolerance; the message carries the achieved estimate.
template <class F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-10) {
  if (!(b >= a)) throw std::invalid_argument("integrate: requires b >= a");
  if (a == b) return 0.0;
  constexpr int kPanels = 8;
  constexpr int kMaxDepth = 30;
  const double h = (b - a) / kPanels;
  const double panel_tol = abs_tol / kPanels;
  double total = 0.0, err_unresolved = 0.0;
  for (int i = 0; i < kPanels; ++i) {
    const double x0 = a + i * h;
    const double x1 = (i + 1 == kPanels) ? b : a + (i + 1) * h;
    const double xm = 0.5 * (x0 + x1);
    const double f0 = f(x0), f1 = f(x1), fm = f(xm);
    const double whole = (x1 - x0) * (f0 + 4.0 * fm + f1) / 6.0;
    total += detail::simpson_rec(f, x0, f0, x1, f1, xm, fm, whole, panel_tol, kMaxDepth,
                                 err_unresolved);
  }
  if (!std::isfinite(total) || !(err_unresolved <= abs_tol)) {
    throw NumericError("integrate: tolerance not reached, residual error estimate " +
                       std::to_string(err_unresolved));
  }
  return total;
}

struct Solve2x2Result {
  double x0 = 0.0;
  double x1 = 0.0;
  bool singular = false;
};

/// Solves [[a11 a12],[a21 a22]] (x0,x1)' = (r1,r2)' by elimination with
/// partial pivoting. The system is flagged singular when |det| falls below
/// 1e-14 relative to the magnitude of the determinant's two products.
inline Solve2x2Result solve2x2(double a11, double a12, double r1, double a21, double a22,
                               double r2) {
  Solve2x2Result out;
  const double det = a11 * a22 - a12 * a21;
  const double scale = std::abs(a11 * a22) + std::abs(a12 * a21);
  if (scale == 0.0 || std::abs(det) <= 1e-14 * scale) {
    out.singular = true;
    return out;
  }
  if (std::abs(a21) > std::abs(a11)) {
    std::swap(a11, a21);
    std::swap(a12, a22);
    std::swap(r1, r2);
  }
  const double m = a21 / a11;
  out.x1 = (r2 - m * r1) / (a22 - m * a12);
  out.x0 = (r1 - a12 * out.x1) / a11;
  return out;
}

namespace detail {

inline double pairwise_sum_impl(const double* v, std::size_t n) {
  if (n <= 32) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_impl(v, half) + pairwise_sum_impl(v + half, n - half);
}

}  // namespace detail

/// Pairwise (cascade) summation; the result is independent of how the caller
/// partitioned the work, which keeps reductions thread-count invariant.
inline double pairwise_sum(const std::vector<double>& v) {
  return v.empty() ? 0.0 : detail::pairwise_sum_impl(v.data(), v.size());
}

/// Brent's method on a sign-changing bracket [lo, hi].
template <class F>
double brent(F&& f, double lo, double hi, double xtol = 1e-12, int max_iter = 200) {
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0))
    throw std::invalid_argument("brent: endpoints do not bracket a root");
  if (std::abs(fa) < std::abs(fb)) {
    std::swap(a, b);
    std::swap(fa, fb);
  }
  double c = a, fc = fa, d = b - a;
  bool used_bisection = true;
  for (int it = 0; it < max_iter; ++it) {
    if (fb == 0.0 || std::abs(b - a) < xtol) return b;
    double s;
    if (fa != fc && fb != fc) {
      s = a * fb * fc / ((fa - fb) * (fa - fc)) + b * fa * fc / ((fb - fa) * (fb - fc)) +
          c * fa * fb / ((fc - fa) * (fc - fb));
    } else {
      s = b - fb * (b - a) / (fb - fa);
    }
    const double bound = (3.0 * a + b) / 4.0;
    const bool outside = (s <= std::min(bound, b)) || (s >= std::max(bound, b));
    const bool slow_bisect = used_bisection && std::abs(s - b) >= 0.5 * std::abs(b - c);
    const bool slow_interp = !used_bisection && std::abs(s - b) >= 0.5 * std::abs(c - d);
    const bool tiny_bisect = used_bisection && std::abs(b - c) < xtol;
    const bool tiny_interp = !used_bisection && std::abs(c - d) < xtol;
    if (outside || slow_bisect || slow_interp || tiny_bisect || tiny_interp) {
      s = 0.5 * (a + b);
      used_bisection = true;
    } else {
      used_bisection = false;
    }
    const double fs = f(s);
    d = c;
    c = b;
    fc = fb;
    if ((fa > 0.0) != (fs > 0.0)) {
      b = s;
      fb = fs;
    } else {
      a = s;
      fa = fs;
    }
    if (std::abs(fa) < std::abs(fb)) {
      std::swap(a, b);
      std::swap(fa, fb);
    }
  }
  return b;
}

}  // namespace glidepath
