#pragma once

// Exponential-polynomial algebra: finite sums f(s) = sum c_i s^{k_i} e^{z_i s}
// with complex coefficients and rates. This family is closed under products,
// differentiation, antiderivatives and one-sided exponential convolutions,
// which is exactly what the closed-form strategies and their indirect-effect
// integrals need. Real-valued functions keep imaginary parts at roundoff
// because trigonometric content enters as conjugate pairs.

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace glidepath {

class ExpPoly {
 public:
  struct Term {
    std::complex<double> coef;
    int power = 0;
    std::complex<double> rate;
  };

  ExpPoly() = default;

  static ExpPoly constant(double c) {
    ExpPoly p;
    p.add_term(c, 0, 0.0);
    return p;
  }

  /// c * s^k * e^{z s}
  static ExpPoly monomial(std::complex<double> c, int k, std::complex<double> z) {
    ExpPoly p;
    p.add_term(c, k, z);
    return p;
  }

  /// c * s^k * e^{a s} cos(b s)
  static ExpPoly damped_cos(double c, int k, double a, double b) {
    ExpPoly p;
    p.add_term({0.5 * c, 0.0}, k, {a, b});
    p.add_term({0.5 * c, 0.0}, k, {a, -b});
    return p;
  }

  /// c * s^k * e^{a s} sin(b s)
  static ExpPoly damped_sin(double c, int k, double a, double b) {
    ExpPoly p;
    p.add_term({0.0, -0.5 * c}, k, {a, b});
    p.add_term({0.0, 0.5 * c}, k, {a, -b});
    return p;
  }

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(std::complex<double> coef, int power, std::complex<double> rate) {
    if (coef == std::complex<double>(0.0, 0.0)) return;
    for (auto& t : terms_) {
      if (t.power == power && t.rate == rate) {
        t.coef += coef;
        return;
      }
    }
    terms_.push_back({coef, power, rate});
  }

  ExpPoly& operator+=(const ExpPoly& o) {
    for (const auto& t : o.terms_) add_term(t.coef, t.power, t.rate);
    return *this;
  }

  friend ExpPoly operator+(ExpPoly a, const ExpPoly& b) {
    a += b;
    return a;
  }

  friend ExpPoly operator-(ExpPoly a, const ExpPoly& b) {
    for (const auto& t : b.terms_) a.add_term(-t.coef, t.power, t.rate);
    return a;
  }

  ExpPoly scaled(std::complex<double> k) const {
    ExpPoly out;
    for (const auto& t : terms_) out.add_term(k * t.coef, t.power, t.rate);
    return out;
  }

  friend ExpPoly operator*(const ExpPoly& a, const ExpPoly& b) {
    ExpPoly out;
    for (const auto& ta : a.terms_)
      for (const auto& tb : b.terms_)
        out.add_term(ta.coef * tb.coef, ta.power + tb.power, ta.rate + tb.rate);
    return out;
  }

  std::complex<double> evaluate_complex(double s) const {
    std::complex<double> acc{0.0, 0.0};
    for (const auto& t : terms_) acc += t.coef * pow_int(s, t.power) * std::exp(t.rate * s);
    return acc;
  }

  double evaluate(double s) const { return evaluate_complex(s).real(); }

  ExpPoly derivative() const {
    ExpPoly out;
    for (const auto& t : terms_) {
      out.add_term(t.coef * t.rate, t.power, t.rate);
      if (t.power >= 1) out.add_term(t.coef * static_cast<double>(t.power), t.power - 1, t.rate);
    }
    return out;
  }

  /// Antiderivative F with F' = *this. `domain` bounds the interval [0, L] on
  /// which F will be used; terms with |rate|*L <= 0.5 take a Taylor series in
  /// the rate (the closed form cancels catastrophically there).
  ExpPoly antiderivative(double domain) const {
    const double L = std::max(domain, 1e-12);
    ExpPoly out;
    for (const auto& t : terms_) {
      const std::complex<double> z = t.rate;
      const int k = t.power;
      if (std::abs(z) * L <= 0.5) {
        // F = sum_m c z^m s^{k+m+1} / (m! (k+m+1)); rate-0 polynomial.
        std::complex<double> zm{1.0, 0.0};
        double fact = 1.0;
        double lead_mag = 0.0;
        for (int m = 0; m <= 60; ++m) {
          const std::complex<double> coef = t.coef * zm / (fact * (k + m + 1));
          const double mag = std::abs(coef) * std::pow(L, k + m + 1);
          if (m == 0) lead_mag = mag;
          if (m > 0 && mag <= 1e-18 * lead_mag) break;
          out.add_term(coef, k + m + 1, 0.0);
          zm *= z;
          fact *= static_cast<double>(m + 1);
        }
      } else {
        // F = e^{z s} sum_{j=0}^{k} (-1)^{k-j} (k!/j!) z^{-(k-j+1)} c s^j.
        std::complex<double> factor = t.coef / z;  // j = k coefficient
        for (int j = k; j >= 0; --j) {
          out.add_term(factor, j, z);
          factor *= -static_cast<double>(j) / z;
        }
      }
    }
    return out;
  }

  /// int_0^t f(s) ds
  double integrate(double t) const {
    const ExpPoly f_anti = antiderivative(t);
    return (f_anti.evaluate_complex(t) - f_anti.evaluate_complex(0.0)).real();
  }

  /// u -> int_u^T f(s) e^{-r (s-u)} ds
  ExpPoly tail_convolution(double r, double T) const {
    ExpPoly damped;
    for (const auto& t : terms_) damped.add_term(t.coef, t.power, t.rate - r);
    const ExpPoly g_anti = damped.antiderivative(T);
    ExpPoly out;
    out.add_term(g_anti.evaluate_complex(T), 0, r);
    for (const auto& t : g_anti.terms()) out.add_term(-t.coef, t.power, t.rate + r);
    return out;
  }

  /// s -> int_0^s f(u) e^{-r (s-u)} du, for s in [0, domain]
  ExpPoly head_convolution(double r, double domain) const {
    ExpPoly boosted;
    for (const auto& t : terms_) boosted.add_term(t.coef, t.power, t.rate + r);
    const ExpPoly g_anti = boosted.antiderivative(domain);
    ExpPoly out;
    for (const auto& t : g_anti.terms()) out.add_term(t.coef, t.power, t.rate - r);
    out.add_term(-g_anti.evaluate_complex(0.0), 0, -r);
    return out;
  }

 private:
  static std::complex<double> pow_int(double s, int k) {
    double acc = 1.0;
    for (int i = 0; i < k; ++i) acc *= s;
    return {acc, 0.0};
  }

  std::vector<Term> terms_;
};

}  // namespace glidepath
