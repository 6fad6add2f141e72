#pragma once

#include <initializer_list>
#include <vector>

#include "spatinv/types.hpp"

namespace spatinv {

/// Dense univariate polynomial with complex coefficients, ascending order.
/// The leading (last) coefficient is nonzero unless the polynomial is zero;
/// the zero polynomial is stored as the single coefficient 0.
class Poly {
 public:
  Poly() : c_{Complex{0.0}} {}
  explicit Poly(std::vector<Complex> coeffs);
  Poly(std::initializer_list<Complex> coeffs) : Poly(std::vector<Complex>(coeffs)) {}

  static Poly from_roots(const std::vector<Complex>& roots, Complex leading = 1.0);

  [[nodiscard]] int degree() const { return static_cast<int>(c_.size()) - 1; }
  [[nodiscard]] bool is_zero() const { return c_.size() == 1 && c_[0] == 0.0; }
  [[nodiscard]] Complex coeff(int k) const {
    return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[k] : Complex{0.0};
  }
  [[nodiscard]] const std::vector<Complex>& coeffs() const { return c_; }
  [[nodiscard]] Complex lead() const { return c_.back(); }
  [[nodiscard]] double max_abs_coeff() const;

  [[nodiscard]] Complex eval(Complex x) const;
  [[nodiscard]] Poly derivative() const;
  [[nodiscard]] Poly monic() const;

  /// Drops leading coefficients with |c| <= rel_tol * max|c|.
  [[nodiscard]] Poly trimmed(double rel_tol) const;

  /// Coefficients of p(x0 + h) as a polynomial in h.
  [[nodiscard]] Poly taylor_at(Complex x0) const;

  [[nodiscard]] bool near_real(double rel_tol = 1e-12) const;

  friend Poly operator+(const Poly& a, const Poly& b);
  friend Poly operator-(const Poly& a, const Poly& b);
  friend Poly operator*(const Poly& a, const Poly& b);
  friend Poly operator*(Complex s, const Poly& a);

 private:
  std::vector<Complex> c_;
  void strip_exact_zeros();
};

}  // namespace spatinv
