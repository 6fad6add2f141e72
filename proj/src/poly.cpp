#include "spatinv/poly.hpp"

#include <algorithm>
#include <cmath>

namespace spatinv {

Poly::Poly(std::vector<Complex> coeffs) : c_(std::move(coeffs)) {
  if (c_.empty()) c_ = {Complex{0.0}};
  strip_exact_zeros();
}

void Poly::strip_exact_zeros() {
  while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
}

Poly Poly::from_roots(const std::vector<Complex>& roots, Complex leading) {
  std::vector<Complex> c{leading};
  for (Complex r : roots) {
    c.push_back(0.0);
    for (int k = static_cast<int>(c.size()) - 1; k >= 1; --k) c[k] = c[k - 1] - r * c[k];
    c[0] *= -r;
  }
  return Poly(std::move(c));
}

double Poly::max_abs_coeff() const {
  double m = 0.0;
  for (Complex v : c_) m = std::max(m, std::abs(v));
  return m;
}

Complex Poly::eval(Complex x) const {
  Complex acc = 0.0;
  for (int k = degree(); k >= 0; --k) acc = acc * x + c_[k];
  return acc;
}

Poly Poly::derivative() const {
  if (degree() == 0) return Poly{};
  std::vector<Complex> d(c_.size() - 1);
  for (size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
  return Poly(std::move(d));
}

Poly Poly::monic() const {
  std::vector<Complex> d = c_;
  Complex l = c_.back();
  if (l != 0.0)
    for (Complex& v : d) v /= l;
  return Poly(std::move(d));
}

Poly Poly::trimmed(double rel_tol) const {
  double cut = rel_tol * max_abs_coeff();
  std::vector<Complex> d = c_;
  while (d.size() > 1 && std::abs(d.back()) <= cut) d.pop_back();
  return Poly(std::move(d));
}

Poly Poly::taylor_at(Complex x0) const {
  // Repeated synthetic division by (x - x0), accumulated in place.
  std::vector<Complex> a = c_;
  const int n = degree();
  for (int j = 0; j < n; ++j)
    for (int i = n - 1; i >= j; --i) a[i] += x0 * a[i + 1];
  return Poly(std::move(a));
}

bool Poly::near_real(double rel_tol) const {
  double m = max_abs_coeff();
  for (Complex v : c_)
    if (std::abs(v.imag()) > rel_tol * std::max(1.0, m)) return false;
  return true;
}

Poly operator+(const Poly& a, const Poly& b) {
  std::vector<Complex> c(std::max(a.c_.size(), b.c_.size()), 0.0);
  for (size_t k = 0; k < a.c_.size(); ++k) c[k] += a.c_[k];
  for (size_t k = 0; k < b.c_.size(); ++k) c[k] += b.c_[k];
  return Poly(std::move(c));
}

Poly operator-(const Poly& a, const Poly& b) { return a + Complex{-1.0} * b; }

Poly operator*(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return Poly{};
  std::vector<Complex> c(a.c_.size() + b.c_.size() - 1, 0.0);
  for (size_t i = 0; i < a.c_.size(); ++i)
    for (size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
  return Poly(std::move(c));
}

Poly operator*(Complex s, const Poly& a) {
  std::vector<Complex> c = a.c_;
  for (Complex& v : c) v *= s;
  return Poly(std::move(c));
}

}  // namespace spatinv
