#pragma once

#include <optional>
#include <span>
#include <vector>

#include "spatinv/errors.hpp"
#include "spatinv/poly.hpp"
#include "spatinv/types.hpp"

namespace spatinv {

struct Root {
  Complex value;
  int multiplicity = 1;
};

/// Strictly proper rational function num/den; den is kept monic.
struct RatFun {
  Poly num;
  Poly den;
  bool reduced = false;
};

/// Normalizes den to monic form. Requires deg(den) >= 1 and deg(num) < deg(den).
RatFun make_ratfun(Poly num, Poly den);

/// All roots with multiplicities, sorted by (re, im). Companion-matrix start,
/// simultaneous Newton-correction sweeps, then clustering at radius
/// 1e-8 * (1 + max|root|); cluster means are polished on the derivative
/// of matching order.
std::vector<Root> poly_roots(const Poly& p);

/// Flattens roots back into a polynomial with the given leading coefficient.
Poly poly_from_roots(const std::vector<Root>& roots, Complex leading = 1.0);

/// Evaluates num(x)/den(x). Refuses points closer than 1e-12 to a pole
/// (Newton-step distance estimate on den).
Complex rat_eval(const RatFun& r, Complex x);

/// Derivatives r(0), r'(0), ..., r^(K)(0) by Taylor-series division.
std::vector<Complex> rat_derivs_at_zero(const RatFun& r, int K);

/// One term coeff/(x - pole)^order of a partial-fraction expansion.
struct PFTerm {
  Complex pole;
  int order = 1;
  Complex coeff;
};

struct PartialFractions {
  std::vector<PFTerm> terms;  // grouped by pole, ascending order within a group
  [[nodiscard]] std::vector<Root> poles() const;
};

/// Expansion over the poles of a reduced rational function. Confluent
/// (Taylor series division) per pole cluster; falls back to a linear solve
/// on sampled values when a cluster merges genuinely distinct roots.
PartialFractions partial_fractions(const RatFun& r);

Complex pf_eval(const PartialFractions& pf, Complex x);

/// Inverse Laplace transform of the expansion at time t >= 0:
/// sum of coeff * t^(order-1) * exp(pole*t) / (order-1)!.
/// Terms with exponent below -700 are flushed to zero; *underflow reports it.
Complex inverse_laplace_eval(const PartialFractions& pf, double t, bool* underflow = nullptr);

/// Cancels numerator/denominator root pairs within the clustering radius.
RatFun rat_reduce(const RatFun& r);

}  // namespace spatinv
