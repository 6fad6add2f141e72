#pragma once

#include <string>
#include <vector>

#include "spatinv/ratfun.hpp"
#include "spatinv/types.hpp"

namespace spatinv {

/// Matrix coefficients M_k of adj(lambda*I - A) = sum_k lambda^k M_k,
/// together with the characteristic polynomial (monic).
struct AdjugateResult {
  std::vector<CMatrix> M;  // size m, index = power of lambda
  Poly p0;
};

/// Faddeev-LeVerrier recursion; exact up to roundoff, O(m^4).
AdjugateResult adjugate_polynomial(const CMatrix& A);

/// A coupled pair (A0, A1) with its characteristic data.
struct SystemPair {
  std::string label;
  int m = 0;
  CMatrix A0;
  CMatrix A1;
  Poly p0;                   // char poly of A0
  std::vector<CMatrix> adj;  // adjugate coefficients of A0
  RatFun phi;                // reduced
};

/// Extracts phi with A1 * adj(lambda - A0) * A1 proportional to A1 at every
/// power of lambda. Throws NoCharacteristicFunction when proportionality
/// fails beyond tol * ||A1||_F * (1 + ||M_k||_F).
RatFun extract_phi(const CMatrix& A0, const CMatrix& A1, double tol = 1e-8);

SystemPair make_system(CMatrix A0, CMatrix A1, std::string label);

/// Max relative residual of A1 * solve(lambda - A0, A1) = phi(lambda) * A1
/// over sample points on a circle of radius 2 * (1 + specrad(A0)).
double verify_char(const SystemPair& sys, int n_samples = 20, unsigned seed = 0);

}  // namespace spatinv
