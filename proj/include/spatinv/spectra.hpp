#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spatinv/charfun.hpp"
#include "spatinv/monotone.hpp"
#include "spatinv/ratfun.hpp"
#include "spatinv/types.hpp"

namespace spatinv {

/// Eigenvalues sorted by (re, im), with an eigenvector residual check.
std::vector<Complex> eigvals(const CMatrix& A);

/// Leading order n with 1 - |phi(i s)|^2 ~ c * s^n near s = 0.
struct GrowthParam {
  std::optional<int> n;          // unset when no coefficient clears the threshold
  bool odd_inconsistency = false;
  double leading_coeff = 0.0;
  std::vector<double> taylor;    // Taylor coefficients of 1 - |phi(i s)|^2
};

GrowthParam growth_param(const RatFun& phi, int k_max = 8);

enum class PredictedRate { None, LogHalf, SharpHalf };
const char* to_string(PredictedRate r);

struct HypothesisReport {
  bool hurwitz = false;        // all eigenvalues of A0 in the open left half-plane
  bool omega_ok = false;       // |phi| < 1 on the punctured imaginary axis and in the RHP
  bool phi_normalized = false; // phi(0) = 1
  double phi_at_zero_dev = 0.0;
  bool phi_is_p0_ratio = false;
  std::optional<int> n_phi;
  CmVerdict cm = CmVerdict::Inconclusive;
  TmVerdict tm = TmVerdict::Inconclusive;
  PredictedRate predicted_rate = PredictedRate::None;
  std::string evidence;
};

HypothesisReport hypothesis_check(const SystemPair& sys);

struct ContourSet {
  std::vector<std::vector<Complex>> polylines;
  std::vector<bool> exceeds_inside;  // per polyline: |phi| >= 1 just left of the walk
};

/// Marching-squares trace of |phi(lambda)| = 1 on the window [lo, hi],
/// with bisection-refined crossings (residual <= 1e-3).
ContourSet omega_contour(const RatFun& phi, Complex lo, Complex hi, int nx = 400, int ny = 400);

struct TaggedEig {
  Complex lambda;
  int j = 0;  // index of the root of unity exp(-2*pi*i*j/N)
};

/// Union over the N-th roots of unity of eigvals(A0 + w * A1).
std::vector<TaggedEig> circulant_spectrum(const SystemPair& sys, int N);

/// sup over theta of the spectral norm of (lambda - A0 - e^{-i theta} A1)^{-1},
/// on a refined theta grid. Refuses lambda with |phi(lambda)| within 1e-10 of 1.
double resolvent_norm_twosided(const SystemPair& sys, Complex lambda, int n_theta = 1024);

}  // namespace spatinv
