#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spatinv/ratfun.hpp"
#include "spatinv/types.hpp"

namespace spatinv {

enum class CmVerdict { Certified, Refuted, Inconclusive };
enum class TmVerdict { Certified, RefutedAtTestedEps, Inconclusive };

const char* to_string(CmVerdict v);
const char* to_string(TmVerdict v);

struct CmGrid {
  double t_lo = 1e-3;
  double t_hi = 1e3;
  int per_decade = 200;
};

/// Evidence for sign analysis of the inverse transform g of phi.
struct MonotoneCertificate {
  CmVerdict verdict = CmVerdict::Inconclusive;
  double grid_min = 0.0;   // refined minimum of g over the grid
  double grid_min_t = 0.0;
  double scale = 0.0;      // max |g| over the grid
  bool small_t_positive = false;
  bool large_t_positive = false;
  std::optional<std::pair<double, double>> witness;  // (t, g(t)) when refuted
  std::string detail;
};

/// Grid plus golden-section minimum search on g, with analytic sign checks of
/// the leading behavior at t -> 0 and t -> infinity. Requires all poles in
/// the open left half-plane and g real along the positive axis.
MonotoneCertificate cm_certify(const RatFun& phi, const CmGrid& grid = {});

/// Largest eps with |eps*pole + 1| < 1 for every pole: min of -2*Re/|pole|^2.
double eps_max(const std::vector<Root>& poles);
double eps_max(const RatFun& phi);

/// Discretized coefficient sequence a_n at step eps, with tail metadata.
struct TMCoefficients {
  double eps = 0.0;
  std::vector<double> a;  // a_0 .. a_N
  double scale = 0.0;     // max |a_n|
  Complex dominant_base;  // eps*pole + 1 with the largest modulus
  bool tail_dominant_real = false;
  std::optional<long> n_star;  // first index with certified tail domination
};

/// a_n = sum over expansion terms of A * C(n, k-1) * eps^k * (eps*pole+1)^(n-k+1).
TMCoefficients tm_coeffs(const RatFun& phi, double eps, long N = 400);

struct TmReport {
  TmVerdict verdict = TmVerdict::Inconclusive;
  double eps_certified = 0.0;
  std::optional<std::tuple<double, long, double>> witness;  // (eps, n, a_n)
  std::vector<std::pair<double, std::string>> evidence;     // per-eps outcome
};

/// Scans an eps grid (default eps_max * 2^-k, k = 1..8). Certification
/// demands nonnegative computed coefficients up to max(N, n_star) plus the
/// tail-domination certificate; refutation demands a negative coefficient
/// at every tested eps. Oscillatory tails extend the scan far enough to
/// cover several periods of the dominant base.
TmReport tm_certify(const RatFun& phi, std::vector<double> eps_grid = {}, long N = 400);

/// Downward step-size rescaling: b_n = sum_k a_k * C(n,k) * beta^(k+1) * (1-beta)^(n-k).
std::vector<double> tm_rescale(const std::vector<double>& a, double beta);

/// Convolution powers a^(0) = delta_0, a^(l+1) = a * a^(l), truncated to |a|.
std::vector<std::vector<double>> conv_powers(const std::vector<double>& a, int L);

/// Exponential series (1/eps) e^(-t/eps) sum_n a_n (t/eps)^n / n!.
double g_series_eval(const TMCoefficients& tc, double t);

/// Max relative error, over the sample points, of two reconstructions of phi:
/// quadrature of e^(-lambda t) g(t), and the truncated series
/// sum_n a_n (1 + eps*lambda)^-(n+1).
double laplace_check(const RatFun& phi, std::span<const double> lambdas, double eps = 0.5,
                     long N = 400);

}  // namespace spatinv
