#pragma once

#include <cstdint>
#include <vector>

#include "spatinv/charfun.hpp"
#include "spatinv/types.hpp"

namespace spatinv {

enum class Kind { Onesided, Circulant, Laurent };
enum class PNorm { One, Two, Inf };

const char* to_string(Kind k);
const char* to_string(PNorm p);

/// exp(t*M) by scaling-and-squaring with a diagonal Pade approximant
/// (scalar fast path for 1x1). Sets *overflow when ||t*M||_1 > 1e4; the
/// result is still returned but may have left the double range.
CMatrix expm_dense(const CMatrix& M, double t, bool* overflow = nullptr);

/// Symbol A0 + e^{-i*theta} A1 of the two-sided translation-invariant operator.
CMatrix laurent_symbol(const SystemPair& sys, double theta);

/// Block-DFT symbol A0 + w^j A1, w = e^{-2*pi*i/N}, of the circulant truncation.
CMatrix circulant_symbol(const SystemPair& sys, int N, int j);

/// Dense (N*m)x(N*m) truncation matrix. Onesided: block lower bidiagonal;
/// Circulant: the same plus the wrap-around block in the top-right corner.
CMatrix assemble_truncation(const SystemPair& sys, Kind kind, int N);

/// Structured snapshot of exp(t*A_N).
///  - Onesided: blocks = first block column B_0(t)..B_{N-1}(t); the full
///    matrix is the block lower-triangular Toeplitz fill.
///  - Circulant: blocks = DFT factors E_j(t) = exp(t*(A0 + w^j A1)).
struct BlockColumn {
  Kind kind = Kind::Onesided;
  int N = 0;
  int m = 0;
  double t = 0.0;
  std::vector<CMatrix> blocks;
};

/// Integrates B0' = A0*B0, Bl' = A0*Bl + A1*B_{l-1}, B0(0) = I, Bl(0) = 0
/// with an adaptive embedded Runge-Kutta pair (Dormand-Prince 5(4)).
BlockColumn onesided_blocks(const SystemPair& sys, int N, double t, double tol = 1e-10);

/// Same integration, capturing every time in the ascending list in one pass.
std::vector<BlockColumn> onesided_blocks_multi(const SystemPair& sys, int N,
                                               const std::vector<double>& ts,
                                               double tol = 1e-10);

BlockColumn circulant_exp(const SystemPair& sys, int N, double t);

/// First block column G_0..G_{N-1} of the block-circulant operator with the
/// given DFT factors: G_r = (1/N) * sum_j e^{2*pi*i*j*r/N} F_j.
std::vector<CMatrix> circulant_blocks_from_factors(const std::vector<CMatrix>& factors);

/// Applies the generator to a snapshot: blocks of A_N * exp(t*A_N).
/// Onesided columns map to D_l = A0*B_l + A1*B_{l-1}; circulant factors map
/// to (A0 + w^j A1) * E_j.
BlockColumn generator_apply(const SystemPair& sys, const BlockColumn& col);

struct NormBracket {
  double lower = 0.0;
  double upper = 0.0;
  bool exact = false;  // lower == upper up to roundoff
};

/// Induced-norm bracket of the structured operator with the given first block
/// column on l^p_N(C^m) with Euclidean block norm. Exact for m = 1 (any p),
/// for p = 2 circulant, and for p = 2 onesided up to moderate size; otherwise
/// a certified bracket (block-norm sums above, probe vectors below).
NormBracket structured_norm(const std::vector<CMatrix>& column, Kind kind, PNorm p,
                            std::uint64_t seed = 0);

/// Exact l^2 operator norm of a block-circulant operator from its DFT factors.
double norm2_from_factors(const std::vector<CMatrix>& factors);

struct CurvePoint {
  double t = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct DecayCurve {
  Kind kind = Kind::Circulant;
  PNorm p = PNorm::Two;
  int N = 0;  // 0 for Laurent and for supremum curves
  bool with_generator = true;
  bool exact = false;
  std::vector<CurvePoint> samples;
};

/// Log-spaced grid, closed at both ends.
std::vector<double> default_t_grid(double t_lo = 1.0, double t_hi = 1e4,
                                   int per_decade = 40);
/// Doubling list {n_lo, 2*n_lo, ..., <= n_hi}.
std::vector<int> default_N_list(int n_lo = 4, int n_hi = 512);

/// Norm curve t -> ||A_N * exp(t*A_N)|| (or ||exp(t*A_N)|| when
/// with_generator is false) for a finite truncation.
DecayCurve decay_curve(const SystemPair& sys, Kind kind, int N, PNorm p,
                       const std::vector<double>& t_grid, bool with_generator = true,
                       std::uint64_t seed = 0, double ode_tol = 1e-10);

/// Two-sided infinite operator, p = 2: per t the supremum over theta of
/// ||S(theta)^{0|1} exp(t*S(theta))||_2 with S(theta) = A0 + e^{-i*theta}A1,
/// on a coarse circle grid plus a graded grid of width ~10/sqrt(t) at
/// theta = 0, refined by golden section around the maximizer.
DecayCurve laurent_decay(const SystemPair& sys, const std::vector<double>& t_grid,
                         bool with_generator = true);

/// Pointwise max of lower and of upper brackets across truncation sizes.
DecayCurve sup_over_N(const SystemPair& sys, Kind kind, const std::vector<int>& N_list,
                      PNorm p, const std::vector<double>& t_grid,
                      bool with_generator = true, std::uint64_t seed = 0,
                      double ode_tol = 1e-10);

struct RateFit {
  double alpha = 0.0;  // y ~ C * t^(-alpha) * log(t)^beta
  double beta = 0.0;
  double residual = 0.0;  // RMS of the log-model error
  double t_lo = 0.0;
  double t_hi = 0.0;
  bool with_log = false;
};

/// Least squares of log(y) on {1, log t} (+ log log t when with_log) over the
/// window, y the geometric midpoint of each bracket.
RateFit fit_rate(const DecayCurve& curve, double t_lo, double t_hi, bool with_log);

/// max over lambda of |lambda| * e^{t*Re(lambda)} — a lower bound for
/// ||A_N exp(t*A_N)|| by spectral mapping.
double spectral_lower_bound(const std::vector<Complex>& spectrum, double t);

/// R(lambda, A_N) x for the circulant truncation via the geometric expansion
/// with prefactor 1/(1 - phi(lambda)^N). Requires lambda outside sigma(A0)
/// and |phi(lambda)^N| away from 1.
std::vector<CVector> circulant_resolvent_apply(const SystemPair& sys, int N,
                                               Complex lambda,
                                               const std::vector<CVector>& x);

enum class CesaroClass { DecaysToZero, OneOverN, Stagnates };
const char* to_string(CesaroClass c);

struct CesaroResult {
  std::vector<double> norms;  // ||v_n|| for n = 1..n_max
  double exponent = 0.0;      // log-log slope over the last decade
  CesaroClass classification = CesaroClass::Stagnates;
};

/// Averages v_n = (1/n) sum_{k=1..n} phi(0)^k S^k M x0 on one-sided
/// sequences, with M x = (A1 A0^{-1} x_k) blockwise and S the right shift;
/// evaluated exactly on the finite (growing) support. x0 holds the blocks at
/// sites 1..L.
CesaroResult cesaro_norms(const SystemPair& sys, const std::vector<CVector>& x0, PNorm p,
                          int n_max);

/// Projection onto Ker A_N along Ran A_N for the circulant truncation:
/// P x = (L Q x, ..., L Q x) with Q x = (1/N) sum_k A1 A0^{-1} x_k and L the
/// inverse of A1 A0^{-1} restricted to Ran(A0^{-1} A1).
std::vector<CVector> kernel_projection(const SystemPair& sys, const std::vector<CVector>& x);

struct PowerBoundReport {
  double sup_norm = 0.0;              // max over 1 <= n <= n_max of ||B^n||
  double max_dev_from_one = 0.0;      // max over n of | ||B^n|| - 1 |
  double last_decade_increase = 0.0;  // relative growth of the running max
  bool stabilized = false;            // last_decade_increase <= 1%
  std::vector<double> norms;          // ||B^n||, n = 1..n_max
};

/// Norms of powers of B = I + eps*A_N (circulant truncation). p = 2 is exact
/// via DFT factors for any m; p = 1/Inf are exact entry-sum norms for m = 1.
PowerBoundReport power_bound_check(const SystemPair& sys, int N, double eps, PNorm p,
                                   int n_max = 10000);

}  // namespace spatinv
