#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "spatinv/models.hpp"
#include "spatinv/semigroup.hpp"
#include "spatinv/spectra.hpp"

using namespace spatinv;

namespace {

CMatrix toeplitz_fill(const std::vector<CMatrix>& col) {
  const int N = static_cast<int>(col.size());
  const int m = static_cast<int>(col[0].rows());
  CMatrix T = CMatrix::Zero(N * m, N * m);
  for (int r = 0; r < N; ++r)
    for (int c = 0; c <= r; ++c) T.block(r * m, c * m, m, m) = col[r - c];
  return T;
}

CMatrix circulant_fill(const std::vector<CMatrix>& col) {
  const int N = static_cast<int>(col.size());
  const int m = static_cast<int>(col[0].rows());
  CMatrix T = CMatrix::Zero(N * m, N * m);
  for (int r = 0; r < N; ++r)
    for (int c = 0; c < N; ++c) T.block(r * m, c * m, m, m) = col[((r - c) % N + N) % N];
  return T;
}

double dense_norm2(const CMatrix& T) {
  Eigen::JacobiSVD<CMatrix> svd(T);
  return svd.singularValues()(0);
}

CVector random_cvector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CVector v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex(nd(rng), nd(rng));
  return v;
}

double poisson_term(int l, double t) {
  return std::exp(l * std::log(t) - t - std::lgamma(l + 1.0));
}

}  // namespace

TEST_CASE("dense exponential satisfies the semigroup law") {
  std::mt19937_64 rng(7);
  CMatrix A(3, 3);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = 0.5 * Complex(nd(rng), nd(rng));
  const CMatrix lhs = expm_dense(A, 2.0);
  const CMatrix rhs = expm_dense(A, 0.7) * expm_dense(A, 1.3);
  CHECK((lhs - rhs).norm() < 1e-10 * lhs.norm());
  CHECK((expm_dense(A, 0.0) - CMatrix::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("truncation assembly: scalar chain layouts") {
  const SystemPair sys = build_robot();
  const CMatrix T1 = assemble_truncation(sys, Kind::Onesided, 3);
  CMatrix want = CMatrix::Zero(3, 3);
  want(0, 0) = want(1, 1) = want(2, 2) = -1.0;
  want(1, 0) = want(2, 1) = 1.0;
  CHECK((T1 - want).norm() == 0.0);

  const CMatrix T2 = assemble_truncation(sys, Kind::Circulant, 3);
  want(0, 2) = 1.0;  // wrap-around coupling
  CHECK((T2 - want).norm() == 0.0);
}

TEST_CASE("one-sided blocks: scalar chain closed form") {
  // B_l(t) = t^l e^{-t} / l!
  const double t = 2.5;
  const auto col = onesided_blocks(build_robot(), 6, t, 1e-12);
  REQUIRE(col.blocks.size() == 6);
  for (int l = 0; l < 6; ++l)
    CHECK(std::abs(col.blocks[static_cast<size_t>(l)](0, 0) - poisson_term(l, t)) < 1e-10);
}

TEST_CASE("one-sided blocks match the dense exponential") {
  const SystemPair sys = build_platoon_pair(2, 1, 1);
  const int N = 16;
  const double t = 5.0;
  const auto col = onesided_blocks(sys, N, t, 1e-12);
  const CMatrix dense = expm_dense(assemble_truncation(sys, Kind::Onesided, N), t);
  double worst = 0.0;
  for (int l = 0; l < N; ++l)
    worst = std::max(worst,
                     (col.blocks[static_cast<size_t>(l)] - dense.block(3 * l, 0, 3, 3)).norm());
  CHECK(worst < 1e-8);
}

TEST_CASE("multi-snapshot integration agrees with single calls") {
  const SystemPair sys = build_platoon_pair(2, 1, 1);
  const int N = 4;
  const std::vector<double> ts = {0.0, 1.0, 2.0};
  const auto multi = onesided_blocks_multi(sys, N, ts, 1e-12);
  REQUIRE(multi.size() == 3);
  for (size_t i = 0; i < ts.size(); ++i) {
    const auto single = onesided_blocks(sys, N, ts[i], 1e-12);
    for (int l = 0; l < N; ++l)
      CHECK((multi[i].blocks[static_cast<size_t>(l)] - single.blocks[static_cast<size_t>(l)])
                .norm() < 1e-10);
  }
  // t = 0 snapshot is the identity column.
  CHECK((multi[0].blocks[0] - CMatrix::Identity(3, 3)).norm() < 1e-12);
  CHECK(multi[0].blocks[1].norm() < 1e-12);
}

TEST_CASE("circulant factors: scalar closed form and semigroup law") {
  const SystemPair sys = build_robot();
  const int N = 5;
  const double t = 1.3;
  const auto col = circulant_exp(sys, N, t);
  REQUIRE(col.blocks.size() == 5);
  for (int j = 0; j < N; ++j) {
    const Complex w = std::exp(Complex(0, -2 * kPi * j / N));
    CHECK(std::abs(col.blocks[static_cast<size_t>(j)](0, 0) - std::exp(t * (w - 1.0))) < 1e-12);
  }
  const SystemPair pp = build_platoon_pair(2, 1, 1);
  const auto a = circulant_exp(pp, 4, 0.6);
  const auto b = circulant_exp(pp, 4, 1.1);
  const auto c = circulant_exp(pp, 4, 1.7);
  for (int j = 0; j < 4; ++j)
    CHECK((a.blocks[static_cast<size_t>(j)] * b.blocks[static_cast<size_t>(j)] -
           c.blocks[static_cast<size_t>(j)])
              .norm() < 1e-10);
}

TEST_CASE("circulant block column matches the dense exponential") {
  const SystemPair sys = build_platoon_pair(2, 1, 1);
  const int N = 5;
  const double t = 1.2;
  const auto blocks = circulant_blocks_from_factors(circulant_exp(sys, N, t).blocks);
  const CMatrix dense = expm_dense(assemble_truncation(sys, Kind::Circulant, N), t);
  for (int r = 0; r < N; ++r)
    CHECK((blocks[static_cast<size_t>(r)] - dense.block(3 * r, 0, 3, 3)).norm() < 1e-8);
}

TEST_CASE("generator application matches dense A * exp(tA)") {
  const SystemPair sys = build_robot();
  const int N = 4;
  const double t = 1.5;

  const CMatrix AN_c = assemble_truncation(sys, Kind::Circulant, N);
  const CMatrix dense_c = AN_c * expm_dense(AN_c, t);
  const auto gen_c = generator_apply(sys, circulant_exp(sys, N, t));
  const auto blocks_c = circulant_blocks_from_factors(gen_c.blocks);
  for (int r = 0; r < N; ++r)
    CHECK(std::abs(blocks_c[static_cast<size_t>(r)](0, 0) - dense_c(r, 0)) < 1e-8);

  const CMatrix AN_o = assemble_truncation(sys, Kind::Onesided, N);
  const CMatrix dense_o = AN_o * expm_dense(AN_o, t);
  const auto gen_o = generator_apply(sys, onesided_blocks(sys, N, t, 1e-12));
  for (int l = 0; l < N; ++l)
    CHECK(std::abs(gen_o.blocks[static_cast<size_t>(l)](0, 0) - dense_o(l, 0)) < 1e-9);
}

TEST_CASE("scalar norms are exact: generator at t = 0 has norm 2") {
  const auto curve = decay_curve(build_robot(), Kind::Circulant, 6, PNorm::One, {0.0});
  REQUIRE(curve.samples.size() == 1);
  CHECK(curve.exact);
  CHECK(curve.samples[0].lower == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(curve.samples[0].upper == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("scalar one-sided column norm matches the alternating-sum closed form") {
  const double t = 3.7;
  const int N = 12;
  const auto curve =
      decay_curve(build_robot(), Kind::Onesided, N, PNorm::One, {t}, true, 0, 1e-12);
  // max-column sum telescopes to 2 * max_l B_l(t) - B_{N-1}(t) for t < N-1.
  const int lstar = static_cast<int>(t);
  const double want = 2 * poisson_term(lstar, t) - poisson_term(N - 1, t);
  CHECK(curve.exact);
  CHECK(std::abs(curve.samples[0].upper - want) < 1e-10);
  CHECK(std::abs(curve.samples[0].lower - want) < 1e-10);
}

TEST_CASE("norm brackets are consistent for a third-order model") {
  const SystemPair sys = build_platoon_pair(2, 1, 1);
  const int N = 6;
  const double t = 2.0;
  const auto gen = generator_apply(sys, onesided_blocks(sys, N, t, 1e-12));
  const CMatrix T = toeplitz_fill(gen.blocks);

  const auto nb2 = structured_norm(gen.blocks, Kind::Onesided, PNorm::Two, 3);
  CHECK(nb2.exact);
  const double d2 = dense_norm2(T);
  CHECK(std::abs(nb2.upper - d2) < 1e-10 * (1 + d2));

  const auto nb1 = structured_norm(gen.blocks, Kind::Onesided, PNorm::One, 3);
  const auto nbi = structured_norm(gen.blocks, Kind::Onesided, PNorm::Inf, 3);
  CHECK(nb1.lower <= nb1.upper * (1 + 1e-12));
  CHECK(nbi.lower <= nbi.upper * (1 + 1e-12));
  // Interpolation between the endpoint norms controls the middle one.
  CHECK(d2 <= std::sqrt(nb1.upper * nbi.upper) * (1 + 1e-12));

  // Random unit vectors in the mixed norm never beat the upper bound.
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const CVector x = random_cvector(N * 3, rng);
    double xn = 0.0, yn = 0.0;
    const CVector y = T * x;
    for (int k = 0; k < N; ++k) {
      xn += x.segment(3 * k, 3).norm();
      yn += y.segment(3 * k, 3).norm();
    }
    CHECK(yn <= nb1.upper * xn * (1 + 1e-10));
    CHECK(yn >= nb1.lower * xn * 0.0);  // trivially nonnegative; documents orientation
  }
}

TEST_CASE("scalar circulant norm equals the dense matrix norm") {
  const SystemPair sys = build_robot();
  const int N = 8;
  const double t = 1.3;
  const auto blocks = circulant_blocks_from_factors(generator_apply(sys, circulant_exp(sys, N, t)).blocks);
  const auto nb = structured_norm(blocks, Kind::Circulant, PNorm::One, 0);
  CHECK(nb.exact);
  const CMatrix T = circulant_fill(blocks);
  const double dense1 = T.cwiseAbs().colwise().sum().maxCoeff();
  CHECK(std::abs(nb.upper - dense1) < 1e-12 * (1 + dense1));
}

TEST_CASE("factor-based two-norm matches the dense two-norm") {
  const SystemPair sys = build_platoon_pair(2, 1, 1);
  const int N = 5;
  const double t = 1.2;
  const double structured = norm2_from_factors(circulant_exp(sys, N, t).blocks);
  const double dense = dense_norm2(expm_dense(assemble_truncation(sys, Kind::Circulant, N), t));
  CHECK(std::abs(structured - dense) < 1e-9 * (1 + dense));
}

TEST_CASE("finite-section two-norm never exceeds the translation-invariant norm") {
  const SystemPair sys = build_platoon_pair(2, 1, 1);
  const double t = 5.0;
  const auto lc = laurent_decay(sys, {t});
  const auto cc = decay_curve(sys, Kind::Circulant, 16, PNorm::Two, {t});
  CHECK(cc.samples[0].upper <= lc.samples[0].upper * (1 + 1e-6) + 1e-12);
}

TEST_CASE("translation-invariant decay: scalar chain closed form") {
  // sup_theta 2|sin(theta/2)| e^{-2 t sin^2(theta/2)} = e^{-1/2}/sqrt(t) for t >= 1/4.
  const auto lc = laurent_decay(build_robot(), {100.0});
  REQUIRE(lc.samples.size() == 1);
  CHECK(lc.exact);
  CHECK(std::abs(lc.samples[0].upper - std::exp(-0.5) / 10.0) < 1e-8);
}

TEST_CASE("spectral lower bound is attained for scalar circulant sections") {
  const SystemPair sys = build_robot();
  const int N = 32;
  const double t = 100.0;
  std::vector<Complex> ev;
  for (const auto& te : circulant_spectrum(sys, N)) ev.push_back(te.lambda);
  const double lb = spectral_lower_bound(ev, t);
  const auto cc = decay_curve(sys, Kind::Circulant, N, PNorm::Two, {t});
  CHECK(cc.exact);
  // For m = 1 the two quantities are maxima of the same finite set.
  CHECK(std::abs(lb - cc.samples[0].upper) < 1e-12 + 1e-10 * lb);
  CHECK(cc.samples[0].upper <= 1.0);
}

TEST_CASE("supremum curve dominates each finite section") {
  const SystemPair sys = build_robot();
  const std::vector<double> ts = {1.0, 10.0};
  const auto sup = sup_over_N(sys, Kind::Circulant, {4, 8}, PNorm::Two, ts);
  REQUIRE(sup.samples.size() == 2);
  CHECK(sup.N == 0);
  for (int N : {4, 8}) {
    const auto c = decay_curve(sys, Kind::Circulant, N, PNorm::Two, ts);
    for (size_t i = 0; i < ts.size(); ++i) {
      CHECK(sup.samples[i].lower >= c.samples[i].lower - 1e-12);
      CHECK(sup.samples[i].upper >= c.samples[i].upper - 1e-12);
    }
  }
}

TEST_CASE("rate fitting recovers synthetic exponents") {
  DecayCurve c;
  c.kind = Kind::Laurent;
  c.p = PNorm::Two;
  c.N = 0;
  c.exact = true;
  for (double t : default_t_grid(10, 1e5, 20))
    c.samples.push_back({t, std::pow(t, -0.5), std::pow(t, -0.5)});
  const auto fit = fit_rate(c, 1e2, 1e4, false);
  CHECK(std::abs(fit.alpha - 0.5) < 1e-6);
  CHECK(fit.beta == 0.0);
  CHECK(fit.residual < 1e-10);

  DecayCurve cl = c;
  cl.samples.clear();
  for (double t : default_t_grid(10, 1e5, 20)) {
    const double y = std::pow(t, -0.5) * std::log(t);
    cl.samples.push_back({t, y, y});
  }
  const auto fitl = fit_rate(cl, 1e2, 1e4, true);
  CHECK(std::abs(fitl.alpha - 0.5) < 1e-6);
  CHECK(std::abs(fitl.beta - 1.0) < 1e-6);
}

TEST_CASE("rate fitting refuses a degenerate window") {
  DecayCurve c;
  for (double t : {1.0, 2.0, 4.0, 8.0, 16.0})
    c.samples.push_back({t, 1.0, 1.0});
  CHECK_THROWS_AS((void)fit_rate(c, 0.5, 32.0, false), DegenerateWindow);
}

TEST_CASE("cyclic resolvent expansion matches a dense solve") {
  const SystemPair sys = build_platoon_pair(2, 1, 1);
  const int N = 5;
  const Complex lam(1.0, 0.3);
  std::mt19937_64 rng(99);
  std::vector<CVector> x(N);
  CVector xs(N * 3);
  for (int k = 0; k < N; ++k) {
    x[static_cast<size_t>(k)] = random_cvector(3, rng);
    xs.segment(3 * k, 3) = x[static_cast<size_t>(k)];
  }
  const auto y = circulant_resolvent_apply(sys, N, lam, x);
  const CMatrix AN = assemble_truncation(sys, Kind::Circulant, N);
  const CMatrix M = lam * CMatrix::Identity(N * 3, N * 3) - AN;
  const CVector ys = M.fullPivLu().solve(xs);
  double worst = 0.0;
  for (int k = 0; k < N; ++k)
    worst = std::max(worst, (y[static_cast<size_t>(k)] - ys.segment(3 * k, 3)).norm());
  CHECK(worst < 1e-10 * (1 + ys.norm()));
}

TEST_CASE("cyclic resolvent expansion guards its preconditions") {
  const SystemPair sys = build_robot();
  std::vector<CVector> x(4, CVector::Ones(1));
  CHECK_THROWS_AS((void)circulant_resolvent_apply(sys, 4, Complex(0, 0), x), OnLevelSet);
  CHECK_THROWS_AS((void)circulant_resolvent_apply(sys, 4, Complex(-1, 0), x), NearPole);
}

TEST_CASE("averaged orbits: unit block stagnates, difference telescopes") {
  const SystemPair sys = build_robot();

  std::vector<CVector> unit(1, CVector::Ones(1));
  const auto r1 = cesaro_norms(sys, unit, PNorm::One, 200);
  CHECK(r1.classification == CesaroClass::Stagnates);
  for (int n : {10, 100, 200}) CHECK(std::abs(r1.norms[static_cast<size_t>(n - 1)] - 1.0) < 1e-12);

  std::vector<CVector> diff(2, CVector::Ones(1));
  diff[1](0) = -1.0;
  const auto r2 = cesaro_norms(sys, diff, PNorm::One, 200);
  CHECK(r2.classification == CesaroClass::OneOverN);
  for (int n : {10, 100, 200})
    CHECK(std::abs(r2.norms[static_cast<size_t>(n - 1)] - 2.0 / n) < 1e-12);
  CHECK(r2.exponent == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("kernel projection: scalar chain averages the blocks") {
  const SystemPair sys = build_robot();
  std::vector<CVector> x;
  for (double v : {2.0, 3.0, -1.0, 4.0}) {
    CVector b(1);
    b(0) = v;
    x.push_back(b);
  }
  const auto px = kernel_projection(sys, x);
  REQUIRE(px.size() == 4);
  for (const CVector& b : px) CHECK(std::abs(b(0) - 2.0) < 1e-12);
  // Idempotent, and annihilates the range of the truncation.
  const auto ppx = kernel_projection(sys, px);
  for (int k = 0; k < 4; ++k) CHECK((ppx[static_cast<size_t>(k)] - px[static_cast<size_t>(k)]).norm() < 1e-12);
  std::vector<CVector> ax(4);
  for (int k = 0; k < 4; ++k) {
    ax[static_cast<size_t>(k)] = CVector(1);
    ax[static_cast<size_t>(k)](0) = -x[static_cast<size_t>(k)](0) + x[static_cast<size_t>((k + 3) % 4)](0);
  }
  const auto pax = kernel_projection(sys, ax);
  for (const CVector& b : pax) CHECK(std::abs(b(0)) < 1e-12);
}

TEST_CASE("kernel projection: companion-form image pattern") {
  const SystemPair sys = build_platoon_pair(2, 1, 1);  // a0 = 5, a1 = 9
  std::mt19937_64 rng(5);
  std::vector<CVector> x(4);
  for (auto& b : x) b = random_cvector(3, rng);
  const auto px = kernel_projection(sys, x);
  for (const CVector& b : px) {
    CHECK((b - px[0]).norm() < 1e-12);
    CHECK(std::abs(b(2)) < 1e-12);
    CHECK(std::abs(b(1) - (-5.0 / 9.0) * b(0)) < 1e-10);
  }
}

TEST_CASE("powers of the discretized section stay on the unit sphere") {
  const SystemPair sys = build_robot();
  const auto rep = power_bound_check(sys, 16, 0.5, PNorm::Inf, 500);
  REQUIRE(rep.norms.size() == 500);
  CHECK(rep.max_dev_from_one < 1e-12);
  CHECK(rep.sup_norm == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.stabilized);
  CHECK_THROWS_AS((void)power_bound_check(sys, 16, 3.0, PNorm::Inf, 100), EpsTooLarge);
}

TEST_CASE("default grids have the documented shape") {
  const auto ts = default_t_grid(1.0, 1e4, 40);
  REQUIRE(ts.size() == 161);
  CHECK(ts.front() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ts.back() == doctest::Approx(1e4).epsilon(1e-14));
  CHECK(std::is_sorted(ts.begin(), ts.end()));

  const auto Ns = default_N_list(4, 512);
  const std::vector<int> want = {4, 8, 16, 32, 64, 128, 256, 512};
  CHECK(Ns == want);
}
