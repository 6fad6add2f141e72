#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "spatinv/models.hpp"
#include "spatinv/semigroup.hpp"
#include "spatinv/spectra.hpp"

using namespace spatinv;

namespace {

bool close(Complex a, Complex b, double tol) { return std::abs(a - b) < tol; }

// Greedy nearest-neighbor matching of two multisets; ties in a sort key would
// make elementwise comparison of conjugate pairs flaky.
double multiset_distance(std::vector<Complex> a, std::vector<Complex> b) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (Complex x : a) {
    size_t best = 0;
    double d = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < b.size(); ++j)
      if (std::abs(x - b[j]) < d) {
        d = std::abs(x - b[j]);
        best = j;
      }
    worst = std::max(worst, d);
    b.erase(b.begin() + static_cast<long>(best));
  }
  return worst;
}

}  // namespace

TEST_CASE("eigvals of a companion matrix") {
  const SystemPair sys = build_platoon(6, 11, 6);
  const auto ev = eigvals(sys.A0);
  REQUIRE(ev.size() == 3);
  CHECK(close(ev[0], Complex(-3), 1e-8));
  CHECK(close(ev[1], Complex(-2), 1e-8));
  CHECK(close(ev[2], Complex(-1), 1e-8));
}

TEST_CASE("boundary growth order: scalar chain is quadratic") {
  const auto gp = growth_param(build_robot().phi);
  REQUIRE(gp.n.has_value());
  CHECK(*gp.n == 2);
  CHECK(std::abs(gp.leading_coeff - 1.0) < 1e-9);
  CHECK_FALSE(gp.odd_inconsistency);
}

TEST_CASE("boundary growth order: quartic example") {
  // phi = 2/(l^2+2l+2): 1 - |phi(is)|^2 = s^4/(4+s^4).
  const RatFun phi = make_ratfun(Poly{2.0}, Poly{2.0, 2.0, 1.0});
  const auto gp = growth_param(phi);
  REQUIRE(gp.n.has_value());
  CHECK(*gp.n == 4);
  CHECK(std::abs(gp.leading_coeff - 0.25) < 1e-9);
}

TEST_CASE("hypothesis report: scalar chain") {
  const auto rep = hypothesis_check(build_robot());
  CHECK(rep.hurwitz);
  CHECK(rep.omega_ok);
  CHECK(rep.phi_normalized);
  CHECK(rep.phi_is_p0_ratio);
  REQUIRE(rep.n_phi.has_value());
  CHECK(*rep.n_phi == 2);
  CHECK(rep.cm == CmVerdict::Certified);
  CHECK(rep.tm == TmVerdict::Certified);
  CHECK(rep.predicted_rate == PredictedRate::SharpHalf);
}

TEST_CASE("hypothesis report: complex pole pair drops the sharp prediction") {
  const auto rep = hypothesis_check(build_platoon_pair(1, 1, 1));
  CHECK(rep.hurwitz);
  CHECK(rep.cm == CmVerdict::Certified);
  CHECK(rep.tm != TmVerdict::Certified);
  CHECK(rep.predicted_rate == PredictedRate::LogHalf);
  REQUIRE(rep.n_phi.has_value());
  CHECK(*rep.n_phi == 2);
}

TEST_CASE("hypothesis report: sign-flipped constant breaks stability") {
  const auto rep = hypothesis_check(build_platoon_from_zeros(1, 2, 3, true));
  CHECK_FALSE(rep.hurwitz);
  CHECK(rep.predicted_rate == PredictedRate::None);
}

TEST_CASE("level set of |phi| = 1 for the scalar chain is a circle") {
  // |1/(l+1)| = 1  <=>  |l + 1| = 1.
  const auto cs = omega_contour(build_robot().phi, Complex(-3, -3), Complex(1, 3));
  REQUIRE_FALSE(cs.polylines.empty());
  int points = 0;
  double worst = 0.0;
  for (const auto& line : cs.polylines)
    for (Complex z : line) {
      worst = std::max(worst, std::abs(std::abs(z + 1.0) - 1.0));
      ++points;
    }
  CHECK(points > 50);
  CHECK(worst < 2e-3);
}

TEST_CASE("level-set points satisfy |phi| = 1 for a third-order model") {
  const SystemPair sys = build_platoon_pair(1, 1, 1);
  const auto cs = omega_contour(sys.phi, Complex(-3, -4), Complex(1, 4));
  REQUIRE_FALSE(cs.polylines.empty());
  double worst = 0.0;
  for (const auto& line : cs.polylines)
    for (Complex z : line) worst = std::max(worst, std::abs(std::abs(rat_eval(sys.phi, z)) - 1.0));
  CHECK(worst < 1e-3);
}

TEST_CASE("circulant spectrum of the scalar chain at N = 4") {
  const auto tagged = circulant_spectrum(build_robot(), 4);
  REQUIRE(tagged.size() == 4);
  std::vector<Complex> got;
  for (const auto& te : tagged) got.push_back(te.lambda);
  const std::vector<Complex> want = {{-2, 0}, {-1, -1}, {-1, 1}, {0, 0}};
  CHECK(multiset_distance(got, want) < 1e-10);
}

TEST_CASE("circulant spectrum matches the dense truncation") {
  const SystemPair sys = build_platoon_pair(2, 1, 1);
  const int N = 8;
  const auto tagged = circulant_spectrum(sys, N);
  std::vector<Complex> structured;
  for (const auto& te : tagged) structured.push_back(te.lambda);
  const CMatrix AN = assemble_truncation(sys, Kind::Circulant, N);
  const auto dense = eigvals(AN);
  CHECK(multiset_distance(structured, dense) < 1e-8);
}

TEST_CASE("two-sided resolvent norm: explicit scalar value") {
  // Symbol -1 + e^{-i theta}; at lambda = 2 the norm is sup 1/|3 - e^{-i t}| = 1/2.
  CHECK(std::abs(resolvent_norm_twosided(build_robot(), 2.0) - 0.5) < 1e-9);
}

TEST_CASE("two-sided resolvent norm grows like 2/s^2 on the axis") {
  const SystemPair sys = build_robot();
  const double s = 0.025;
  const double r = resolvent_norm_twosided(sys, Complex(0.0, s));
  CHECK(std::abs(r * s * s - 2.0) < 0.1);
}

TEST_CASE("resolvent norm is comparable to 1/(1-|phi|) on the axis") {
  const SystemPair sys = build_robot();
  for (double s : {1e-3, 1e-2, 1e-1}) {
    const double r = resolvent_norm_twosided(sys, Complex(0.0, s));
    const double gap = 1.0 - std::abs(rat_eval(sys.phi, Complex(0.0, s)));
    const double ratio = r * gap;
    CHECK(ratio > 0.5);
    CHECK(ratio < 2.0);
  }
}

TEST_CASE("two-sided resolvent refuses the level set") {
  // phi(0) = 1 for the scalar chain.
  CHECK_THROWS_AS((void)resolvent_norm_twosided(build_robot(), Complex(0.0, 0.0)),
                  OnLevelSet);
}
