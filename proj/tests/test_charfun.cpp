#include <doctest.h>

#include <cmath>

#include "spatinv/charfun.hpp"
#include "spatinv/models.hpp"

using namespace spatinv;

TEST_CASE("scalar chain: phi = 1/(lambda+1)") {
  CMatrix A0(1, 1), A1(1, 1);
  A0(0, 0) = -1.0;
  A1(0, 0) = 1.0;
  const SystemPair sys = make_system(A0, A1, "chain");
  REQUIRE(sys.phi.den.degree() == 1);
  CHECK(std::abs(sys.phi.num.coeff(0) - 1.0) < 1e-14);
  CHECK(std::abs(sys.phi.den.coeff(0) - 1.0) < 1e-14);
  CHECK(std::abs(sys.phi.den.coeff(1) - 1.0) < 1e-14);
  CHECK(std::abs(rat_eval(sys.phi, 1.0) - 0.5) < 1e-14);
  CHECK(verify_char(sys) < 1e-12);
}

TEST_CASE("companion-form pair: phi = a0 / charpoly") {
  const SystemPair sys = build_platoon(6.0, 11.0, 6.0);
  CHECK(std::abs(rat_eval(sys.phi, 0.0) - 1.0) < 1e-12);
  for (Complex lam : {Complex(0.5, 0.0), Complex(1.0, 1.0), Complex(2.0, -0.7)}) {
    const Complex direct = 6.0 / sys.p0.eval(lam);
    CHECK(std::abs(rat_eval(sys.phi, lam) - direct) < 1e-12);
  }
  CHECK(verify_char(sys) < 1e-10);
}

TEST_CASE("two-stage cascade: phi = product of first-order factors") {
  // A0 bidiagonal with rates 1, 2; feedback through the last stage.
  CMatrix A0 = CMatrix::Zero(2, 2), A1 = CMatrix::Zero(2, 2);
  A0(0, 0) = -1.0;
  A0(1, 1) = -2.0;
  A0(1, 0) = 1.0;
  A1(0, 1) = 2.0;
  const SystemPair sys = make_system(A0, A1, "cascade2");
  // phi = 2 / ((lambda+1)(lambda+2))
  REQUIRE(sys.phi.den.degree() == 2);
  CHECK(std::abs(sys.phi.num.coeff(0) - 2.0) < 1e-10);
  CHECK(std::abs(sys.phi.den.coeff(0) - 2.0) < 1e-10);
  CHECK(std::abs(sys.phi.den.coeff(1) - 3.0) < 1e-10);
  CHECK(std::abs(sys.phi.den.coeff(2) - 1.0) < 1e-10);
}

TEST_CASE("verify_char residual is small across models") {
  CHECK(verify_char(build_robot()) < 1e-12);
  CHECK(verify_char(build_platoon_pair(1.0, 1.0, 1.0)) < 1e-9);
  CHECK(verify_char(build_cascade({1.0, 2.0, 3.0})) < 1e-9);
}

TEST_CASE("pairs without the rank-one reduction are rejected") {
  CMatrix A0 = CMatrix::Zero(2, 2);
  A0(0, 0) = -1.0;
  A0(1, 1) = -2.0;
  CMatrix A1 = CMatrix::Identity(2, 2);
  CHECK_THROWS_AS((void)extract_phi(A0, A1), NoCharacteristicFunction);
}

TEST_CASE("zero coupling is rejected") {
  CMatrix A0 = CMatrix::Zero(2, 2);
  A0(0, 0) = -1.0;
  A0(1, 1) = -2.0;
  const CMatrix A1 = CMatrix::Zero(2, 2);
  CHECK_THROWS_AS((void)extract_phi(A0, A1), ZeroA1);
}

TEST_CASE("partial fractions of an extracted phi recombine") {
  const SystemPair sys = build_platoon_pair(1.0, 1.0, 1.0);
  const auto pf = partial_fractions(sys.phi);
  for (Complex lam : {Complex(0.4, 0.0), Complex(1.0, 2.0), Complex(-0.2, 1.3)})
    CHECK(std::abs(pf_eval(pf, lam) - rat_eval(sys.phi, lam)) < 1e-9);
}

TEST_CASE("adjugate recursion reproduces the inverse") {
  const SystemPair sys = build_platoon(6.0, 11.0, 6.0);
  const Complex lam(0.8, 0.5);
  CMatrix adj_eval = CMatrix::Zero(3, 3);
  Complex pw = 1.0;
  for (const CMatrix& Mk : sys.adj) {
    adj_eval += pw * Mk;
    pw *= lam;
  }
  const CMatrix shifted = lam * CMatrix::Identity(3, 3) - sys.A0;
  const CMatrix lhs = shifted * adj_eval;
  const Complex det = sys.p0.eval(lam);
  CHECK((lhs - det * CMatrix::Identity(3, 3)).norm() < 1e-10 * std::abs(det));
}
