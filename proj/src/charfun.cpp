#include "spatinv/charfun.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace spatinv {

AdjugateResult adjugate_polynomial(const CMatrix& A) {
  const int m = static_cast<int>(A.rows());
  if (A.cols() != m) throw ShapeMismatch("adjugate requires a square matrix");
  // Faddeev-LeVerrier: N_{j+1} = A N_j + c_{m-1-j} I with
  // c_{m-1-j} = -tr(A N_j)/(j+1); N_j multiplies lambda^{m-1-j} in the adjugate.
  std::vector<Complex> c(m + 1, 0.0);
  c[m] = 1.0;
  std::vector<CMatrix> M(m);
  CMatrix N = CMatrix::Identity(m, m);
  for (int j = 0;; ++j) {
    M[m - 1 - j] = N;
    const CMatrix AN = A * N;
    c[m - 1 - j] = -AN.trace() / static_cast<double>(j + 1);
    if (j == m - 1) break;
    N = AN + c[m - 1 - j] * CMatrix::Identity(m, m);
  }
  return {std::move(M), Poly(std::move(c))};
}

RatFun extract_phi(const CMatrix& A0, const CMatrix& A1, double tol) {
  const int m = static_cast<int>(A0.rows());
  if (A0.cols() != m || A1.rows() != m || A1.cols() != m)
    throw ShapeMismatch("coupled pair must be square matrices of equal size");
  const double a1norm = A1.norm();
  if (a1norm == 0.0) throw ZeroA1("coupling matrix is zero");

  AdjugateResult adj = adjugate_polynomial(A0);
  std::vector<Complex> q(m, 0.0);
  for (int k = 0; k < m; ++k) {
    const CMatrix Bk = A1 * adj.M[k] * A1;
    const Complex qk = (A1.conjugate().cwiseProduct(Bk)).sum() / (a1norm * a1norm);
    const double resid = (Bk - qk * A1).norm();
    if (resid > tol * a1norm * (1.0 + adj.M[k].norm()))
      throw NoCharacteristicFunction("A1 * adj(lambda - A0) * A1 is not proportional to A1");
    q[k] = qk;
  }
  Poly qp = Poly(std::move(q)).trimmed(1e-14);
  return rat_reduce(make_ratfun(std::move(qp), adj.p0));
}

SystemPair make_system(CMatrix A0, CMatrix A1, std::string label) {
  SystemPair sys;
  sys.label = std::move(label);
  sys.m = static_cast<int>(A0.rows());
  sys.phi = extract_phi(A0, A1);
  AdjugateResult adj = adjugate_polynomial(A0);
  sys.p0 = std::move(adj.p0);
  sys.adj = std::move(adj.M);
  sys.A0 = std::move(A0);
  sys.A1 = std::move(A1);
  return sys;
}

double verify_char(const SystemPair& sys, int n_samples, unsigned seed) {
  Eigen::ComplexEigenSolver<CMatrix> es(sys.A0, false);
  if (es.info() != Eigen::Success) throw NoConvergence("eigenvalue solve failed");
  const double specrad = es.eigenvalues().cwiseAbs().maxCoeff();
  const double R = 2.0 * (1.0 + specrad);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  const double a1norm = sys.A1.norm();
  double worst = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const Complex lambda = R * std::exp(Complex(0.0, angle(rng)));
    const CMatrix shifted = lambda * CMatrix::Identity(sys.m, sys.m) - sys.A0;
    const CMatrix Z = shifted.partialPivLu().solve(sys.A1);
    const Complex phi = rat_eval(sys.phi, lambda);
    const double resid =
        (sys.A1 * Z - phi * sys.A1).norm() / (a1norm * std::max(1.0, std::abs(phi)));
    worst = std::max(worst, resid);
  }
  return worst;
}

}  // namespace spatinv
