#include "spatinv/ratfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace spatinv {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Upper bound for |p(z)| roundoff under Horner evaluation.
double eval_scale(const Poly& p, Complex z) {
  double s = 0.0, pw = 1.0;
  const double az = std::abs(z);
  for (Complex c : p.coeffs()) {
    s += std::abs(c) * pw;
    pw *= az;
  }
  return s;
}

std::vector<Complex> companion_eigenvalues(const Poly& p) {
  const Poly m = p.monic();
  const int n = m.degree();
  CMatrix C = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) C(i, n - 1) = -m.coeff(i);
  for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
  Eigen::ComplexEigenSolver<CMatrix> es(C, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NoConvergence("companion eigenvalue iteration failed");
  std::vector<Complex> z(n);
  for (int i = 0; i < n; ++i) z[i] = es.eigenvalues()(i);
  return z;
}

// Simultaneous Newton sweeps with Aberth repulsion between the iterates.
void refine_simultaneous(const Poly& p, std::vector<Complex>& z) {
  const Poly dp = p.derivative();
  const int n = static_cast<int>(z.size());
  for (int sweep = 0; sweep < 40; ++sweep) {
    double moved = 0.0;
    for (int i = 0; i < n; ++i) {
      const Complex pz = p.eval(z[i]);
      if (std::abs(pz) <= 8.0 * kEps * eval_scale(p, z[i])) continue;
      const Complex dpz = dp.eval(z[i]);
      if (dpz == 0.0) {
        z[i] += 1e-10 * (1.0 + std::abs(z[i]));
        continue;
      }
      const Complex w = pz / dpz;
      Complex s = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const Complex d = z[i] - z[j];
        if (std::abs(d) > 1e-100) s += 1.0 / d;
      }
      const Complex denom = 1.0 - w * s;
      Complex delta = (std::abs(denom) < 1e-100) ? w : w / denom;
      const double cap = 0.5 * (1.0 + std::abs(z[i]));
      if (std::abs(delta) > cap) delta *= cap / std::abs(delta);
      z[i] -= delta;
      moved = std::max(moved, std::abs(delta) / (1.0 + std::abs(z[i])));
    }
    if (moved < 1e-15) break;
  }
}

struct Cluster {
  Complex mean;
  int mult = 1;
  double diameter = 0.0;
};

std::vector<Cluster> cluster_points(const std::vector<Complex>& z, double radius) {
  const int n = static_cast<int>(z.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(z[i] - z[j]) <= radius) parent[find(i)] = find(j);
  std::vector<std::vector<int>> groups(n);
  for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<Cluster> out;
  for (const auto& g : groups) {
    if (g.empty()) continue;
    Cluster c;
    c.mult = static_cast<int>(g.size());
    Complex sum = 0.0;
    for (int i : g) sum += z[i];
    c.mean = sum / static_cast<double>(c.mult);
    for (size_t a = 0; a < g.size(); ++a)
      for (size_t b = a + 1; b < g.size(); ++b)
        c.diameter = std::max(c.diameter, std::abs(z[g[a]] - z[g[b]]));
    out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const Cluster& a, const Cluster& b) {
    if (a.mean.real() != b.mean.real()) return a.mean.real() < b.mean.real();
    return a.mean.imag() < b.mean.imag();
  });
  return out;
}

// A k-fold root of p is a simple root of the (k-1)-th derivative.
Complex polish_multiple(const Poly& p, Complex z0, int mult) {
  Poly q = p;
  for (int i = 1; i < mult; ++i) q = q.derivative();
  const Poly dq = q.derivative();
  Complex z = z0;
  for (int it = 0; it < 20; ++it) {
    const Complex qz = q.eval(z);
    const Complex dqz = dq.eval(z);
    if (dqz == 0.0) break;
    const Complex step = qz / dqz;
    if (std::abs(step) > 0.1 * (1.0 + std::abs(z))) break;
    z -= step;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(z))) break;
  }
  return (std::abs(q.eval(z)) <= std::abs(q.eval(z0))) ? z : z0;
}

std::vector<Cluster> root_clusters(const Poly& p) {
  const Poly q = p.trimmed(0.0);
  if (q.degree() == 0) return {};
  std::vector<Complex> z;
  if (q.degree() == 1) {
    z = {-q.coeff(0) / q.coeff(1)};
  } else if (q.degree() == 2) {
    const Complex a = q.coeff(2), b = q.coeff(1), c = q.coeff(0);
    const Complex sd = std::sqrt(b * b - 4.0 * a * c);
    // Pick the sign that avoids cancellation in -b -/+ sd.
    const Complex u = (std::real(std::conj(b) * sd) >= 0.0) ? -b - sd : -b + sd;
    if (u == 0.0) {
      z = {-b / (2.0 * a), -b / (2.0 * a)};
    } else {
      z = {u / (2.0 * a), (2.0 * c) / u};
    }
  } else {
    z = companion_eigenvalues(q);
    refine_simultaneous(q, z);
  }
  double mz = 0.0;
  for (Complex v : z) mz = std::max(mz, std::abs(v));
  auto clusters = cluster_points(z, 1e-8 * (1.0 + mz));
  for (Cluster& c : clusters)
    if (c.mult > 1) c.mean = polish_multiple(q, c.mean, c.mult);
  for (const Cluster& c : clusters) {
    if (std::abs(q.eval(c.mean)) > 1e-6 * std::max(eval_scale(q, c.mean), q.max_abs_coeff()))
      throw NoConvergence("root residual too large after refinement");
  }
  return clusters;
}

// Power-series quotient a/b to order K; requires b[0] != 0.
std::vector<Complex> series_div(const std::vector<Complex>& a, const std::vector<Complex>& b,
                                int K) {
  std::vector<Complex> c(K + 1, 0.0);
  for (int k = 0; k <= K; ++k) {
    Complex acc = (k < static_cast<int>(a.size())) ? a[k] : Complex{0.0};
    for (int j = 1; j <= k; ++j) {
      if (j < static_cast<int>(b.size())) acc -= b[j] * c[k - j];
    }
    c[k] = acc / b[0];
  }
  return c;
}

}  // namespace

RatFun make_ratfun(Poly num, Poly den) {
  Poly d = den.trimmed(0.0);
  if (d.degree() < 1) throw DegreeZero("denominator must have degree >= 1");
  const Complex lead = d.lead();
  d = (1.0 / lead) * d;
  Poly n = (1.0 / lead) * num;
  if (!n.is_zero() && n.degree() >= d.degree())
    throw ShapeMismatch("numerator degree must be below denominator degree");
  return RatFun{std::move(n), std::move(d), false};
}

std::vector<Root> poly_roots(const Poly& p) {
  std::vector<Root> out;
  for (const Cluster& c : root_clusters(p)) out.push_back({c.mean, c.mult});
  return out;
}

Poly poly_from_roots(const std::vector<Root>& roots, Complex leading) {
  std::vector<Complex> flat;
  for (const Root& r : roots)
    for (int i = 0; i < r.multiplicity; ++i) flat.push_back(r.value);
  return Poly::from_roots(flat, leading);
}

Complex rat_eval(const RatFun& r, Complex x) {
  const Complex d0 = r.den.eval(x);
  const double a0 = std::abs(d0);
  if (a0 == 0.0) throw NearPole("evaluation point is a pole");
  const double a1 = std::abs(r.den.derivative().eval(x));
  const double a2 = std::abs(r.den.derivative().derivative().eval(x));
  double dist = std::numeric_limits<double>::infinity();
  if (a1 > 0.0) dist = a0 / a1;
  if (a2 > 0.0) dist = std::min(dist, std::sqrt(2.0 * a0 / a2));
  if (dist < 1e-12) throw NearPole("evaluation point within 1e-12 of a pole");
  return r.num.eval(x) / d0;
}

std::vector<Complex> rat_derivs_at_zero(const RatFun& r, int K) {
  if (std::abs(r.den.coeff(0)) <= 1e-12 * std::max(1.0, r.den.max_abs_coeff()))
    throw NearPole("origin is at or near a pole");
  const auto c = series_div(r.num.coeffs(), r.den.coeffs(), K);
  std::vector<Complex> derivs(K + 1);
  double fact = 1.0;
  for (int k = 0; k <= K; ++k) {
    if (k > 0) fact *= k;
    derivs[k] = fact * c[k];
  }
  return derivs;
}

std::vector<Root> PartialFractions::poles() const {
  std::vector<Root> out;
  for (const PFTerm& t : terms) {
    if (out.empty() || out.back().value != t.pole) out.push_back({t.pole, t.order});
    else out.back().multiplicity = std::max(out.back().multiplicity, t.order);
  }
  return out;
}

PartialFractions partial_fractions(const RatFun& r) {
  if (!r.reduced) throw NotReduced("expansion requires a reduced rational function");
  const auto clusters = root_clusters(r.den);
  PartialFractions pf;
  if (r.num.is_zero()) return pf;

  bool merged_distinct = false;
  for (const Cluster& c : clusters)
    if (c.mult > 1 && c.diameter > 1e-12) merged_distinct = true;

  if (!merged_distinct) {
    for (const Cluster& c : clusters) {
      const auto tnum = r.num.taylor_at(c.mean).coeffs();
      const auto tden = r.den.taylor_at(c.mean).coeffs();
      // den = (x - pole)^mult * s(x); Taylor coefficients of s start at slot mult.
      std::vector<Complex> s(tden.begin() + c.mult, tden.end());
      const auto q = series_div(tnum, s, c.mult - 1);
      for (int k = c.mult; k >= 1; --k)
        pf.terms.push_back({c.mean, k, q[c.mult - k]});
      std::reverse(pf.terms.end() - c.mult, pf.terms.end());
    }
    return pf;
  }

  // A cluster merged genuinely distinct roots: the confluent expansion is
  // ill-conditioned, so fit all coefficients to sampled values instead.
  std::vector<std::pair<Complex, int>> basis;
  for (const Cluster& c : clusters)
    for (int k = 1; k <= c.mult; ++k) basis.emplace_back(c.mean, k);
  double mp = 0.0;
  for (const Cluster& c : clusters) mp = std::max(mp, std::abs(c.mean));
  const double R = 2.0 * (1.0 + mp);
  const int T = static_cast<int>(basis.size());
  const int S = std::max(4 * T, 64);
  CMatrix M(S, T);
  CVector rhs(S);
  for (int i = 0; i < S; ++i) {
    const Complex x = R * std::exp(Complex(0.0, 2.0 * kPi * i / S));
    for (int j = 0; j < T; ++j) M(i, j) = std::pow(x - basis[j].first, -basis[j].second);
    rhs(i) = rat_eval(r, x);
  }
  const CVector sol = M.colPivHouseholderQr().solve(rhs);
  for (int j = 0; j < T; ++j) pf.terms.push_back({basis[j].first, basis[j].second, sol(j)});
  return pf;
}

Complex pf_eval(const PartialFractions& pf, Complex x) {
  Complex acc = 0.0;
  for (const PFTerm& t : pf.terms) acc += t.coeff * std::pow(x - t.pole, -t.order);
  return acc;
}

Complex inverse_laplace_eval(const PartialFractions& pf, double t, bool* underflow) {
  if (underflow) *underflow = false;
  Complex acc = 0.0;
  for (const PFTerm& term : pf.terms) {
    const Complex e = term.pole * t;
    if (e.real() < -700.0) {
      if (underflow) *underflow = true;
      continue;
    }
    double poly = 1.0;
    for (int i = 1; i < term.order; ++i) poly *= t / static_cast<double>(i);
    acc += term.coeff * poly * std::exp(e);
  }
  return acc;
}

RatFun rat_reduce(const RatFun& r) {
  RatFun out = make_ratfun(r.num, r.den);
  if (out.num.is_zero()) {
    out.reduced = true;
    return out;
  }
  auto nroots = root_clusters(out.num);
  auto droots = root_clusters(out.den);
  double mz = 0.0;
  for (const auto& c : nroots) mz = std::max(mz, std::abs(c.mean));
  for (const auto& c : droots) mz = std::max(mz, std::abs(c.mean));
  const double radius = 1e-8 * (1.0 + mz);

  for (auto& nc : nroots) {
    for (auto& dc : droots) {
      if (nc.mult == 0 || dc.mult == 0) continue;
      if (std::abs(nc.mean - dc.mean) <= radius) {
        const int k = std::min(nc.mult, dc.mult);
        nc.mult -= k;
        dc.mult -= k;
      }
    }
  }

  std::vector<Root> keep_n, keep_d;
  for (const auto& c : nroots)
    if (c.mult > 0) keep_n.push_back({c.mean, c.mult});
  for (const auto& c : droots)
    if (c.mult > 0) keep_d.push_back({c.mean, c.mult});
  if (keep_d.empty()) throw DegreeZero("all denominator roots cancelled");

  RatFun red = make_ratfun(poly_from_roots(keep_n, out.num.lead()),
                           poly_from_roots(keep_d, 1.0));
  red.reduced = true;
  return red;
}

}  // namespace spatinv
