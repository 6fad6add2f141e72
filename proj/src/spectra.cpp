#include "spatinv/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace spatinv {

namespace {

double golden_max(const std::function<double(double)>& f, double lo, double hi, int iters = 60) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
  }
  return std::max(f1, f2);
}

// Coefficients of p(i s) as a polynomial in s.
Poly rotate_to_axis(const Poly& p) {
  std::vector<Complex> c = p.coeffs();
  Complex ik = 1.0;
  for (auto& v : c) {
    v *= ik;
    ik *= Complex(0.0, 1.0);
  }
  return Poly(std::move(c));
}

// Coefficients of conj(p(i s)) for real s: conjugate each rotated coefficient.
Poly rotate_conj(const Poly& p) {
  std::vector<Complex> c = rotate_to_axis(p).coeffs();
  for (auto& v : c) v = std::conj(v);
  return Poly(std::move(c));
}

}  // namespace

std::vector<Complex> eigvals(const CMatrix& A) {
  Eigen::ComplexEigenSolver<CMatrix> es(A, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success) throw NoConvergence("eigenvalue iteration failed");
  const double anorm = std::max(A.norm(), 1e-300);
  for (int i = 0; i < A.rows(); ++i) {
    const CVector v = es.eigenvectors().col(i);
    const double resid = (A * v - es.eigenvalues()(i) * v).norm() / anorm;
    if (resid > 1e-8) throw NoConvergence("eigenpair residual too large");
  }
  std::vector<Complex> out(A.rows());
  for (int i = 0; i < A.rows(); ++i) out[i] = es.eigenvalues()(i);
  std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

GrowthParam growth_param(const RatFun& phi, int k_max) {
  GrowthParam out;
  // |phi(i s)|^2 = [q(i s) conj(q)(i s)] / [p(i s) conj(p)(i s)] for real s;
  // expand H = (D - N)/D at s = 0 by series division.
  const Poly Np = rotate_to_axis(phi.num) * rotate_conj(phi.num);
  const Poly Dp = rotate_to_axis(phi.den) * rotate_conj(phi.den);
  const Poly diff = Dp - Np;

  std::vector<Complex> c(k_max + 1, 0.0);
  {
    const auto& a = diff.coeffs();
    const auto& b = Dp.coeffs();
    if (std::abs(b[0]) == 0.0) throw NearPole("phi has a pole at 0");
    for (int k = 0; k <= k_max; ++k) {
      Complex acc = (k < static_cast<int>(a.size())) ? a[k] : Complex{0.0};
      for (int j = 1; j <= k; ++j)
        if (j < static_cast<int>(b.size())) acc -= b[j] * c[k - j];
      c[k] = acc / b[0];
    }
  }
  out.taylor.resize(k_max + 1);
  double scale = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    out.taylor[k] = c[k].real();
    scale = std::max(scale, std::abs(out.taylor[k]));
  }
  const double thresh = 1e-9 * std::max(1.0, scale);
  for (int k = 1; k <= k_max; ++k) {
    if (std::abs(out.taylor[k]) > thresh) {
      if (k % 2 == 1) {
        out.odd_inconsistency = true;
        continue;
      }
      out.n = k;
      out.leading_coeff = out.taylor[k];
      break;
    }
  }
  return out;
}

const char* to_string(PredictedRate r) {
  switch (r) {
    case PredictedRate::SharpHalf: return "t^-1/2 sharp";
    case PredictedRate::LogHalf: return "t^-1/2 up to a logarithm";
    default: return "none";
  }
}

HypothesisReport hypothesis_check(const SystemPair& sys) {
  HypothesisReport rep;
  std::ostringstream ev;

  const auto spec0 = eigvals(sys.A0);
  double max_re = -std::numeric_limits<double>::infinity();
  for (Complex z : spec0) max_re = std::max(max_re, z.real());
  rep.hurwitz = max_re < 0.0;
  ev << "max Re eig(A0) = " << max_re << "; ";

  try {
    rep.phi_at_zero_dev = std::abs(rat_eval(sys.phi, 0.0) - 1.0);
    rep.phi_normalized = rep.phi_at_zero_dev <= 1e-9;
  } catch (const NearPole&) {
    rep.phi_at_zero_dev = std::numeric_limits<double>::infinity();
    rep.phi_normalized = false;
  }

  // phi = p0(0)/p0 as a cross-multiplied coefficient identity.
  {
    const Poly lhs = sys.phi.num * sys.p0;
    const Poly rhs = sys.p0.eval(0.0) * sys.phi.den;
    const double s = std::max(lhs.max_abs_coeff(), rhs.max_abs_coeff());
    rep.phi_is_p0_ratio = (lhs - rhs).max_abs_coeff() <= 1e-10 * std::max(1.0, s);
  }

  const GrowthParam gp = growth_param(sys.phi);
  rep.n_phi = gp.n;
  if (gp.n) ev << "growth order " << *gp.n << "; ";

  // Level-set condition on the imaginary axis with a margin from the local
  // leading-order model, then a coarse right-half-plane sweep.
  bool omega = rep.phi_normalized && gp.n.has_value() && gp.leading_coeff > 0.0;
  try {
    const double cn = gp.leading_coeff;
    for (int side = 0; side < 2 && omega; ++side) {
      for (int i = 0; i <= 320 && omega; ++i) {
        const double s = (side ? -1.0 : 1.0) * std::pow(10.0, -4.0 + 8.0 * i / 320.0);
        const Complex v = rat_eval(sys.phi, Complex(0.0, s));
        const double h = 1.0 - std::norm(v);
        const double margin = 0.25 * std::min(cn * std::pow(std::abs(s), *gp.n), 1.0);
        if (!(h >= margin)) omega = false;
      }
    }
    for (int i = 1; i <= 40 && omega; ++i) {
      for (int j = -40; j <= 40 && omega; ++j) {
        const Complex z(0.25 * i, 0.25 * j);
        if (std::abs(rat_eval(sys.phi, z)) >= 1.0) omega = false;
      }
    }
  } catch (const NearPole&) {
    omega = false;
  }
  rep.omega_ok = omega;

  try {
    rep.cm = cm_certify(sys.phi).verdict;
  } catch (const Error& e) {
    rep.cm = CmVerdict::Inconclusive;
    ev << "cm: " << e.what() << "; ";
  }
  try {
    rep.tm = tm_certify(sys.phi).verdict;
  } catch (const Error& e) {
    rep.tm = TmVerdict::Inconclusive;
    ev << "tm: " << e.what() << "; ";
  }

  if (!rep.hurwitz || !rep.omega_ok || rep.cm == CmVerdict::Refuted) {
    rep.predicted_rate = PredictedRate::None;
  } else if (rep.tm == TmVerdict::Certified && rep.phi_is_p0_ratio) {
    rep.predicted_rate = PredictedRate::SharpHalf;
  } else {
    rep.predicted_rate = PredictedRate::LogHalf;
  }
  rep.evidence = ev.str();
  return rep;
}

ContourSet omega_contour(const RatFun& phi, Complex lo, Complex hi, int nx, int ny) {
  ContourSet out;
  const double x0 = lo.real(), y0 = lo.imag();
  const double dx = (hi.real() - x0) / nx, dy = (hi.imag() - y0) / ny;

  auto F = [&](double x, double y) -> double {
    const Complex d = phi.den.eval(Complex(x, y));
    const Complex n = phi.num.eval(Complex(x, y));
    if (std::abs(d) == 0.0) return std::numeric_limits<double>::infinity();
    return std::abs(n / d) - 1.0;
  };

  std::vector<double> val((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) val[j * (nx + 1) + i] = F(x0 + i * dx, y0 + j * dy);

  // Pole cells: a sign change in the same cell as a pole is unresolvable.
  std::vector<Root> poles;
  if (phi.reduced) poles = partial_fractions(phi).poles();
  else poles = poly_roots(phi.den);

  auto edge_cross = [&](double xa, double ya, double fa, double xb, double yb,
                        double fb) -> Complex {
    // Bisection along the edge until | |phi| - 1 | <= 1e-3.
    double ta = 0.0, tb = 1.0;
    double va = fa;
    (void)fb;
    for (int it = 0; it < 60; ++it) {
      const double tm = 0.5 * (ta + tb);
      const double vm = F(xa + (xb - xa) * tm, ya + (yb - ya) * tm);
      if (std::abs(vm) <= 1e-3 && it >= 8) {
        ta = tb = tm;
        break;
      }
      if ((vm < 0.0) == (va < 0.0)) {
        ta = tm;
        va = vm;
      } else {
        tb = tm;
      }
    }
    const double t = 0.5 * (ta + tb);
    return Complex(xa + (xb - xa) * t, ya + (yb - ya) * t);
  };

  // Collect refined segments cell by cell, then stitch shared endpoints.
  std::vector<std::pair<Complex, Complex>> segments;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double xa = x0 + i * dx, xb = xa + dx;
      const double ya = y0 + j * dy, yb = ya + dy;
      const double f00 = val[j * (nx + 1) + i], f10 = val[j * (nx + 1) + i + 1];
      const double f01 = val[(j + 1) * (nx + 1) + i], f11 = val[(j + 1) * (nx + 1) + i + 1];
      int mask = 0;
      if (f00 < 0) mask |= 1;
      if (f10 < 0) mask |= 2;
      if (f11 < 0) mask |= 4;
      if (f01 < 0) mask |= 8;
      if (mask == 0 || mask == 15) continue;

      // A sign change sharing a cell with a pole cannot be refined reliably.
      for (const Root& p : poles) {
        if (p.value.real() >= xa && p.value.real() <= xb && p.value.imag() >= ya &&
            p.value.imag() <= yb)
          throw WindowTooCoarse("grid cell contains both a pole and a level crossing");
      }
      if (!std::isfinite(f00) || !std::isfinite(f10) || !std::isfinite(f01) ||
          !std::isfinite(f11))
        continue;

      std::vector<Complex> pts;
      if ((f00 < 0) != (f10 < 0)) pts.push_back(edge_cross(xa, ya, f00, xb, ya, f10));
      if ((f10 < 0) != (f11 < 0)) pts.push_back(edge_cross(xb, ya, f10, xb, yb, f11));
      if ((f11 < 0) != (f01 < 0)) pts.push_back(edge_cross(xb, yb, f11, xa, yb, f01));
      if ((f01 < 0) != (f00 < 0)) pts.push_back(edge_cross(xa, yb, f01, xa, ya, f00));
      if (pts.size() == 2) segments.emplace_back(pts[0], pts[1]);
      else if (pts.size() == 4) {
        segments.emplace_back(pts[0], pts[1]);
        segments.emplace_back(pts[2], pts[3]);
      }
    }
  }

  // Stitch segments into polylines by quantized endpoint keys.
  auto key = [&](Complex z) {
    const long kx = std::lround((z.real() - x0) / dx * 8.0);
    const long ky = std::lround((z.imag() - y0) / dy * 8.0);
    return std::pair<long, long>(kx, ky);
  };
  std::multimap<std::pair<long, long>, size_t> by_end;
  for (size_t s = 0; s < segments.size(); ++s) {
    by_end.insert({key(segments[s].first), s});
    by_end.insert({key(segments[s].second), s});
  }
  std::vector<bool> used(segments.size(), false);
  for (size_t s = 0; s < segments.size(); ++s) {
    if (used[s]) continue;
    used[s] = true;
    std::vector<Complex> line{segments[s].first, segments[s].second};
    bool extended = true;
    while (extended) {
      extended = false;
      auto range = by_end.equal_range(key(line.back()));
      for (auto it = range.first; it != range.second; ++it) {
        const size_t t = it->second;
        if (used[t]) continue;
        const auto& seg = segments[t];
        const auto kb = key(line.back());
        if (key(seg.first) == kb) line.push_back(seg.second);
        else if (key(seg.second) == kb) line.push_back(seg.first);
        else continue;
        used[t] = true;
        extended = true;
        break;
      }
    }
    out.polylines.push_back(std::move(line));
  }

  for (const auto& line : out.polylines) {
    bool exceeds = false;
    if (line.size() >= 2) {
      const Complex mid = 0.5 * (line[0] + line[1]);
      const Complex dir = line[1] - line[0];
      const Complex normal = Complex(-dir.imag(), dir.real());
      const double nn = std::abs(normal);
      if (nn > 0.0) {
        const Complex probe = mid + normal / nn * 0.5 * std::min(dx, dy);
        exceeds = F(probe.real(), probe.imag()) >= 0.0;
      }
    }
    out.exceeds_inside.push_back(exceeds);
  }
  return out;
}

std::vector<TaggedEig> circulant_spectrum(const SystemPair& sys, int N) {
  std::vector<TaggedEig> out;
  for (int j = 0; j < N; ++j) {
    const Complex w = std::exp(Complex(0.0, -2.0 * kPi * j / N));
    for (Complex z : eigvals(sys.A0 + w * sys.A1)) out.push_back({z, j});
  }
  return out;
}

double resolvent_norm_twosided(const SystemPair& sys, Complex lambda, int n_theta) {
  const double aphi = std::abs(rat_eval(sys.phi, lambda));
  if (std::abs(1.0 - aphi) < 1e-10)
    throw OnLevelSet("lambda lies on the |phi| = 1 level set");

  const CMatrix I = CMatrix::Identity(sys.m, sys.m);
  auto inv_norm = [&](double theta) -> double {
    const CMatrix S = lambda * I - sys.A0 - std::exp(Complex(0.0, -theta)) * sys.A1;
    Eigen::JacobiSVD<CMatrix> svd(S);
    const double smin = svd.singularValues()(sys.m - 1);
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / smin;
  };

  double best = 0.0;
  double best_theta = 0.0;
  for (int i = 0; i < n_theta; ++i) {
    const double th = -kPi + 2.0 * kPi * i / n_theta;
    const double v = inv_norm(th);
    if (v > best) {
      best = v;
      best_theta = th;
    }
  }
  const double half = 2.0 * kPi / n_theta;
  best = std::max(best, golden_max(inv_norm, best_theta - half, best_theta + half));
  return best;
}

}  // namespace spatinv
