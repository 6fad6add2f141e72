#include "spatinv/monotone.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace spatinv {

namespace {

RatFun reduced_copy(const RatFun& phi) { return phi.reduced ? phi : rat_reduce(phi); }

void require_stable_poles(const PartialFractions& pf) {
  for (const Root& p : pf.poles())
    if (p.value.real() >= 0.0)
      throw PoleInRightHalfPlane("pole with nonnegative real part");
}

// Returns {argmin, min}; the argmin must stay consistent with the value so
// that reported witnesses can be re-evaluated independently.
std::pair<double, double> golden_min(const std::function<double(double)>& f, double lo,
                                     double hi, int iters = 60) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
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
  return f1 < f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

struct TailTerm {  // magnitude model |A| * C(n, k-1) * eps^k * |base|^(n-k+1)
  double amp = 0.0;   // |A| * eps^k
  int k = 1;
  double base = 0.0;  // |eps*pole + 1|
};

double tail_term_value(const TailTerm& t, long n) {
  if (n < t.k - 1) return 0.0;
  // C(n, k-1) * base^(n-k+1), accumulated in log space for large n.
  double lg = std::lgamma(static_cast<double>(n) + 1.0) -
              std::lgamma(static_cast<double>(t.k)) -
              std::lgamma(static_cast<double>(n - t.k + 2));
  if (t.base == 0.0) return (n == t.k - 1) ? t.amp : 0.0;
  lg += static_cast<double>(n - t.k + 1) * std::log(t.base);
  return t.amp * std::exp(lg);
}

}  // namespace

const char* to_string(CmVerdict v) {
  switch (v) {
    case CmVerdict::Certified: return "Certified";
    case CmVerdict::Refuted: return "Refuted";
    default: return "Inconclusive";
  }
}

const char* to_string(TmVerdict v) {
  switch (v) {
    case TmVerdict::Certified: return "Certified";
    case TmVerdict::RefutedAtTestedEps: return "RefutedAtTestedEps";
    default: return "Inconclusive";
  }
}

MonotoneCertificate cm_certify(const RatFun& phi, const CmGrid& grid) {
  const RatFun red = reduced_copy(phi);
  const PartialFractions pf = partial_fractions(red);
  require_stable_poles(pf);

  MonotoneCertificate cert;

  const int decades = static_cast<int>(std::ceil(std::log10(grid.t_hi / grid.t_lo)));
  const int n_pts = std::max(2, decades * grid.per_decade + 1);
  std::vector<double> ts(n_pts), gs(n_pts);
  double max_im = 0.0;
  for (int i = 0; i < n_pts; ++i) {
    ts[i] = grid.t_lo * std::pow(grid.t_hi / grid.t_lo, static_cast<double>(i) / (n_pts - 1));
    const Complex g = inverse_laplace_eval(pf, ts[i]);
    gs[i] = g.real();
    max_im = std::max(max_im, std::abs(g.imag()));
    cert.scale = std::max(cert.scale, std::abs(gs[i]));
  }
  if (max_im > 1e-10 * std::max(1.0, cert.scale))
    throw NonRealOnAxis("inverse transform has a nonreal value on the positive axis");

  auto geval = [&](double t) { return inverse_laplace_eval(pf, t).real(); };
  cert.grid_min = gs[0];
  cert.grid_min_t = ts[0];
  for (int i = 0; i < n_pts; ++i) {
    if (gs[i] < cert.grid_min) {
      cert.grid_min = gs[i];
      cert.grid_min_t = ts[i];
    }
    if (i > 0 && i + 1 < n_pts && gs[i] < gs[i - 1] && gs[i] < gs[i + 1]) {
      const auto [t_ref, refined] = golden_min(geval, ts[i - 1], ts[i + 1]);
      if (refined < cert.grid_min) {
        cert.grid_min = refined;
        cert.grid_min_t = t_ref;
      }
    }
  }

  // Leading behavior at t -> 0+ is governed by the top numerator coefficient
  // (denominator kept monic), at t -> infinity by the rightmost pole group.
  const Complex qlead = red.num.lead();
  cert.small_t_positive =
      qlead.real() > 0.0 && std::abs(qlead.imag()) <= 1e-9 * std::abs(qlead);

  double max_re = -std::numeric_limits<double>::infinity();
  for (const Root& p : pf.poles()) max_re = std::max(max_re, p.value.real());
  const double re_tol = 1e-9 * (1.0 + std::abs(max_re));
  int top_order = 0;
  for (const PFTerm& t : pf.terms)
    if (t.pole.real() >= max_re - re_tol) top_order = std::max(top_order, t.order);
  double sum_real = 0.0, sum_osc = 0.0;
  bool has_real = false;
  for (const PFTerm& t : pf.terms) {
    if (t.pole.real() < max_re - re_tol || t.order != top_order) continue;
    if (std::abs(t.pole.imag()) <= re_tol) {
      sum_real += t.coeff.real();
      has_real = true;
    } else {
      sum_osc += std::abs(t.coeff);
    }
  }
  cert.large_t_positive =
      has_real ? (sum_real - sum_osc >= -1e-9 * (std::abs(sum_real) + sum_osc))
               : (sum_osc <= 1e-12 * cert.scale);

  if (cert.grid_min < -1e-10 * cert.scale) {
    cert.verdict = CmVerdict::Refuted;
    cert.witness = {{cert.grid_min_t, cert.grid_min}};
    cert.detail = "negative value on the inspection grid";
  } else if (cert.grid_min >= -1e-12 * cert.scale && cert.small_t_positive &&
             cert.large_t_positive) {
    cert.verdict = CmVerdict::Certified;
    cert.detail = "nonnegative on the grid with positive leading behavior at both ends";
  } else {
    cert.verdict = CmVerdict::Inconclusive;
    cert.detail = "no negative witness, but endpoint analysis is not conclusive";
  }
  return cert;
}

double eps_max(const std::vector<Root>& poles) {
  double e = std::numeric_limits<double>::infinity();
  for (const Root& p : poles) {
    if (p.value.real() >= 0.0) throw PoleInRightHalfPlane("pole with nonnegative real part");
    e = std::min(e, -2.0 * p.value.real() / std::norm(p.value));
  }
  return e;
}

double eps_max(const RatFun& phi) {
  return eps_max(partial_fractions(reduced_copy(phi)).poles());
}

TMCoefficients tm_coeffs(const RatFun& phi, double eps, long N) {
  const RatFun red = reduced_copy(phi);
  const PartialFractions pf = partial_fractions(red);
  const double emax = eps_max(pf.poles());
  if (!(eps > 0.0) || eps >= emax) throw EpsTooLarge("eps outside (0, eps_max)");

  TMCoefficients out;
  out.eps = eps;
  out.a.assign(N + 1, 0.0);
  std::vector<double> im(N + 1, 0.0);
  for (const PFTerm& term : pf.terms) {
    const Complex base = eps * term.pole + 1.0;
    const Complex amp = term.coeff * std::pow(eps, term.order);
    // C(n, k-1) and base^(n-k+1) tracked incrementally from n = k-1.
    double binom = 1.0;
    Complex bpow = 1.0;
    for (long n = term.order - 1; n <= N; ++n) {
      if (n > term.order - 1) {
        binom *= static_cast<double>(n) / static_cast<double>(n - term.order + 1);
        bpow *= base;
      }
      const Complex v = amp * binom * bpow;
      out.a[n] += v.real();
      im[n] += v.imag();
    }
  }
  for (long n = 0; n <= N; ++n) out.scale = std::max(out.scale, std::abs(out.a[n]));
  double max_im = 0.0;
  for (double v : im) max_im = std::max(max_im, std::abs(v));
  if (max_im > 1e-10 * std::max(1.0, out.scale))
    throw NonRealOnAxis("coefficient sequence has a nonreal value");

  // Tail analysis over the term magnitude models.
  double mb = 0.0;
  for (const PFTerm& t : pf.terms) mb = std::max(mb, std::abs(eps * t.pole + 1.0));
  if (mb == 0.0) {
    int kmax = 0;
    for (const PFTerm& t : pf.terms) kmax = std::max(kmax, t.order);
    out.dominant_base = 0.0;
    out.tail_dominant_real = true;
    out.n_star = kmax;  // every term vanishes beyond its own order
    return out;
  }

  std::vector<const PFTerm*> dom_pole_terms;
  Complex dom_pole = 0.0;
  int n_dom_poles = 0;
  {
    std::vector<Complex> seen;
    for (const PFTerm& t : pf.terms) {
      if (std::abs(eps * t.pole + 1.0) < mb * (1.0 - 1e-12)) continue;
      bool found = false;
      for (Complex s : seen) found = found || (s == t.pole);
      if (!found) {
        seen.push_back(t.pole);
        ++n_dom_poles;
        if (t.pole.imag() >= 0.0 || n_dom_poles == 1) dom_pole = t.pole;
      }
    }
    for (const PFTerm& t : pf.terms)
      if (t.pole == dom_pole) dom_pole_terms.push_back(&t);
  }
  const Complex dbase = eps * dom_pole + 1.0;
  out.dominant_base = dbase;

  const bool unique_real_pos = n_dom_poles == 1 &&
                               std::abs(dbase.imag()) <= 1e-12 * (1.0 + std::abs(dbase)) &&
                               dbase.real() > 0.0;
  int kd = 0;
  Complex cd = 0.0;
  for (const PFTerm* t : dom_pole_terms)
    if (t->order > kd) {
      kd = t->order;
      cd = t->coeff * std::pow(eps, t->order);
    }
  const bool coeff_pos = cd.real() > 0.0 && std::abs(cd.imag()) <= 1e-12 * std::abs(cd);
  out.tail_dominant_real = unique_real_pos && coeff_pos;
  if (!out.tail_dominant_real) return out;

  TailTerm dom{std::abs(cd), kd, dbase.real()};
  std::vector<TailTerm> others;
  long n_geo = kd - 1;
  for (const PFTerm& t : pf.terms) {
    if (t.pole == dom_pole && t.order == kd) continue;
    TailTerm o{std::abs(t.coeff) * std::pow(eps, t.order), t.order,
               std::abs(eps * t.pole + 1.0)};
    if (o.amp == 0.0) continue;
    others.push_back(o);
    n_geo = std::max<long>(n_geo, o.k - 1);
    const double rho = o.base / dom.base;
    if (rho < 1.0 - 1e-14) {
      // Step ratio of other/dominant falls below 1 once
      // rho * (n+2-kd) < (n+2-ko), i.e. beyond (ko - rho*kd)/(1-rho) - 2.
      const double thr = (o.k - rho * kd) / (1.0 - rho) - 2.0;
      if (thr > static_cast<double>(n_geo)) n_geo = static_cast<long>(std::ceil(thr));
    }
    // rho ~= 1 only for lower orders at the dominant pole; their step ratio
    // is below 1 for every admissible n.
  }

  constexpr long kScanCap = 200000;
  for (long n = std::max<long>(n_geo, kd - 1); n <= kScanCap; ++n) {
    const double d = tail_term_value(dom, n);
    if (d <= 0.0) break;
    double o = 0.0;
    for (const TailTerm& t : others) o += tail_term_value(t, n);
    if (d > o) {
      out.n_star = n;
      break;
    }
  }
  return out;
}

TmReport tm_certify(const RatFun& phi, std::vector<double> eps_grid, long N) {
  const RatFun red = reduced_copy(phi);
  if (eps_grid.empty()) {
    const double emax = eps_max(red);
    for (int k = 1; k <= 8; ++k) eps_grid.push_back(emax * std::pow(2.0, -k));
  }

  TmReport report;
  bool all_refuted = true;
  double worst_rel = 0.0;

  for (double eps : eps_grid) {
    TMCoefficients tc = tm_coeffs(red, eps, N);

    auto first_negative = [](const TMCoefficients& c) -> std::optional<long> {
      const double cut = -1e-10 * c.scale;
      for (size_t n = 0; n < c.a.size(); ++n)
        if (c.a[n] < cut) return static_cast<long>(n);
      return std::nullopt;
    };

    std::optional<long> neg = first_negative(tc);
    if (!neg && !tc.tail_dominant_real) {
      // Oscillatory dominant base: extend the scan over several periods.
      const double theta = std::abs(std::arg(tc.dominant_base));
      if (theta > 0.0) {
        const long next = std::min<long>(
            200000, std::max<long>(N, static_cast<long>(6.0 * kPi / theta) + 1));
        if (next > N) {
          tc = tm_coeffs(red, eps, next);
          neg = first_negative(tc);
        }
      }
    }

    if (neg) {
      const double rel = -tc.a[*neg] / tc.scale;
      if (rel > worst_rel) {
        worst_rel = rel;
        report.witness = {{eps, *neg, tc.a[*neg]}};
      }
      std::ostringstream os;
      os << "negative coefficient at n = " << *neg;
      report.evidence.emplace_back(eps, os.str());
      continue;
    }
    all_refuted = false;

    if (tc.tail_dominant_real && tc.n_star) {
      const long n_check = std::max(N, *tc.n_star);
      const TMCoefficients full = (n_check > N) ? tm_coeffs(red, eps, n_check) : tc;
      bool ok = true;
      for (double v : full.a) ok = ok && (v >= -1e-12 * full.scale);
      if (ok) {
        report.verdict = TmVerdict::Certified;
        report.eps_certified = eps;
        report.evidence.emplace_back(eps, "nonnegative with certified tail domination");
        return report;
      }
      report.evidence.emplace_back(eps, "small negative values below the refutation cut");
    } else {
      report.evidence.emplace_back(eps, "no negative witness; tail not certifiable");
    }
  }

  report.verdict = all_refuted ? TmVerdict::RefutedAtTestedEps : TmVerdict::Inconclusive;
  return report;
}

std::vector<double> tm_rescale(const std::vector<double>& a, double beta) {
  if (!(beta > 0.0) || beta > 1.0) throw EpsTooLarge("beta outside (0, 1]");
  if (beta == 1.0) return a;
  const long N = static_cast<long>(a.size()) - 1;
  const double lb = std::log(beta), l1b = std::log1p(-beta);
  std::vector<double> b(a.size(), 0.0);
  for (long n = 0; n <= N; ++n) {
    double acc = 0.0;
    for (long k = 0; k <= n; ++k) {
      const double lw = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                        k * lb + (n - k) * l1b;
      acc += a[k] * beta * std::exp(lw);
    }
    b[n] = acc;
  }
  return b;
}

std::vector<std::vector<double>> conv_powers(const std::vector<double>& a, int L) {
  const size_t n = a.size();
  std::vector<std::vector<double>> table(L + 1, std::vector<double>(n, 0.0));
  table[0][0] = 1.0;
  for (int l = 0; l < L; ++l)
    for (size_t i = 0; i < n; ++i) {
      const double ai = a[i];
      if (ai == 0.0) continue;
      for (size_t j = 0; i + j < n; ++j) table[l + 1][i + j] += ai * table[l][j];
    }
  return table;
}

double g_series_eval(const TMCoefficients& tc, double t) {
  if (t == 0.0) return tc.a[0] / tc.eps;
  const double u = t / tc.eps;
  const double lu = std::log(u);
  double acc = 0.0;
  for (size_t n = 0; n < tc.a.size(); ++n) {
    if (tc.a[n] == 0.0) continue;
    acc += tc.a[n] * std::exp(n * lu - u - std::lgamma(n + 1.0));
  }
  return acc / tc.eps;
}

namespace {

Complex simpson(double a, double b, Complex fa, Complex fm, Complex fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

Complex integrate_adaptive(const std::function<Complex(double)>& f, double a, double b,
                           Complex fa, Complex fm, Complex fb, Complex whole, double tol,
                           int depth) {
  const double m = 0.5 * (a + b);
  const Complex fl = f(0.5 * (a + m)), fr = f(0.5 * (m + b));
  const Complex left = simpson(a, m, fa, fl, fm);
  const Complex right = simpson(m, b, fm, fr, fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return integrate_adaptive(f, a, m, fa, fl, fm, left, tol / 2.0, depth - 1) +
         integrate_adaptive(f, m, b, fm, fr, fb, right, tol / 2.0, depth - 1);
}

Complex integrate(const std::function<Complex(double)>& f, double a, double b, double tol) {
  // Seed with panels so oscillatory integrands are not missed.
  const int panels = 64;
  Complex acc = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double x0 = a + (b - a) * i / panels;
    const double x1 = a + (b - a) * (i + 1) / panels;
    const Complex f0 = f(x0), f1 = f(x1), fm = f(0.5 * (x0 + x1));
    acc += integrate_adaptive(f, x0, x1, f0, fm, f1, simpson(x0, x1, f0, fm, f1),
                              tol / panels, 28);
  }
  return acc;
}

}  // namespace

double laplace_check(const RatFun& phi, std::span<const double> lambdas, double eps, long N) {
  const RatFun red = reduced_copy(phi);
  const PartialFractions pf = partial_fractions(red);
  require_stable_poles(pf);

  double max_re = -std::numeric_limits<double>::infinity();
  double mb = 0.0;
  for (const Root& p : pf.poles()) max_re = std::max(max_re, p.value.real());
  for (const Root& p : pf.poles()) mb = std::max(mb, std::abs(eps * p.value + 1.0));
  double amp_sum = 0.0;
  int kmax = 1;
  for (const PFTerm& t : pf.terms) {
    amp_sum += std::abs(t.coeff);
    kmax = std::max(kmax, t.order);
  }

  double worst = 0.0;
  for (double lambda : lambdas) {
    const Complex target = rat_eval(red, lambda);
    const double scale = std::max(std::abs(target), 1e-12);
    const double delta = lambda - max_re;
    if (delta <= 0.0) throw PoleInRightHalfPlane("sample point does not dominate the poles");

    // Quadrature path: cut where the integrand envelope falls below 1e-14 * scale.
    double T = 50.0 / delta;
    auto tail_bound = [&](double T0) {
      double poly = 1.0;
      for (int i = 1; i < kmax; ++i) poly *= T0 / i;
      return amp_sum * std::max(poly, 1.0) * std::exp(-delta * T0) / delta;
    };
    while (tail_bound(T) > 1e-14 * scale && T < 1e5) T *= 1.5;
    const Complex quad = integrate(
        [&](double t) { return std::exp(-lambda * t) * inverse_laplace_eval(pf, t); }, 0.0, T,
        1e-13 * scale);
    worst = std::max(worst, std::abs(quad - target) / scale);

    // Series path: extend the truncation until the geometric tail is negligible.
    const double denom_abs = std::abs(1.0 + eps * lambda);
    long Nuse = N;
    if (mb / denom_abs < 1.0) {
      const double need =
          std::log(1e-13) / std::log(mb / denom_abs);
      Nuse = std::min<long>(1000000, std::max<long>(N, static_cast<long>(need) + 1));
    }
    const TMCoefficients tc = tm_coeffs(red, eps, Nuse);
    Complex series = 0.0;
    const Complex z = 1.0 + eps * lambda;
    Complex zp = z;
    for (size_t n = 0; n < tc.a.size(); ++n) {
      series += tc.a[n] / zp;
      zp *= z;
    }
    worst = std::max(worst, std::abs(series - target) / scale);
  }
  return worst;
}

}  // namespace spatinv
