// Command-line front end: hypothesis reports, spectra, decay-curve
// simulation, rate fitting, averaging diagnostics, and the built-in
// verification suite. Emits CSV for curves and JSON for structured reports;
// output is deterministic for a fixed configuration and seed.

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spatinv/acceptance.hpp"
#include "spatinv/charfun.hpp"
#include "spatinv/errors.hpp"
#include "spatinv/models.hpp"
#include "spatinv/monotone.hpp"
#include "spatinv/ratfun.hpp"
#include "spatinv/semigroup.hpp"
#include "spatinv/spectra.hpp"
#include "spatinv/types.hpp"

namespace {

using nlohmann::json;
using namespace spatinv;

std::string g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Full-token double parse that accepts gradual underflow: curve files contain
// legitimate subnormal norms, which std::stod reports as out-of-range.
double parse_csv_double(const std::string& s) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw BadModel("bad number '" + s + "'");
  if (errno == ERANGE && std::abs(v) >= 1.0)
    throw BadModel("number out of range '" + s + "'");
  return v;
}

// ---------------------------------------------------------------- options --

struct ModelOptions {
  std::string model;
  std::string params;
  std::string file;
};

void add_model_flags(CLI::App* cmd, ModelOptions& mo) {
  auto* m = cmd->add_option("--model", mo.model,
                            "built-in system: robot | platoon | platoon_from_zeros | "
                            "platoon_pair | cascade");
  auto* f = cmd->add_option("--file", mo.file, "JSON system description");
  cmd->add_option("--params", mo.params, "comma-separated model parameters");
  m->excludes(f);
}

std::vector<double> parse_params(const std::string& s) {
  std::vector<double> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw BadModel("bad parameter '" + tok + "'");
    }
    if (used != tok.size()) throw BadModel("bad parameter '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

SystemPair resolve_model(const ModelOptions& mo) {
  if (!mo.file.empty()) return load_system(mo.file);
  if (mo.model.empty()) throw BadModel("one of --model / --file is required");
  return build_model(mo.model, parse_params(mo.params));
}

std::vector<int> parse_N_list(const std::string& s) {
  std::vector<int> Ns;
  const size_t dots = s.find("..");
  try {
    if (dots != std::string::npos) {
      const int lo = std::stoi(s.substr(0, dots));
      const int hi = std::stoi(s.substr(dots + 2));
      if (lo < 2 || hi < lo) throw BadModel("bad --N range '" + s + "'");
      for (int N = lo; N <= hi; N *= 2) Ns.push_back(N);
      return Ns;
    }
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      const int N = std::stoi(tok);
      if (N < 2) throw BadModel("--N entries must be >= 2");
      Ns.push_back(N);
    }
  } catch (const std::invalid_argument&) {
    throw BadModel("bad --N value '" + s + "'");
  }
  if (Ns.empty()) throw BadModel("empty --N list");
  return Ns;
}

struct TGridSpec {
  double lo = 1.0, hi = 1e4;
  int per_decade = 40;
};

TGridSpec parse_t_spec(const std::string& s) {
  TGridSpec g;
  if (s.empty()) return g;
  std::stringstream ss(s);
  std::string a, b, c;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c, ':'))
    throw BadModel("--t expects lo:hi:per_decade");
  try {
    g.lo = std::stod(a);
    g.hi = std::stod(b);
    g.per_decade = std::stoi(c);
  } catch (const std::exception&) {
    throw BadModel("bad --t range '" + s + "'");
  }
  if (!(g.lo > 0) || g.hi < g.lo || g.per_decade < 1) throw BadModel("bad --t range");
  return g;
}

double parse_rk_tol(const std::vector<std::string>& kvs) {
  double rk = 1e-10;
  for (const std::string& kv : kvs) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) throw BadModel("--tol expects NAME=VAL, got '" + kv + "'");
    const std::string name = kv.substr(0, eq);
    if (name != "rk") throw BadModel("unknown tolerance '" + name + "' (known: rk)");
    try {
      rk = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw BadModel("bad tolerance value in '" + kv + "'");
    }
    if (!(rk > 0)) throw BadModel("tolerance must be positive");
  }
  return rk;
}

PNorm parse_p(const std::string& s) {
  if (s == "1") return PNorm::One;
  if (s == "2") return PNorm::Two;
  if (s == "inf") return PNorm::Inf;
  throw BadModel("--p must be 1, 2 or inf");
}

Kind parse_kind(const std::string& s) {
  if (s == "onesided") return Kind::Onesided;
  if (s == "circulant") return Kind::Circulant;
  if (s == "laurent") return Kind::Laurent;
  throw BadModel("--kind must be onesided, circulant or laurent");
}

struct OutStream {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit OutStream(const std::string& path) {
    if (path.empty()) return;
    file.open(path);
    if (!file) throw IoError("cannot open '" + path + "' for writing");
    os = &file;
  }
  std::ostream& get() { return *os; }
};

// ----------------------------------------------------------------- output --

json poly_json(const Poly& p) {
  json arr = json::array();
  for (const Complex& cc : p.coeffs()) arr.push_back({cc.real(), cc.imag()});
  return arr;
}

using KV = std::vector<std::pair<std::string, std::string>>;

void write_csv_config(std::ostream& os, const KV& kv) {
  os << "# spatinv " << kVersion << "\n#";
  for (const auto& [k, v] : kv) os << " " << k << "=" << v;
  os << "\n";
}

json config_json(const KV& kv) {
  json cfg;
  cfg["tool"] = "spatinv";
  cfg["version"] = kVersion;
  for (const auto& [k, v] : kv) cfg[k] = v;
  return cfg;
}

std::string join_N(const std::vector<int>& Ns) {
  std::string s;
  for (size_t i = 0; i < Ns.size(); ++i) s += (i ? "," : "") + std::to_string(Ns[i]);
  return s;
}

void write_curve_rows(std::ostream& os, const DecayCurve& curve) {
  const std::string kind = to_string(curve.kind);
  const std::string p = to_string(curve.p);
  for (const CurvePoint& pt : curve.samples)
    os << g17(pt.t) << "," << g17(pt.lower) << "," << g17(pt.upper) << "," << curve.N
       << "," << p << "," << kind << "\n";
}

// ------------------------------------------------------------- subcommands --

struct AnalyzeArgs {
  ModelOptions mo;
  std::string out;
};

int run_analyze(const AnalyzeArgs& a) {
  const SystemPair sys = resolve_model(a.mo);
  const HypothesisReport rep = hypothesis_check(sys);

  json doc;
  doc["config"] = config_json({{"command", "analyze"}, {"model", sys.label}});
  doc["label"] = sys.label;
  doc["m"] = sys.m;
  doc["phi"] = {{"num", poly_json(sys.phi.num)}, {"den", poly_json(sys.phi.den)}};
  doc["verify_char_residual"] = verify_char(sys);
  doc["hurwitz"] = rep.hurwitz;
  doc["omega_ok"] = rep.omega_ok;
  doc["phi_normalized"] = rep.phi_normalized;
  doc["phi_at_zero_dev"] = rep.phi_at_zero_dev;
  doc["phi_is_p0_ratio"] = rep.phi_is_p0_ratio;
  if (rep.n_phi)
    doc["n_phi"] = *rep.n_phi;
  else
    doc["n_phi"] = nullptr;
  doc["cm"] = to_string(rep.cm);
  doc["tm"] = to_string(rep.tm);
  doc["predicted_rate"] = to_string(rep.predicted_rate);
  doc["eps_max"] = eps_max(sys.phi);
  doc["evidence"] = rep.evidence;

  OutStream out(a.out);
  out.get() << doc.dump(2) << "\n";
  return 0;
}

struct SpectrumArgs {
  ModelOptions mo;
  std::string N_spec = "16";
  std::string out;
};

int run_spectrum(const SpectrumArgs& a) {
  const SystemPair sys = resolve_model(a.mo);
  const std::vector<int> Ns = parse_N_list(a.N_spec);

  OutStream out(a.out);
  std::ostream& os = out.get();
  write_csv_config(os, {{"command", "spectrum"},
                        {"model", sys.label},
                        {"N", join_N(Ns)}});
  os << "re,im,tag\n";
  for (Complex z : eigvals(sys.A0))
    os << g17(z.real()) << "," << g17(z.imag()) << ",A0\n";
  for (int N : Ns)
    for (const TaggedEig& te : circulant_spectrum(sys, N))
      os << g17(te.lambda.real()) << "," << g17(te.lambda.imag()) << ",circulant-N"
         << N << "\n";

  double r0 = 0.0;
  for (Complex z : eigvals(sys.A0)) r0 = std::max(r0, std::abs(z));
  const Complex lo(-2.0 * r0 - 1.0, -(2.0 * r0 + 1.0));
  const Complex hi(r0 + 1.0, 2.0 * r0 + 1.0);
  const ContourSet contour = omega_contour(sys.phi, lo, hi);
  for (size_t k = 0; k < contour.polylines.size(); ++k)
    for (Complex z : contour.polylines[k])
      os << g17(z.real()) << "," << g17(z.imag()) << ",contour-" << k << "\n";
  return 0;
}

struct SimulateArgs {
  ModelOptions mo;
  std::string kind = "circulant";
  std::string p = "2";
  std::string N_spec = "4..512";
  std::string t_spec;
  std::vector<std::string> tols;
  std::uint64_t seed = 0;
  bool semigroup_only = false;
  std::string out;
};

int run_simulate(const SimulateArgs& a) {
  const SystemPair sys = resolve_model(a.mo);
  const Kind kind = parse_kind(a.kind);
  const PNorm p = parse_p(a.p);
  const TGridSpec tg = parse_t_spec(a.t_spec);
  const std::vector<double> grid = default_t_grid(tg.lo, tg.hi, tg.per_decade);
  const double rk = parse_rk_tol(a.tols);
  const bool with_gen = !a.semigroup_only;

  OutStream out(a.out);
  std::ostream& os = out.get();

  if (kind == Kind::Laurent) {
    if (p != PNorm::Two) throw BadModel("laurent curves support --p 2 only");
    write_csv_config(os, {{"command", "simulate"},
                          {"model", sys.label},
                          {"kind", "laurent"},
                          {"p", "2"},
                          {"t", g17(tg.lo) + ":" + g17(tg.hi) + ":" +
                                    std::to_string(tg.per_decade)},
                          {"generator", with_gen ? "1" : "0"}});
    os << "t,lower,upper,N,p,kind\n";
    write_curve_rows(os, laurent_decay(sys, grid, with_gen));
    return 0;
  }

  const std::vector<int> Ns = parse_N_list(a.N_spec);
  write_csv_config(os, {{"command", "simulate"},
                        {"model", sys.label},
                        {"kind", a.kind},
                        {"p", a.p},
                        {"N", join_N(Ns)},
                        {"t", g17(tg.lo) + ":" + g17(tg.hi) + ":" +
                                  std::to_string(tg.per_decade)},
                        {"seed", std::to_string(a.seed)},
                        {"generator", with_gen ? "1" : "0"},
                        {"rk", g17(rk)}});
  os << "t,lower,upper,N,p,kind\n";
  for (int N : Ns)
    write_curve_rows(os, decay_curve(sys, kind, N, p, grid, with_gen, a.seed, rk));
  if (Ns.size() > 1)
    write_curve_rows(os, sup_over_N(sys, kind, Ns, p, grid, with_gen, a.seed, rk));
  return 0;
}

struct FitArgs {
  std::string in;
  double t_lo = 1e2;
  double t_hi = 1e4;
  bool with_log = false;
  int select_N = -1;  // -1: sup rows if present, else the unique N
  std::string out;
};

int run_fit(const FitArgs& a) {
  std::ifstream in(a.in);
  if (!in) throw IoError("cannot open '" + a.in + "' for reading");
  std::string line;
  bool header_seen = false;
  std::map<int, DecayCurve> curves;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "t,lower,upper,N,p,kind")
        throw BadModel("'" + a.in + "': expected header t,lower,upper,N,p,kind");
      header_seen = true;
      continue;
    }
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> cells;
    while (std::getline(ss, tok, ',')) cells.push_back(tok);
    if (cells.size() != 6) throw BadModel("'" + a.in + "': malformed row '" + line + "'");
    CurvePoint pt;
    int N = 0;
    try {
      pt.t = parse_csv_double(cells[0]);
      pt.lower = parse_csv_double(cells[1]);
      pt.upper = parse_csv_double(cells[2]);
      N = std::stoi(cells[3]);
    } catch (const std::exception&) {
      throw BadModel("'" + a.in + "': malformed row '" + line + "'");
    }
    DecayCurve& c = curves[N];
    c.N = N;
    c.p = parse_p(cells[4]);
    c.kind = parse_kind(cells[5]);
    c.samples.push_back(pt);
  }
  if (curves.empty()) throw BadModel("'" + a.in + "': no data rows");

  int N = a.select_N;
  if (N < 0) {
    if (curves.count(0)) {
      N = 0;
    } else if (curves.size() == 1) {
      N = curves.begin()->first;
    } else {
      throw BadModel("'" + a.in + "': several N present; pick one with --N");
    }
  }
  if (!curves.count(N)) throw BadModel("no rows with N = " + std::to_string(N));

  const RateFit fit = fit_rate(curves[N], a.t_lo, a.t_hi, a.with_log);
  json doc;
  doc["config"] = config_json({{"command", "fit"},
                               {"input", a.in},
                               {"N", std::to_string(N)},
                               {"t_lo", g17(a.t_lo)},
                               {"t_hi", g17(a.t_hi)},
                               {"with_log", a.with_log ? "1" : "0"}});
  doc["alpha"] = fit.alpha;
  doc["beta"] = fit.beta;
  doc["residual"] = fit.residual;
  doc["samples"] = curves[N].samples.size();
  OutStream out(a.out);
  out.get() << doc.dump(2) << "\n";
  return 0;
}

struct CesaroArgs {
  ModelOptions mo;
  std::string p = "2";
  std::string x0 = "zero-mean";
  int blocks = 4;
  int n_max = 400;
  std::uint64_t seed = 0;
  std::string out;
};

int run_cesaro(const CesaroArgs& a) {
  const SystemPair sys = resolve_model(a.mo);
  const PNorm p = parse_p(a.p);
  if (a.n_max < 1 || a.blocks < 1) throw BadModel("--n-max and --blocks must be positive");

  std::vector<CVector> x0;
  if (a.x0 == "unit") {
    x0 = {CVector::Unit(sys.m, 0)};
  } else if (a.x0 == "difference") {
    x0 = {CVector::Unit(sys.m, 0), -CVector::Unit(sys.m, 0)};
  } else if (a.x0 == "zero-mean") {
    std::mt19937_64 rng(a.seed ^ 0x5eed5eed5eed5eedull);
    std::normal_distribution<double> gauss;
    for (int k = 0; k < a.blocks; ++k) {
      CVector v(sys.m);
      for (int i = 0; i < sys.m; ++i) v(i) = Complex(gauss(rng), gauss(rng));
      x0.push_back(v);
    }
    Complex mean = 0.0;
    for (const CVector& b : x0) mean += b(0);
    mean /= static_cast<double>(x0.size());
    for (CVector& b : x0) b(0) -= mean;
  } else {
    throw BadModel("--x0 must be unit, difference or zero-mean");
  }

  const CesaroResult res = cesaro_norms(sys, x0, p, a.n_max);
  OutStream out(a.out);
  std::ostream& os = out.get();
  write_csv_config(os, {{"command", "cesaro"},
                        {"model", sys.label},
                        {"p", a.p},
                        {"x0", a.x0},
                        {"blocks", std::to_string(static_cast<int>(x0.size()))},
                        {"n_max", std::to_string(a.n_max)},
                        {"seed", std::to_string(a.seed)}});
  os << "# classification=" << to_string(res.classification)
     << " exponent=" << g17(res.exponent) << "\n";
  os << "t,lower,upper,N,p,kind\n";
  for (size_t n = 1; n <= res.norms.size(); ++n)
    os << g17(static_cast<double>(n)) << "," << g17(res.norms[n - 1]) << ","
       << g17(res.norms[n - 1]) << ",0," << a.p << ",cesaro\n";
  return 0;
}

struct VerifyArgs {
  std::string out;
};

int run_verify(const VerifyArgs& a) {
  const std::vector<CriterionResult> results = run_acceptance(&std::cout);
  int passed = 0;
  for (const CriterionResult& r : results) passed += r.pass ? 1 : 0;
  std::cout << passed << "/" << results.size() << " criteria passed\n";
  if (!a.out.empty()) {
    json arr = json::array();
    for (const CriterionResult& r : results)
      arr.push_back({{"id", r.id},
                     {"name", r.name},
                     {"pass", r.pass},
                     {"detail", r.detail},
                     {"seconds", r.seconds}});
    json doc;
    doc["config"] = config_json({{"command", "verify"}});
    doc["results"] = arr;
    OutStream out(a.out);
    out.get() << doc.dump(2) << "\n";
  }
  return all_pass(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatially invariant chain toolkit: characteristic functions, "
               "monotonicity certificates, truncation spectra and decay curves"};
  app.require_subcommand(1);

  AnalyzeArgs an;
  auto* c_an = app.add_subcommand("analyze", "hypothesis report for one system (JSON)");
  add_model_flags(c_an, an.mo);
  c_an->add_option("--out", an.out, "output path (default stdout)");

  SpectrumArgs sp;
  auto* c_sp = app.add_subcommand("spectrum",
                                  "base spectrum, circulant spectra and level contour (CSV)");
  add_model_flags(c_sp, sp.mo);
  c_sp->add_option("--N", sp.N_spec, "truncation sizes: list 4,8,16 or doubling range 4..64");
  c_sp->add_option("--out", sp.out, "output path (default stdout)");

  SimulateArgs si;
  auto* c_si = app.add_subcommand("simulate", "norm decay curves (CSV)");
  add_model_flags(c_si, si.mo);
  c_si->add_option("--kind", si.kind, "onesided | circulant | laurent");
  c_si->add_option("--p", si.p, "1 | 2 | inf");
  c_si->add_option("--N", si.N_spec, "truncation sizes: list or doubling range");
  c_si->add_option("--t", si.t_spec, "time grid lo:hi:per_decade (default 1:10000:40)");
  c_si->add_option("--tol", si.tols, "tolerance override NAME=VAL (known: rk)");
  c_si->add_option("--seed", si.seed, "seed for norm probe vectors");
  c_si->add_flag("--semigroup-only", si.semigroup_only,
                 "norms of exp(tA_N) instead of A_N exp(tA_N)");
  c_si->add_option("--out", si.out, "output path (default stdout)");

  FitArgs fi;
  auto* c_fi = app.add_subcommand("fit", "power-law fit of a simulated curve (JSON)");
  c_fi->add_option("input", fi.in, "curve CSV from simulate")->required();
  c_fi->add_option("--t-lo", fi.t_lo, "fit window lower end (default 100)");
  c_fi->add_option("--t-hi", fi.t_hi, "fit window upper end (default 10000)");
  c_fi->add_flag("--with-log", fi.with_log, "include a log-log basis column");
  c_fi->add_option("--N", fi.select_N, "fit the rows with this N (default: sup rows)");
  c_fi->add_option("--out", fi.out, "output path (default stdout)");

  CesaroArgs ce;
  auto* c_ce = app.add_subcommand("cesaro", "averaged-orbit norm sequence (CSV)");
  add_model_flags(c_ce, ce.mo);
  c_ce->add_option("--p", ce.p, "1 | 2 | inf");
  c_ce->add_option("--x0", ce.x0, "initial data: unit | difference | zero-mean");
  c_ce->add_option("--blocks", ce.blocks, "number of random blocks for zero-mean");
  c_ce->add_option("--n-max", ce.n_max, "number of averaging steps");
  c_ce->add_option("--seed", ce.seed, "seed for random initial data");
  c_ce->add_option("--out", ce.out, "output path (default stdout)");

  VerifyArgs ve;
  auto* c_ve = app.add_subcommand("verify", "run the built-in verification suite");
  c_ve->add_option("--out", ve.out, "also write results as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (c_an->parsed()) return run_analyze(an);
    if (c_sp->parsed()) return run_spectrum(sp);
    if (c_si->parsed()) return run_simulate(si);
    if (c_fi->parsed()) return run_fit(fi);
    if (c_ce->parsed()) return run_cesaro(ce);
    if (c_ve->parsed()) return run_verify(ve);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
