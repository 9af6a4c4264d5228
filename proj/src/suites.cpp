#include "numcyc/suites.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "numcyc/errors.hpp"

namespace numcyc {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(double x) {
  std::ostringstream o;
  o.precision(6);
  o << x;
  return o.str();
}

struct Timer {
  Clock::time_point t0 = Clock::now();
  double secs() const { return std::chrono::duration<double>(Clock::now() - t0).count(); }
};

// Counts passes of a family of assertions and keeps the first failure.
struct Tally {
  explicit Tally(std::string n) : name(std::move(n)) {}
  std::string name;
  long pass = 0, fail = 0;
  std::string first;
  void operator()(bool ok, const std::string& why) {
    if (ok) {
      ++pass;
    } else {
      if (fail == 0) first = why;
      ++fail;
    }
  }
  void into(SuiteReport& r) const {
    r.add(name, fail == 0 && pass > 0,
          std::to_string(pass) + " passed" + (fail ? ", " + std::to_string(fail) + " failed; first: " + first : ""));
  }
};

FunnyParams funny_params(int p, int K, const std::string& kind) {
  FunnyParams fp;
  fp.p = p;
  fp.K = K;
  fp.w.kind = kind;
  fp.w.value = QComplex{1, 0};
  return fp;
}

std::uint64_t splitmix(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform(std::uint64_t& s) { return static_cast<double>(splitmix(s) >> 11) * 0x1.0p-53; }

ExactEntry ent(Rat r, const Angle& a) { return ExactEntry(std::move(r), a); }

ExactDiagonal diag(std::vector<ExactEntry> e) {
  ExactDiagonal d;
  d.entries = std::move(e);
  return d;
}

WeightedShift backward(const std::string& type, double a, double b = 0) {
  WeightedShift s;
  s.kind = ShiftKind::Backward;
  s.weights.type = type;
  if (type == "constant") s.weights.value = a;
  s.weights.a = a;
  s.weights.b = b;
  s.bound = s.weights.bound();
  return s;
}

}  // namespace

void SuiteReport::add(const std::string& name, bool pass, const std::string& detail) {
  checks.push_back({name, pass, detail});
  ok = ok && pass;
}

long SuiteReport::failures() const {
  long f = 0;
  for (const auto& c : checks) f += !c.ok;
  return f;
}

json to_json(const SuiteReport& r) {
  json cs = json::array();
  for (const auto& c : r.checks) cs.push_back({{"name", c.name}, {"ok", c.ok}, {"detail", c.detail}});
  return json{{"schema_version", kSchemaVersion}, {"suite", r.suite}, {"ok", r.ok}, {"seconds", r.seconds}, {"checks", cs}, {"data", r.data}};
}

void log_abs_bounds(const OrbitPoint& p, double& lo, double& hi) {
  const double inf = std::numeric_limits<double>::infinity();
  if (p.scaled) {
    const ScaledReal& m = p.scaled->mag;
    if (m.is_zero()) {
      lo = -inf;
      hi = -inf;
      return;
    }
    if (!m.expo.is_literal()) throw PrecisionUnreachable("log of a value with a symbolic exponent");
    double base = m.log_base() * std::log(static_cast<double>(m.base));
    double ph = std::abs(p.scaled->phase.center());
    double pr = p.scaled->phase.rad;
    // a few ulps of slack for the double evaluation of the logs
    double slack = 1e-13 * std::max(1.0, std::fabs(base));
    lo = base + (ph > pr ? std::log(ph - pr) : -inf) + (m.err < 1 ? std::log1p(-m.err) : -inf) - slack;
    hi = base + std::log(ph + pr) + std::log1p(m.err) + slack;
    return;
  }
  double a = std::abs(p.value.center());
  double r = p.value.rad;
  double slack = 4 * std::numeric_limits<double>::epsilon() * a;
  lo = a > r + slack ? std::log(a - r - slack) : -inf;
  hi = std::log(a + r + slack);
}

// ---- funny numbers ----

SuiteReport suite_funny(const std::vector<int>& primes, int K) {
  Timer t;
  SuiteReport r;
  r.suite = "funny";
  for (int p : primes) {
    for (const char* kind : {"constant", "spiral"}) {
      FunnyArtifacts a = build(funny_params(p, K, kind));
      std::string tag = "p=" + std::to_string(p) + " w=" + kind;
      Tally odd{tag + ": N_k odd"}, pn{tag + ": p does not divide N_k"}, mk{tag + ": m_k even, p does not divide m_k"},
          band{tag + ": 0 <= m_k - |w_{k-1}| p^{k-1}/pi < 4"};
      for (int k = 1; k <= K; ++k) {
        auto uk = static_cast<std::size_t>(k);
        std::string at = "k=" + std::to_string(k);
        odd(a.N_mod2[uk] == 1, at);
        pn(a.N_modp[uk] != 0, at);
        if (a.N[uk]) {
          const Int& N = *a.N[uk];
          odd(N % 2 != 0, at + " literal");
          pn(N % p != 0 && N % p == a.N_modp[uk], at + " literal");
        }
      }
      mk(a.m[1] == 1, "m_1 != 1");
      json ms = json::array();
      for (int k = 2; k <= K + 1; ++k) {
        auto uk = static_cast<std::size_t>(k);
        const Int& m = a.m[uk];
        mk(m % 2 == 0 && m % p != 0, "k=" + std::to_string(k));
        Real x = a.w[uk - 1].abs(256) * Real::pow_int(p, Int(k - 1), 256) / Real::pi(256);
        Real d = Real::from_int(m, 256) - x;
        band(d.sign() >= 0 && d < 4.0, "k=" + std::to_string(k) + " gap " + d.str(8));
        ms.push_back(m.get_str());
      }
      odd.into(r);
      pn.into(r);
      mk.into(r);
      band.into(r);
      r.data[tag] = {{"m", ms}, {"nu_2", a.nu(2).str()}, {"e_3", a.e[3].str()}};
    }
  }
  r.seconds = t.secs();
  return r;
}

SuiteReport suite_linuk(int p, int k_max) {
  Timer t;
  SuiteReport r;
  r.suite = "linuk";
  FunnyArtifacts a = build(funny_params(p, k_max, "constant"));
  json rows = json::array();
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= k_max; ++k) {
    LinukReport l = verify_linuk(a, k);
    double d = l.delta.to_double();
    r.add("k=" + std::to_string(k) + ": |delta_k| <= 4 pi p^-k + tail", l.ok && std::fabs(d) <= l.bound,
          "delta " + fmt(d) + " bound " + fmt(l.bound));
    r.add("k=" + std::to_string(k) + ": bound decreasing", l.bound < prev, fmt(l.bound));
    prev = l.bound;
    rows.push_back({{"k", k}, {"delta", l.delta.str(17)}, {"delta_err", l.delta_err}, {"leading", l.leading.str(17)},
                    {"tail", l.tail}, {"bound", l.bound}});
  }
  r.data["deltas"] = rows;
  r.seconds = t.secs();
  return r;
}

SuiteReport suite_linuk11(int p, int k_max) {
  Timer t;
  SuiteReport r;
  r.suite = "linuk11";
  json rows = json::array();
  for (const char* kind : {"constant", "spiral"}) {
    FunnyArtifacts a = build(funny_params(p, k_max, kind));
    for (int k = 1; k <= k_max; ++k) {
      Linuk11Report u = verify_linuk11(a, k);
      Linuk11Report root = verify_linuk11(a, k, 1e-20, true);
      std::string tag = std::string("w=") + kind + " k=" + std::to_string(k);
      r.add(tag + ": |u^nu p^nu (1 + z^nu) - w_k| <= bound", u.ok, fmt(std::abs(u.value.center())) + " vs " + fmt(u.bound));
      r.add(tag + ": same with the root of unity", root.ok, fmt(std::abs(root.value.center())) + " vs " + fmt(root.bound));
      rows.push_back({{"w", kind}, {"k", k}, {"value", complex_to_json(u.value.center())}, {"bound", u.bound}});
    }
  }
  r.data["rows"] = rows;
  r.seconds = t.secs();
  return r;
}

SuiteReport suite_linnuk(int p, long N) {
  Timer t;
  SuiteReport r;
  r.suite = "linnuk";
  FunnyArtifacts a = build(funny_params(p, 3, "constant"));
  LinnukReport l = scan_linnuk(a, N);
  std::string first = l.violations.empty() ? "" : "first at n=" + std::to_string(l.violations.front());
  r.add("|1 + z^n| >= 1/(2 n^2) outside nu_k and Lambda, n <= " + std::to_string(N), l.violations.empty(),
        std::to_string(l.violations.size()) + " violations " + first);
  r.add("every n accounted for", l.checked + l.excluded_nu + l.in_lambda == N,
        std::to_string(l.checked) + " + " + std::to_string(l.excluded_nu) + " + " + std::to_string(l.in_lambda));
  r.data = {{"N", l.N},
            {"checked", l.checked},
            {"excluded_nu", l.excluded_nu},
            {"in_lambda", l.in_lambda},
            {"violations", l.violations.size()},
            {"min_ratio", l.min_ratio},
            {"argmin", l.argmin},
            {"lambda_min_root", l.lambda_min_root}};
  r.seconds = t.secs();
  return r;
}

// ---- operators of the counterexamples ----

SuiteReport suite_aq1(int k_max, long n_lo, long n_hi) {
  Timer t;
  SuiteReport r;
  r.suite = "aq1";
  FunnyParams fp = funny_params(3, k_max, "spiral");
  FunnyOperator op = make_aq1(fp);
  const FunnyArtifacts& a = op.art[0];
  OrbitOptions opt;
  opt.tol = 1e-15;
  json returns = json::array();
  for (int k = 1; k <= k_max; ++k) {
    auto s = orbit(op.T, op.x0, {a.nu(k)}, opt);
    cplx half = a.w[static_cast<std::size_t>(k)].approx() / 2.0;
    Linuk11Report l = verify_linuk11(a, k);
    double dist = std::abs(s.entries[0].value.center() - half) + s.entries[0].value.rad;
    r.add("k=" + std::to_string(k) + ": |<T^nu_k x0, x0> - w_k/2| <= bound", l.ok && dist <= l.bound / 2,
          fmt(dist) + " vs " + fmt(l.bound / 2));
    returns.push_back({{"k", k}, {"nu", a.nu(k).str()}, {"value", complex_to_json(s.entries[0].value.center())},
                       {"target", complex_to_json(half)}, {"distance", dist}, {"bound", l.bound / 2}});
  }
  // <(T^2)^n x0, x0> = <T^{2n} x0, x0>
  std::vector<Index> idx;
  for (long n = n_lo; n <= n_hi; ++n) idx.emplace_back(2 * n);
  opt.tol = 1e-12;
  auto s = orbit(op.T, op.x0, idx, opt);
  Tally esc{"|<(T^2)^n x0, x0>| >= 3^{2n}/(16 n^2), " + std::to_string(n_lo) + " <= n <= " + std::to_string(n_hi)};
  double worst = std::numeric_limits<double>::infinity();
  long worst_n = 0;
  for (std::size_t i = 0; i < s.entries.size(); ++i) {
    long n = n_lo + static_cast<long>(i);
    double lo = 0, hi = 0;
    log_abs_bounds(s.entries[i], lo, hi);
    double want = 2.0 * static_cast<double>(n) * std::log(3.0) - std::log(16.0) - 2 * std::log(static_cast<double>(n));
    esc(lo >= want, "n=" + std::to_string(n));
    if (lo - want < worst) {
      worst = lo - want;
      worst_n = n;
    }
  }
  esc.into(r);
  r.data = {{"returns", returns}, {"escape_min_log_margin", worst}, {"escape_argmin", worst_n}};
  r.seconds = t.secs();
  return r;
}

SuiteReport suite_aq2(int p, int q, int k_max, long N) {
  Timer t;
  SuiteReport r;
  r.suite = "aq2";
  Aq2Operator op = make_aq2(p, q, k_max);
  OrbitOptions opt;
  opt.tol = 1e-15;
  json returns = json::array();
  for (int k = 1; k <= k_max; ++k) {
    for (int side = 0; side < 2; ++side) {
      const FunnyArtifacts& a = side ? op.art_q : op.art_p;
      const DualPair& x = side ? op.y : op.x;
      auto s = orbit(op.T, x, {a.nu(k)}, opt);
      cplx half = a.w[static_cast<std::size_t>(k)].approx() / 2.0;
      Linuk11Report l = verify_linuk11(a, k);
      double dist = std::abs(s.entries[0].value.center() - half) + s.entries[0].value.rad;
      std::string tag = std::string(side ? "y" : "x") + " k=" + std::to_string(k);
      r.add(tag + ": return near w_k/2", l.ok && dist <= l.bound / 2, fmt(dist) + " vs " + fmt(l.bound / 2));
      returns.push_back({{"pair", side ? "y" : "x"}, {"k", k}, {"distance", dist}, {"bound", l.bound / 2}});
    }
  }
  // Case 1: |a|^2 != |b|^2, so |<T^n v, v>| >= ||a|^2 - |b|^2| p^n - (|c|^2 + |d|^2) q^n
  const std::vector<std::vector<Rat>> cases{{Rat(1, 2), Rat(1, 6), Rat(1, 6), Rat(1, 6)},
                                            {Rat(1, 8), Rat(3, 8), Rat(1, 4), Rat(1, 4)},
                                            {Rat(3, 5), Rat(1, 5), Rat(1, 10), Rat(1, 10)}};
  opt.tol = 1e-12;
  json rates = json::array();
  for (const auto& c : cases) {
    DualPair v = pair_from_weights(c);
    auto s = orbit_range(op.T, v, 0, N, opt);
    double D = std::fabs(Rat(c[0] - c[1]).get_d());
    double rest = Rat(c[2] + c[3]).get_d();
    std::string tag = "case 1 weights (" + c[0].get_str() + ", " + c[1].get_str() + ", " + c[2].get_str() + ", " +
                      c[3].get_str() + ")";
    Tally lb{tag + ": certified escape for n <= " + std::to_string(N)};
    for (const auto& pt : s.entries) {
      long n = pt.n.literal().get_si();
      double lo = 0, hi = 0;
      log_abs_bounds(pt, lo, hi);
      // log(D p^n - rest q^n) when positive
      double lp = static_cast<double>(n) * std::log(static_cast<double>(p));
      double ratio = rest / D * std::pow(static_cast<double>(q) / p, static_cast<double>(n));
      if (ratio >= 1) continue;
      double want = std::log(D) + lp + std::log1p(-ratio);
      lb(lo >= want - 1e-12 * std::max(1.0, want), "n=" + std::to_string(n));
    }
    lb.into(r);
    double lo = 0, hi = 0;
    log_abs_bounds(s.entries.back(), lo, hi);
    double rate = lo / static_cast<double>(N);
    double lp = std::log(static_cast<double>(p));
    r.add(tag + ": rate log|v_N| / N -> log p", std::fabs(rate - lp) <= (std::fabs(std::log(D)) + 1) / static_cast<double>(N),
          "rate " + fmt(rate) + " vs " + fmt(lp));
    rates.push_back({{"weights", {c[0].get_str(), c[1].get_str(), c[2].get_str(), c[3].get_str()}}, {"rate", rate}});
  }
  r.data = {{"returns", returns}, {"case1", rates}};
  r.seconds = t.secs();
  return r;
}

// ---- witnesses ----

SuiteReport suite_arcsin(long samples, std::uint64_t seed) {
  Timer t;
  SuiteReport r;
  r.suite = "arcsin";
  json rows = json::array();
  std::uint64_t s = seed;
  for (long n : {1L, 5L}) {
    for (double c : {0.5, 1.0, std::sqrt(2.0)}) {
      ArcsinReport a = arcsin_mc(n, c, samples, s++);
      r.add("n=" + std::to_string(n) + " c=" + fmt(c) + ": within 3 standard errors", a.ok,
            fmt(a.empirical) + " vs " + fmt(a.expected) + " (sigma " + fmt(a.sigma) + ")");
      rows.push_back({{"n", n}, {"c", c}, {"empirical", a.empirical}, {"expected", a.expected}, {"sigma", a.sigma}});
    }
    ArcsinReport full = arcsin_mc(n, 2.0, samples, s++);
    r.add("n=" + std::to_string(n) + " c=2: measure exactly 1", full.empirical == 1.0, fmt(full.empirical));
  }
  r.data["rows"] = rows;
  r.seconds = t.secs();
  return r;
}

SuiteReport suite_penta(long trials, long calibration_samples, std::uint64_t seed) {
  Timer t;
  SuiteReport r;
  r.suite = "penta";
  double c = 0, rad = 0;
  penta_det(c, rad);
  r.add("determinant certified nonzero", std::fabs(c) > rad, fmt(c) + " +- " + fmt(rad));
  PentaCalibration cal = penta_calibrate(calibration_samples, seed);
  r.add("calibrated region nonempty", cal.epsilon > 0 && cal.d > 0, "eps " + fmt(cal.epsilon) + " d " + fmt(cal.d));
  Tally pos{"weights positive"}, sum{"weights sum to 1 within 1e-10"}, cz{"sum a_j u_j = z within 1e-10"},
      cw{"sum a_j u_{5+j} = w within 1e-10"};
  std::uint64_t st = seed * 7919 + 1;
  double worst = 0;
  for (long i = 0; i < trials; ++i) {
    Penta10 u;
    cplx z, w;
    penta_sample(st, cal.epsilon, cal.d / 2, u, z, w);
    auto a = penta_solve(u, z, w, cal);
    double s = 0;
    cplx sz = 0, sw = 0;
    bool positive = true;
    for (std::size_t j = 0; j < 5; ++j) {
      positive = positive && a[j] > 0;
      s += a[j];
      sz += a[j] * u[j];
      sw += a[j] * u[5 + j];
    }
    std::string at = "trial " + std::to_string(i);
    pos(positive, at);
    sum(std::fabs(s - 1) <= 1e-10, at);
    cz(std::abs(sz - z) <= 1e-10, at);
    cw(std::abs(sw - w) <= 1e-10, at);
    worst = std::max({worst, std::fabs(s - 1), std::abs(sz - z), std::abs(sw - w)});
  }
  pos.into(r);
  sum.into(r);
  cz.into(r);
  cw.into(r);
  r.data = {{"calibration", penta_to_json(cal)}, {"trials", trials}, {"worst_residual", worst}};
  r.seconds = t.secs();
  return r;
}

SuiteReport suite_steer(long R, double eps) {
  Timer t;
  SuiteReport r;
  r.suite = "torus_steer";
  RadiusSchedule sched;
  sched.R = R;
  auto targets = grid_targets(5, 4, 5.0, eps);
  r.add("20 grid targets inside the disk of radius 5", targets.size() == 20, std::to_string(targets.size()));
  SteeringResult s = torus_steer(sched, "znwn", targets);
  std::vector<double> res = replay(s);
  Tally rep{"exact replay residual <= " + fmt(eps)};
  for (std::size_t j = 0; j < res.size(); ++j) rep(res[j] <= eps, "target " + std::to_string(j) + ": " + fmt(res[j]));
  rep.into(r);
  r.add("one hit per target", s.hits.size() == targets.size() && res.size() == targets.size(), std::to_string(res.size()));
  r.data = steering_to_json(s, res);
  r.seconds = t.secs();
  return r;
}

SuiteReport suite_ddiaa(int count, double tol, std::uint64_t seed) {
  Timer t;
  SuiteReport r;
  r.suite = "ddiaa";
  std::uint64_t st = seed;
  std::vector<cplx> ys;
  std::vector<double> ds;
  for (int j = 0; j < count; ++j) {
    double re = -5 + 10 * uniform(st);
    double im = -5 + 10 * uniform(st);
    ys.emplace_back(re, im);
    ds.push_back(std::ldexp(0.1, -j));
  }
  RadiusSchedule sched;
  DdiaaState s = ddiaa_build(ys, ds, sched, tol);
  auto v = ddiaa_replay(s);
  Tally rep{"certificates replay within " + fmt(tol)}, zero{"zero-sum exponents cancel exactly"},
      step{"omega added per step <= 5 sqrt(delta_j)"};
  double budget = 0;
  for (std::size_t j = 0; j < static_cast<std::size_t>(count) && j < v.size(); ++j) {
    double d = std::abs(v[j].center() - ys[j]) + v[j].rad;
    rep(d <= tol, "target " + std::to_string(j) + ": " + fmt(d));
    zero(ddiaa_zero_check(s, j).mag.is_zero(), "step " + std::to_string(j));
    budget += 5 * std::sqrt(ds[j]);
    step(s.certificates[j].omega_added <= 5 * std::sqrt(ds[j]), "step " + std::to_string(j));
  }
  r.add("one certificate per target", v.size() == static_cast<std::size_t>(count), std::to_string(v.size()));
  rep.into(r);
  zero.into(r);
  step.into(r);
  r.add("total omega within budget", s.omega_mass() <= budget, fmt(s.omega_mass()) + " <= " + fmt(budget));
  r.data = ddiaa_to_json(s, v);
  r.seconds = t.secs();
  return r;
}

// ---- classifier ----

std::vector<std::string> example_names() {
  return {"nh_c2",      "snh_c3",        "nh_c4",      "diag_3_2",  "power_bounded_logs", "power_bounded_mixed",
          "shift_2",    "shift_1",       "shift_harmonic", "clos_2_half", "clos_2_2",     "clos_half_third"};
}

OperatorSpec named_example(const std::string& name) {
  const Angle zero(Rat(0));
  if (name == "nh_c2") {
    std::vector<ExactEntry> e(4);
    e[0] = ent(2, Angle::symbolic("log2"));
    e[1] = ent(1, zero);
    e[3] = ent(2, Angle::symbolic("log3"));
    return DenseMatrix::from_exact(2, e);
  }
  if (name == "snh_c3") {
    return diag({ent(2, Angle::symbolic("log2")), ent(2, Angle::symbolic("log3")), ent(2, Angle::symbolic("log5"))});
  }
  if (name == "nh_c4") {
    std::vector<ExactEntry> e(16);
    e[0] = ent(1, Angle::symbolic("log2"));
    e[1] = ent(1, zero);
    e[5] = ent(1, Angle::symbolic("log2"));
    e[10] = ent(1, Angle::symbolic("log3"));
    e[11] = ent(1, zero);
    e[15] = ent(1, Angle::symbolic("log3"));
    return DenseMatrix::from_exact(4, e);
  }
  if (name == "diag_3_2") return diag({ent(3, zero), ent(2, zero)});
  if (name == "power_bounded_logs") return diag({ent(1, Angle::symbolic("log2")), ent(1, Angle::symbolic("log3"))});
  if (name == "power_bounded_mixed") return diag({ent(Rat(1, 2), zero), ent(1, Angle::symbolic("sqrt2"))});
  if (name == "shift_2") return backward("constant", 2);
  if (name == "shift_1") return backward("constant", 1);
  if (name == "shift_harmonic") return backward("harmonic", 1, 1);
  if (name == "clos_2_half") return diag({ent(2, zero), ent(Rat(1, 2), zero)});
  if (name == "clos_2_2") return diag({ent(2, zero), ent(2, zero)});
  if (name == "clos_half_third") return diag({ent(Rat(1, 2), zero), ent(Rat(1, 3), zero)});
  throw InvalidInput("unknown example '" + name + "'");
}

SuiteReport suite_battery(const ClassifyConfig& cfg) {
  Timer t;
  SuiteReport r;
  r.suite = "classifier_battery";
  json out = json::array();
  for (const auto& name : example_names()) {
    Classification c = classify(named_example(name), cfg);
    json v = classification_to_json(c);
    v.erase("spectrum");
    out.push_back({{"name", name}, {"verdict", v}});
  }
  r.data = {{"schema_version", kSchemaVersion}, {"battery", out}};
  // determinism: a second pass gives the same document
  json again = json::array();
  for (const auto& name : example_names()) {
    json v = classification_to_json(classify(named_example(name), cfg));
    v.erase("spectrum");
    again.push_back({{"name", name}, {"verdict", v}});
  }
  r.add("deterministic", again == out);
  r.seconds = t.secs();
  return r;
}

SuiteReport compare_golden(const json& produced, const json& golden) {
  SuiteReport r;
  r.suite = "golden";
  std::map<std::string, json> got;
  for (const auto& e : produced.at("battery")) got[e.at("name").get<std::string>()] = e.at("verdict");
  for (const auto& g : golden.at("battery")) {
    std::string name = g.at("name").get<std::string>();
    auto it = got.find(name);
    if (it == got.end()) {
      r.add(name, false, "not produced");
      continue;
    }
    for (auto f = g.at("expect").begin(); f != g.at("expect").end(); ++f) {
      json::json_pointer ptr(f.key());
      bool have = it->second.contains(ptr);
      json val = have ? it->second.at(ptr) : json();
      r.add(name + " " + f.key(), have && val == f.value(),
            "want " + f.value().dump() + " got " + (have ? val.dump() : "nothing"));
    }
  }
  return r;
}

OperatorSpec random_spec(std::uint64_t& s) {
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(splitmix(s) % n); };
  static const char* labels[] = {"log2", "log3", "log5", "log6", "sqrt2", "sqrt3"};
  static const Rat radii[] = {Rat(1, 3), Rat(1, 2), Rat(1), Rat(2), Rat(2), Rat(3), Rat(3, 2)};
  auto angle = [&]() -> Angle {
    switch (pick(3)) {
      case 0: return Angle(Rat(static_cast<long>(pick(12)), 6));
      case 1: return Angle::symbolic(labels[pick(6)]);
      default: return Angle::symbolic(labels[pick(6)]) + Angle(Rat(static_cast<long>(pick(4)), 4));
    }
  };
  std::size_t kind = pick(20);
  if (kind < 10) {
    int n = 1 + static_cast<int>(pick(4));
    std::vector<ExactEntry> e;
    for (int j = 0; j < n; ++j) e.push_back(ent(radii[pick(7)], angle()));
    return diag(e);
  }
  if (kind < 14) {
    // upper triangular with exact entries
    int n = 2 + static_cast<int>(pick(2));
    std::vector<ExactEntry> e(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i) {
      e[static_cast<std::size_t>(i * n + i)] = ent(radii[pick(7)], angle());
      for (int j = i + 1; j < n; ++j) {
        if (pick(2)) e[static_cast<std::size_t>(i * n + j)] = ent(Rat(static_cast<long>(pick(3))), Angle(Rat(0)));
      }
    }
    return DenseMatrix::from_exact(n, e);
  }
  if (kind < 17) {
    // full double matrix for the eigensolver path
    int n = 2 + static_cast<int>(pick(2));
    std::vector<std::vector<cplx>> rows(static_cast<std::size_t>(n), std::vector<cplx>(static_cast<std::size_t>(n)));
    for (auto& row : rows) {
      for (auto& x : row) x = cplx(-2 + 4 * uniform(s), -2 + 4 * uniform(s));
    }
    return DenseMatrix::from_rows(rows);
  }
  WeightedShift w;
  w.kind = pick(3) == 0 ? ShiftKind::Bilateral : (pick(2) ? ShiftKind::Backward : ShiftKind::Forward);
  // harmonic weights a + b/k with b/a not a negative integer (and one-sided, so k != -b/a)
  if (w.kind == ShiftKind::Bilateral || pick(2)) {
    w.weights.type = "constant";
    w.weights.value = std::vector<double>{0.5, 1.0, 1.5, 2.0}[pick(4)];
  } else {
    w.weights.type = "harmonic";
    w.weights.a = std::vector<double>{0.5, 1.0, 1.0, 2.0}[pick(4)];
    w.weights.b = std::vector<double>{-0.25, 0.25, 1.0, 3.0}[pick(4)];
  }
  w.bound = w.weights.bound();
  return w;
}

namespace {

// Moves every modulus by a relative amount below the tie tolerance.
OperatorSpec perturb(const OperatorSpec& T, std::uint64_t& s, double eta) {
  auto factor = [&]() { return 1 + eta * (uniform(s) < 0.5 ? -1 : 1) * (0.5 + 0.5 * uniform(s)); };
  if (const auto* d = std::get_if<ExactDiagonal>(&T)) {
    ExactDiagonal e = *d;
    for (auto& x : e.entries) x.radius *= Rat(factor());
    return e;
  }
  if (const auto* m = std::get_if<DenseMatrix>(&T)) {
    if (m->exact) {
      std::vector<ExactEntry> e = *m->exact;
      for (auto& x : e) x.radius *= Rat(factor());
      return DenseMatrix::from_exact(m->n, e);
    }
    DenseMatrix c = *m;
    for (auto& x : c.a) x *= factor();
    return c;
  }
  WeightedShift w = std::get<WeightedShift>(T);
  double f = factor();
  w.weights.value *= f;
  w.weights.a *= f;
  w.weights.b *= f;
  w.bound = w.weights.bound();
  return w;
}

bool flips(Tri a, Tri b) { return (a == Tri::Yes && b == Tri::No) || (a == Tri::No && b == Tri::Yes); }

}  // namespace

SuiteReport suite_consistency(long count, std::uint64_t seed, const ClassifyConfig& cfg) {
  Timer t;
  SuiteReport r;
  r.suite = "consistency";
  std::uint64_t s = seed;
  std::vector<OperatorSpec> specs, moved;
  for (long i = 0; i < count; ++i) specs.push_back(random_spec(s));
  for (const auto& T : specs) moved.push_back(perturb(T, s, 0.1 * cfg.tie));
  std::vector<Classification> a = classify_batch(specs, cfg);
  std::vector<Classification> b = classify_batch(moved, cfg);
  Tally mono{"SNH => NH => WNH and not-WNH => not-NH => not-SNH"}, tie{"no YES/NO flip under perturbation below the tie"},
      clos{"WNH => inside the closure, outside => not WNH"}, conf{"no conflicting rules"};
  long decided = 0, unknown = 0;
  for (long i = 0; i < count; ++i) {
    auto ui = static_cast<std::size_t>(i);
    for (const Classification* c : {&a[ui], &b[ui]}) {
      std::string at = "case " + std::to_string(i);
      bool m = true;
      if (c->snh.value == Tri::Yes) m = m && c->nh.value == Tri::Yes;
      if (c->nh.value == Tri::Yes) m = m && c->wnh.value == Tri::Yes;
      if (c->wnh.value == Tri::No) m = m && c->nh.value == Tri::No;
      if (c->nh.value == Tri::No) m = m && c->snh.value == Tri::No;
      mono(m, at);
      bool cl = true;
      if (c->wnh.value == Tri::Yes) cl = c->closure.value != Tri::No;
      if (c->closure.value == Tri::No) cl = cl && c->wnh.value == Tri::No;
      clos(cl, at + " wnh " + to_string(c->wnh.value) + " closure " + to_string(c->closure.value));
      conf(c->wnh.rule != "conflict" && c->nh.rule != "conflict" && c->snh.rule != "conflict", at);
    }
    const Classification& x = a[ui];
    const Classification& y = b[ui];
    bool f = flips(x.wnh.value, y.wnh.value) || flips(x.nh.value, y.nh.value) || flips(x.snh.value, y.snh.value) ||
             flips(x.closure.value, y.closure.value);
    tie(!f, "case " + std::to_string(i));
    (x.wnh.value == Tri::Unknown ? unknown : decided) += 1;
  }
  mono.into(r);
  tie.into(r);
  clos.into(r);
  conf.into(r);
  r.data = {{"count", count}, {"seed", seed}, {"wnh_decided", decided}, {"wnh_unknown", unknown}};
  r.seconds = t.secs();
  return r;
}

}  // namespace numcyc
