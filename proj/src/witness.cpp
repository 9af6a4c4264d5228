#include "numcyc/witness.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "numcyc/errors.hpp"

namespace numcyc {

namespace {

const double kPi = 3.14159265358979323846;

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

Int round_real(const Real& x) {
  Real h = floor(x + 0.5);
  Int out;
  mpfr_get_z(out.get_mpz_t(), h.get(), MPFR_RNDN);
  return out;
}

LinForm shifted(const Ladder& lad, const LinForm& f, long c0, int atom = -1) {
  LinForm g = f;
  g.c0 += c0;
  if (atom >= 0) g.c[atom] += 1;
  return lad.fold(g);
}

}  // namespace

void RadiusSchedule::check() const {
  if (form != "pow") throw InvalidInput("radius schedule form '" + form + "' is not supported (only pow: R^n)");
  if (R < 2) throw InvalidInput("radius schedule needs an integer R >= 2");
}

// ---------------------------------------------------------------- steering

ExactDiagonal SteeringResult::diagonal() const {
  ExactDiagonal D;
  D.entries.emplace_back(Rat(R), alpha);
  ExactEntry e(Rat(R), beta);
  e.rel_to = 0;
  e.rel_delta = rel;
  D.entries.push_back(e);
  return D;
}

std::vector<Target> grid_targets(int cols, int rows, double radius, double eps) {
  if (cols < 1 || rows < 1 || !(radius > 0)) throw InvalidInput("grid needs positive size and radius");
  // square grid inside the disk, cell centers
  double h = radius / std::sqrt(2.0) * 0.99;
  std::vector<Target> out;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double x = -h + 2 * h * (c + 0.5) / cols;
      double y = -h + 2 * h * (r + 0.5) / rows;
      out.push_back({cplx(x, y), eps});
    }
  }
  return out;
}

namespace {
std::vector<double> replay_impl(const SteeringResult& s, double tol, std::vector<cplx>* values);
}  // namespace

SteeringResult torus_steer(const RadiusSchedule& Rs, const std::string& pattern, const std::vector<Target>& targets,
                           const SteerOptions& opt) {
  Rs.check();
  if (pattern != "znwn" && pattern != "z^n+w^n") {
    throw InvalidInput("torus_steer supports the pattern R^n (z^n + w^n) only, got " + pattern);
  }
  const long R = Rs.R;
  if (R % 2 != 0) throw InvalidInput("torus steering needs an even R");
  if (targets.empty()) throw InvalidInput("empty target list");
  if (targets.size() > opt.max_targets) throw ScheduleOverflow("more targets than the schedule allows");
  if (opt.gap < 1) throw InvalidInput("gap must be at least 1");
  double ymax = 0, emin = std::numeric_limits<double>::infinity();
  for (const auto& t : targets) {
    if (!finite(t.y)) throw InvalidInput("target is not finite");
    if (!(t.eps > 0)) throw InvalidInput("target tolerance must be positive");
    ymax = std::max(ymax, std::abs(t.y));
    emin = std::min(emin, t.eps);
  }
  const double lr = std::log(static_cast<double>(R));
  // rounding of c_j and d_j costs at most pi R^-B (2 + |y|) / 2 in the value
  const int B = std::max(2, static_cast<int>(std::ceil(std::log(4 * kPi * (2 + ymax) / emin) / lr)) + 1);
  const int G = opt.gap;

  // n_1 = R^{E_1}: smallest with 2 R^{n_1} >= |y_1|
  long E1 = opt.min_first_exponent;
  if (E1 < 0) throw InvalidInput("min_first_exponent must be non-negative");
  if (E1 > opt.max_first_exponent) throw Unreachable("first exponent above the cap");
  {
    double ay = std::abs(targets[0].y);
    while (ay > 0 && std::pow(static_cast<double>(R), static_cast<double>(E1)) * lr + std::log(2.0) < std::log(ay) + 1e-12) {
      if (++E1 > opt.max_first_exponent) throw Unreachable("first target needs too large an exponent");
    }
  }

  auto lad = std::make_shared<Ladder>(static_cast<int>(R));
  SteeringResult s;
  s.R = R;
  s.guard_bits = B;
  s.gap = G;
  LinForm e;
  e.c0 = E1;
  Lacunary la, lb, lrel;
  const int J = static_cast<int>(targets.size());
  for (int j = 0; j < J; ++j) {
    int a = lad->push(e);
    s.atom.push_back(a);
    LinForm Ef = lad->exponent_of(a);
    const Target& t = targets[static_cast<std::size_t>(j)];
    double ay = std::abs(t.y);

    // c_j ~ R^{n+B} asin(|y| / (2 R^n)) / pi
    Int c = 0;
    if (ay > 0) {
      bool small_n = lad->materialized(a) && lad->value(a) < 4096;
      if (small_n) {
        Int n = lad->value(a);
        long prec = static_cast<long>((n.get_d() + B) * std::log2(static_cast<double>(R))) + 128;
        Real Rn = Real::pow_int(R, n, prec);
        Real x = Real(ay, prec) / (Real(2.0, prec) * Rn);
        if (x > 1.0) throw Unreachable("target modulus exceeds 2 R^n");
        Real tt = asin(x) / Real::pi(prec);
        c = round_real(tt * Rn * Real::pow_int(R, Int(B), prec));
      } else {
        long prec = 128 + 4 * B;
        c = round_real(Real(ay, prec) * Real::pow_int(R, Int(B), prec) / (Real::pi(prec) * 2.0));
      }
    }
    // d_j ~ R^B arg(y) / pi
    Int d = 0;
    if (ay > 0) {
      double ph = std::atan2(t.y.imag(), t.y.real()) / kPi;
      if (ph < 0) ph += 2;
      Int RB;
      mpz_ui_pow_ui(RB.get_mpz_t(), static_cast<unsigned long>(R), static_cast<unsigned long>(B));
      d = round_real(Real(ph, 128) * Real::from_int(RB, 128));
      d %= 2 * RB;
    }

    Exponent e1 = Exponent::from_form(lad, shifted(*lad, Ef, 1));
    Exponent e2 = Exponent::from_form(lad, shifted(*lad, Ef, B));
    Exponent e3 = Exponent::from_form(lad, shifted(*lad, Ef, B, a));
    la.terms.push_back({Int(R / 2), e1});
    lb.terms.push_back({Int(-R / 2), e1});
    lrel.terms.push_back({Int(-R), e1});
    if (d != 0) {
      la.terms.push_back({d, e2});
      lb.terms.push_back({d, e2});
    }
    if (c != 0) {
      la.terms.push_back({-c, e3});
      lb.terms.push_back({c, e3});
      lrel.terms.push_back({2 * c, e3});
    }

    ScheduleEntry se;
    se.j = j;
    se.E = Exponent::from_form(lad, Ef);
    se.c = c;
    se.d = d;
    // later rho terms move n_j rho by <= 3 R^{-(n_j+B+G)}, later sigma terms move the
    // phase by <= 4 R^{-(n_j+B+G)}; both scaled by the derivative of the value
    se.degradation = (6 * kPi + 4 * kPi * ay) * std::pow(static_cast<double>(R), -static_cast<double>(B + G));
    if (j + 1 < J && se.degradation > t.eps / 2) throw ScheduleOverflow("degradation budget exceeded");
    s.schedule_log.push_back(se);

    e = shifted(*lad, Ef, B + G, a);
  }
  for (Lacunary* l : {&la, &lb, &lrel}) {
    l->p = static_cast<int>(R);
    l->ladder = lad;
    l->check();
  }
  la.family = "steer_alpha";
  lb.family = "steer_beta";
  lrel.family = "steer_rel";
  s.ladder = lad;
  s.alpha = Angle(la);
  s.beta = Angle(lb);
  s.rel = Angle(lrel);

  for (int j = 0; j < J; ++j) {
    SteeringHit h;
    h.n = Index::atom(lad, s.atom[static_cast<std::size_t>(j)]);
    h.target = targets[static_cast<std::size_t>(j)].y;
    h.eps = targets[static_cast<std::size_t>(j)].eps;
    s.hits.push_back(h);
  }
  std::vector<cplx> vals;
  std::vector<double> res = replay_impl(s, 1e-20, &vals);
  for (int j = 0; j < J; ++j) {
    SteeringHit& h = s.hits[static_cast<std::size_t>(j)];
    h.residual = res[static_cast<std::size_t>(j)];
    h.value = vals[static_cast<std::size_t>(j)];
    if (!(h.residual <= h.eps)) {
      throw ConvergenceFailure("steering hit " + std::to_string(j) + " misses its target on replay");
    }
  }
  return s;
}

namespace {

std::vector<double> replay_impl(const SteeringResult& s, double tol, std::vector<cplx>* values) {
  ExactDiagonal D = s.diagonal();
  std::vector<Rat> c{1, 1};
  std::vector<double> out;
  for (const auto& h : s.hits) {
    // relative precision fine enough for an absolute eps at this target size
    double t = std::min(tol, h.eps / (8 * (1 + std::abs(h.target))));
    long prec = 64 + static_cast<long>(-std::log2(t));
    PrecisionPolicy pol;
    pol.start_bits = std::max(pol.start_bits, prec);
    pol.max_bits = std::max(pol.max_bits, 8 * prec);
    ScaledComplex v = diagonal_value(D, c, h.n, t, pol);
    if (!v.representable()) throw PrecisionUnreachable("steered value left the floating range at n=" + h.n.str());
    ComplexInterval iv = v.to_interval(prec);
    out.push_back(add_up(std::abs(iv.center() - h.target), iv.rad));
    if (values) values->push_back(iv.center());
  }
  return out;
}

}  // namespace

std::vector<double> replay(const SteeringResult& s, double tol) { return replay_impl(s, tol, nullptr); }

// ---------------------------------------------------------------- pentagon

namespace {

cplx xi_pow(int k) { return std::polar(1.0, 2 * kPi * k / 5); }

std::uint64_t splitmix(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double unif(std::uint64_t& s) { return static_cast<double>(splitmix(s) >> 11) * 0x1.0p-53; }

// A configuration with unit-scale perturbations, scaled on demand.
struct PentaShape {
  cplx alpha, beta;
  std::array<double, 8> dir;  // +-1 signs of the eight angle perturbations, times a fraction
  cplx zd, wd;                // unit-disk points
};

void realize(const PentaShape& sh, double eps, double d, Penta10& u, cplx& z, cplx& w) {
  for (int j = 1; j <= 4; ++j) {
    double eta = 2 * std::asin(std::min(1.0, std::fabs(sh.dir[static_cast<std::size_t>(j - 1)]) * eps / 2));
    eta = std::copysign(eta, sh.dir[static_cast<std::size_t>(j - 1)]);
    u[static_cast<std::size_t>(j - 1)] = sh.alpha * xi_pow(j) * std::polar(1.0, eta);
    double eta2 = 2 * std::asin(std::min(1.0, std::fabs(sh.dir[static_cast<std::size_t>(j + 3)]) * eps / 2));
    eta2 = std::copysign(eta2, sh.dir[static_cast<std::size_t>(j + 3)]);
    u[static_cast<std::size_t>(4 + j)] = sh.beta * xi_pow(2 * j) * std::polar(1.0, eta2);
  }
  u[4] = sh.alpha;
  u[9] = sh.beta;
  z = sh.zd * d;
  w = sh.wd * d;
}

PentaShape random_shape(std::uint64_t& st, bool boundary) {
  PentaShape sh;
  sh.alpha = std::polar(1.0, 2 * kPi * unif(st));
  sh.beta = std::polar(1.0, 2 * kPi * unif(st));
  for (auto& v : sh.dir) {
    double r = boundary ? 1 - 1e-9 : unif(st);
    v = unif(st) < 0.5 ? -r : r;
  }
  for (cplx* p : {&sh.zd, &sh.wd}) {
    double r = boundary ? 1 - 1e-9 : std::sqrt(unif(st)) * (1 - 1e-9);
    *p = std::polar(r, 2 * kPi * unif(st));
  }
  return sh;
}

// Solve without region checks; false when the 4x4 system is singular.
bool raw_solve(const Penta10& u, cplx z, cplx w, std::array<double, 5>& a) {
  Eigen::Matrix4d S;
  Eigen::Vector4d rhs;
  for (int j = 0; j < 4; ++j) {
    cplx p = u[static_cast<std::size_t>(j)] - u[4];
    cplx q = u[static_cast<std::size_t>(5 + j)] - u[9];
    S(0, j) = p.real();
    S(1, j) = p.imag();
    S(2, j) = q.real();
    S(3, j) = q.imag();
  }
  cplx r1 = z - u[4], r2 = w - u[9];
  rhs << r1.real(), r1.imag(), r2.real(), r2.imag();
  Eigen::FullPivLU<Eigen::Matrix4d> lu(S);
  if (!lu.isInvertible()) return false;
  Eigen::Vector4d x = lu.solve(rhs);
  // one step of refinement with the residual taken in long double
  Eigen::Vector4d res;
  for (int i = 0; i < 4; ++i) {
    long double acc = rhs(i);
    for (int j = 0; j < 4; ++j) acc -= static_cast<long double>(S(i, j)) * x(j);
    res(i) = static_cast<double>(acc);
  }
  x += lu.solve(res);
  double sum = 0;
  for (int j = 0; j < 4; ++j) {
    a[static_cast<std::size_t>(j)] = x(j);
    sum += x(j);
  }
  a[4] = 1 - sum;
  return true;
}

bool positive(const std::array<double, 5>& a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return v > 0; });
}

}  // namespace

Penta10 perfect_pentagon(cplx alpha, cplx beta) {
  Penta10 u;
  for (int j = 1; j <= 4; ++j) {
    u[static_cast<std::size_t>(j - 1)] = alpha * xi_pow(j);
    u[static_cast<std::size_t>(4 + j)] = beta * xi_pow(2 * j);
  }
  u[4] = alpha;
  u[9] = beta;
  return u;
}

bool in_pentagon_region(const Penta10& u, double eps) {
  for (const auto& v : u) {
    if (!finite(v) || std::fabs(std::abs(v) - 1) > 1e-12) return false;
  }
  for (int j = 1; j <= 4; ++j) {
    if (!(std::abs(std::conj(u[4]) * u[static_cast<std::size_t>(j - 1)] - xi_pow(j)) < eps)) return false;
    if (!(std::abs(std::conj(u[9]) * u[static_cast<std::size_t>(4 + j)] - xi_pow(2 * j)) < eps)) return false;
  }
  return true;
}

void penta_det(double& center, double& rad) {
  const long prec = 256;
  Real two_pi = Real::pi(prec) * 2.0;
  auto ang = [&](int k) { return two_pi * static_cast<double>(k) / 5.0; };
  Real m[4][4];
  for (int j = 1; j <= 4; ++j) {
    m[0][j - 1] = cos(ang(j)) - 1.0;
    m[1][j - 1] = sin(ang(j));
    m[2][j - 1] = cos(ang(2 * j)) - 1.0;
    m[3][j - 1] = sin(ang(2 * j));
  }
  // Leibniz over the 24 permutations; entries are within 2^-250 and bounded by 2
  std::array<int, 4> perm{0, 1, 2, 3};
  Real det(prec);
  do {
    int inv = 0;
    for (int i = 0; i < 4; ++i) {
      for (int k = i + 1; k < 4; ++k) inv += perm[static_cast<std::size_t>(i)] > perm[static_cast<std::size_t>(k)];
    }
    Real p = m[0][perm[0]] * m[1][perm[1]] * m[2][perm[2]] * m[3][perm[3]];
    if (inv % 2) det -= p;
    else det += p;
  } while (std::next_permutation(perm.begin(), perm.end()));
  center = det.to_double();
  rad = add_up(std::ldexp(1.0, -230), std::fabs(center) * 0x1.0p-52);
}

PentaCalibration penta_calibrate(long samples, std::uint64_t seed) {
  if (samples < 1000) throw InvalidInput("penta_calibrate needs at least 1000 samples");
  PentaCalibration cal;
  cal.samples = samples;
  cal.seed = seed;
  penta_det(cal.det_center, cal.det_rad);
  if (std::fabs(cal.det_center) <= cal.det_rad) throw CalibrationFailure("determinant not separated from zero");

  std::uint64_t st = seed;
  std::vector<PentaShape> shapes;
  shapes.reserve(static_cast<std::size_t>(samples));
  for (long i = 0; i < samples; ++i) shapes.push_back(random_shape(st, true));
  const double eps0 = 1.0, d0 = 1.0;
  auto pass = [&](double s) {
    Penta10 u;
    cplx z, w;
    std::array<double, 5> a{};
    for (const auto& sh : shapes) {
      realize(sh, s * eps0, s * d0, u, z, w);
      if (!raw_solve(u, z, w, a) || !positive(a)) return false;
    }
    return true;
  };
  double lo = 1e-6, hi = 1.0;
  if (!pass(lo)) throw CalibrationFailure("solver fails even at scale 1e-6");
  if (pass(hi)) {
    lo = hi;
  } else {
    for (int it = 0; it < 40; ++it) {
      double mid = (lo + hi) / 2;
      if (pass(mid)) lo = mid;
      else hi = mid;
    }
  }
  cal.epsilon = lo * eps0 / 2;
  cal.d = lo * d0 / 2;
  return cal;
}

void penta_sample(std::uint64_t& state, double eps, double d, Penta10& u, cplx& z, cplx& w) {
  PentaShape sh = random_shape(state, false);
  realize(sh, eps, d, u, z, w);
}

std::array<double, 5> penta_solve(const Penta10& u, cplx z, cplx w, const PentaCalibration& cal) {
  if (!in_pentagon_region(u, cal.epsilon)) throw OutOfCalibratedRegion("u is not in P_eps for the calibrated eps");
  if (!finite(z) || !finite(w) || !(std::abs(z) < cal.d) || !(std::abs(w) < cal.d)) {
    throw OutOfCalibratedRegion("|z| and |w| must be below the calibrated d");
  }
  std::array<double, 5> a{};
  if (!raw_solve(u, z, w, a)) throw OutOfCalibratedRegion("singular system");
  if (!positive(a)) throw OutOfCalibratedRegion("solution is not strictly positive");
  long double sz_re = 0, sz_im = 0, sw_re = 0, sw_im = 0;
  for (int j = 0; j < 5; ++j) {
    sz_re += static_cast<long double>(a[static_cast<std::size_t>(j)]) * u[static_cast<std::size_t>(j)].real();
    sz_im += static_cast<long double>(a[static_cast<std::size_t>(j)]) * u[static_cast<std::size_t>(j)].imag();
    sw_re += static_cast<long double>(a[static_cast<std::size_t>(j)]) * u[static_cast<std::size_t>(5 + j)].real();
    sw_im += static_cast<long double>(a[static_cast<std::size_t>(j)]) * u[static_cast<std::size_t>(5 + j)].imag();
  }
  double ez = std::hypot(static_cast<double>(sz_re - z.real()), static_cast<double>(sz_im - z.imag()));
  double ew = std::hypot(static_cast<double>(sw_re - w.real()), static_cast<double>(sw_im - w.imag()));
  if (ez > 1e-10 || ew > 1e-10) throw ConvergenceFailure("pentagon constraints not met to 1e-10");
  return a;
}

// ---------------------------------------------------------------- search

AngleSet AngleSet::multiples(const Angle& theta) {
  AngleSet M;
  M.element = [theta](long j) { return theta * Int(j); };
  M.description = "multiples of " + theta.describe();
  return M;
}

AngleSet AngleSet::rationals() {
  auto cache = std::make_shared<std::vector<Rat>>();
  auto q = std::make_shared<long>(0);
  AngleSet M;
  M.element = [cache, q](long i) {
    if (i < 0) throw InvalidInput("negative index into an angle set");
    while (static_cast<long>(cache->size()) <= i) {
      ++*q;
      for (long p = 0; p < 2 * *q; ++p) {
        if (std::gcd(p, *q) == 1) cache->push_back(Rat(p, *q));
      }
    }
    return Angle((*cache)[static_cast<std::size_t>(i)]);
  };
  M.description = "rationals in [0,2) by height";
  M.declared_accumulation = true;
  return M;
}

bool IndexFilter::contains(long n) const {
  if (!list.empty()) return std::binary_search(list.begin(), list.end(), n);
  if (modulus <= 0) return false;
  long r = n % modulus;
  if (r < 0) r += modulus;
  long want = residue % modulus;
  if (want < 0) want += modulus;
  return r == want;
}

SicoResult sico_search(const AngleSet& M, const IndexFilter& A, const std::vector<cplx>& u, double eps, long n0,
                       const SicoOptions& opt) {
  if (!M.element) throw InvalidInput("angle set has no enumerator");
  if (u.empty()) throw InvalidInput("no targets");
  for (const auto& v : u) {
    if (!finite(v) || std::fabs(std::abs(v) - 1) > 1e-9) throw InvalidInput("targets must be unimodular");
  }
  if (!(eps > 0)) throw InvalidInput("eps must be positive");
  if (opt.pool < 2 || opt.centers < 1) throw InvalidInput("pool too small");
  IndexFilter Af = A;
  std::sort(Af.list.begin(), Af.list.end());

  std::vector<Angle> el;
  std::vector<double> th;
  for (long i = 0; i < opt.pool; ++i) {
    el.push_back(M.element(i));
    double err = 0;
    double v = el.back().value(128, &err).to_double();
    v = std::fmod(v, 2.0);
    if (v < 0) v += 2;
    th.push_back(v);
  }
  // clustering: some two distinct elements closer than the average spacing
  std::vector<double> sorted = th;
  std::sort(sorted.begin(), sorted.end());
  double gap = 2.0;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    double g = sorted[i] - sorted[i - 1];
    if (g > 1e-15) gap = std::min(gap, g);
  }
  bool cluster = gap < 2.0 / static_cast<double>(opt.pool);

  const std::size_t k = u.size();
  std::vector<cplx> u2(k);
  for (std::size_t j = 0; j < k; ++j) u2[j] = u[j] * u[j];
  long centers = std::min(opt.centers, opt.pool);
  std::vector<cplx> ph(static_cast<std::size_t>(opt.pool));
  auto phase = [&](long n, std::size_t a, std::size_t b) {
    double x = std::fmod(static_cast<double>(n) * (th[a] - th[b]), 2.0);
    return std::polar(1.0, kPi * x);
  };
  auto certify = [&](long n, long zc, long zj, cplx target) {
    Angle diff = el[static_cast<std::size_t>(zj)] - el[static_cast<std::size_t>(zc)];
    ComplexInterval v = unimodular_pow(diff, Index(n), 1e-15);
    return add_up(std::abs(v.center() - target), v.rad);
  };

  for (long n = std::max(n0 + 1, 1L); n <= opt.n_cap; ++n) {
    if (!Af.contains(n)) continue;
    for (long zc = 0; zc < centers; ++zc) {
      for (long i = 0; i < opt.pool; ++i) ph[static_cast<std::size_t>(i)] = phase(n, static_cast<std::size_t>(i), static_cast<std::size_t>(zc));
      std::vector<long> pick(k);
      double worst = 0;
      for (std::size_t j = 0; j < k; ++j) {
        double best = 1e300;
        for (long i = 0; i < opt.pool; ++i) {
          double dd = std::abs(ph[static_cast<std::size_t>(i)] - u[j]);
          if (dd < best) {
            best = dd;
            pick[j] = i;
          }
        }
        worst = std::max(worst, best);
      }
      if (!(worst < eps)) continue;
      long m_end = n + std::max(opt.m_window, 2 * n);
      for (long m = n + 1; m <= m_end; ++m) {
        if (!Af.contains(m)) continue;
        double wm = 0;
        for (std::size_t j = 0; j < k && wm < eps; ++j) {
          wm = std::max(wm, std::abs(phase(m, static_cast<std::size_t>(pick[j]), static_cast<std::size_t>(zc)) - u2[j]));
        }
        if (!(wm < eps)) continue;
        SicoResult r;
        r.n = n;
        r.m = m;
        r.z = zc;
        r.zj = pick;
        for (std::size_t j = 0; j < k; ++j) {
          r.residual_n = std::max(r.residual_n, certify(n, zc, pick[j], u[j]));
          r.residual_m = std::max(r.residual_m, certify(m, zc, pick[j], u2[j]));
        }
        if (!(r.residual_n < eps && r.residual_m < eps)) continue;
        r.heuristic_accumulation = !M.declared_accumulation && cluster;
        return r;
      }
    }
  }
  throw SearchExhausted("no configuration found up to n = " + std::to_string(opt.n_cap));
}

// ---------------------------------------------------------------- greedy

double DdiaaState::omega_of(const Rat& a) const {
  if (a <= 0) return 0.0;
  Real v = Real::from_rat(a, 64);
  if (omega == "sqrt") return sqrt(v).to_double_up();
  if (omega == "linear") return v.to_double_up();
  throw InvalidInput("unknown gauge " + omega);
}

double DdiaaState::omega_mass() const {
  double s = 0;
  for (const auto& w : weight) s = add_up(s, omega_of(w));
  return s;
}

ExactDiagonal DdiaaState::diagonal() const {
  ExactDiagonal D;
  for (std::size_t i = 0; i < angle.size(); ++i) {
    ExactEntry e(Rat(R), Angle(angle[i]));
    e.rel_to = rel_to[i];
    if (rel_to[i] >= 0) e.rel_delta = Angle(rel_delta[i]);
    D.entries.push_back(e);
  }
  return D;
}

namespace {

ComplexInterval state_value(const DdiaaState& st, const Int& n) {
  if (st.angle.empty()) return ComplexInterval(256);
  ScaledComplex v = diagonal_value(st.diagonal(), st.weight, Index(n), 1e-20);
  if (v.mag.is_zero()) return ComplexInterval(256);
  if (!v.representable()) throw PrecisionUnreachable("weighted sum left the floating range");
  return v.to_interval(256);
}

}  // namespace

ScaledComplex ddiaa_zero_check(const DdiaaState& st, std::size_t k) {
  if (k >= st.certificates.size()) throw InvalidInput("no such step");
  ExactDiagonal D;
  std::vector<Rat> c;
  for (std::size_t i = 0; i < st.angle.size(); ++i) {
    ExactEntry e(Rat(1), Angle(st.angle[i]));
    e.rel_to = st.rel_to[i];
    if (st.rel_to[i] >= 0) e.rel_delta = Angle(st.rel_delta[i]);
    D.entries.push_back(e);
    c.push_back(st.step[i] <= static_cast<int>(k) ? st.weight[i] : Rat(0));
  }
  return diagonal_value(D, c, Index(st.certificates[k].m), 1e-20);
}

DdiaaCertificate ddiaa_extend(DdiaaState& st, cplx y, double delta, const RadiusSchedule& Rs, double tol) {
  Rs.check();
  if (!st.certificates.empty() && st.R != Rs.R) throw InvalidInput("radius changed between extensions");
  if (!finite(y)) throw InvalidInput("target is not finite");
  if (!(delta > 0) || !std::isfinite(delta)) throw InvalidInput("delta must be positive");
  if (!(tol > 0)) throw InvalidInput("tol must be positive");
  st.R = Rs.R;
  const long R = st.R;
  const double lr = std::log(static_cast<double>(R));
  const int k = static_cast<int>(st.certificates.size());
  const double ay = std::abs(y);
  const double sqrt3 = std::sqrt(3.0);

  // smallest n >= lo past the last certificate that is an odd multiple of the last zero exponent,
  // so every earlier pair cancels at n
  auto next_n = [&](Int lo) {
    if (lo < 1) lo = 1;
    if (st.last_m == 0) return lo;
    Int o = (lo + st.last_m - 1) / st.last_m;
    if (o % 2 == 0) o += 1;
    Int n = o * st.last_m;
    while (n <= st.last_n) n += 2 * st.last_m;
    return n;
  };
  auto ceil_int = [](double x) { return Int(static_cast<long>(std::ceil(std::max(x, 0.0) - 1e-12))); };

  DdiaaCertificate cert;
  cert.y = y;
  cert.delta = delta;
  if (ay == 0) {
    cert.n = next_n(1);
    cert.m = cert.n;
  } else {
    // mass 2 beta = 2 |y| / (sqrt3 R^n) <= delta
    Int lo = ceil_int(std::log(2 * ay / (sqrt3 * delta)) / lr);
    // later pairs move earlier certificates by at most 2 beta R^{n_i} <= tol / 2^{k+3}
    if (st.last_n > 0) {
      Int sep = st.last_n + ceil_int(std::log(2 * ay * std::ldexp(1.0, k + 3) / (sqrt3 * tol)) / lr);
      if (sep > lo) lo = sep;
    }
    cert.n = next_n(lo);
    cert.m = 3 * cert.n;
  }
  if (cert.n > Int(1L << 28)) throw SearchExhausted("exponent schedule passed 2^28");

  if (ay > 0) {
    const Int& n = cert.n;
    long prec = 128;
    Real Rn = Real::pow_int(R, n, prec);
    Real beta = Real(ay, prec) / (Rn * sqrt(Real(3.0, prec)));
    mpfr_prec_round(beta.get(), 60, MPFR_RNDD);
    Rat b = beta.to_rat();
    // z^n must point along y / (1 + e^{i pi / 3})
    double psi = std::atan2(y.imag(), y.real()) / kPi - 1.0 / 6;
    psi = std::fmod(psi, 2.0);
    if (psi < 0) psi += 2;
    Rat psiq(Int(static_cast<long>(std::llround(std::ldexp(psi, 52)))), Int(1) << 52);
    psiq.canonicalize();
    Rat step(Int(1), cert.m);
    step.canonicalize();
    Rat phi;
    for (long kk = 0;; ++kk) {
      phi = mod2(Rat((psiq + 2 * kk) / n));
      Rat phi2 = mod2(Rat(phi + step));
      bool clash = false;
      for (const auto& a : st.angle) clash = clash || a == phi || a == phi2;
      if (!clash) break;
      if (kk > 1000) throw SearchExhausted("no free point on the circle");
    }
    int first = static_cast<int>(st.angle.size());
    st.angle.push_back(phi);
    st.weight.push_back(b);
    st.rel_to.push_back(-1);
    st.rel_delta.push_back(0);
    st.step.push_back(k);
    st.angle.push_back(mod2(Rat(phi + step)));
    st.weight.push_back(b);
    st.rel_to.push_back(first);
    st.rel_delta.push_back(step);
    st.step.push_back(k);
    cert.omega_added = add_up(st.omega_of(b), st.omega_of(b));
  }
  st.last_n = cert.n;
  st.last_m = cert.m;

  ComplexInterval v = state_value(st, cert.n);
  cert.residual = add_up(std::abs(v.center() - y), v.rad);
  st.certificates.push_back(cert);
  if (!(cert.residual <= tol)) throw ConvergenceFailure("certificate misses its target");
  if (!ddiaa_zero_check(st, static_cast<std::size_t>(k)).mag.is_zero()) {
    throw ConvergenceFailure("zero-sum exponent does not cancel exactly");
  }
  return cert;
}

DdiaaState ddiaa_build(const std::vector<cplx>& targets, const std::vector<double>& deltas, const RadiusSchedule& R,
                       double tol) {
  if (deltas.size() != targets.size() && deltas.size() != 1) throw InvalidInput("one delta per target, or a single delta");
  DdiaaState st;
  st.R = R.R;
  for (std::size_t j = 0; j < targets.size(); ++j) {
    ddiaa_extend(st, targets[j], deltas.size() == 1 ? deltas[0] : deltas[j], R, tol);
  }
  return st;
}

std::vector<ComplexInterval> ddiaa_replay(const DdiaaState& st) {
  std::vector<ComplexInterval> out;
  for (const auto& c : st.certificates) out.push_back(state_value(st, c.n));
  return out;
}

// ---------------------------------------------------------------- three points

std::array<double, 2> three_point_solve(const std::array<cplx, 3>& xi, cplx y, std::array<double, 2> x0, double tol) {
  for (int a = 0; a < 3; ++a) {
    if (!finite(xi[static_cast<std::size_t>(a)])) throw InvalidInput("configuration is not finite");
    for (int b = a + 1; b < 3; ++b) {
      if (std::abs(xi[static_cast<std::size_t>(a)] - xi[static_cast<std::size_t>(b)]) < 1e-12) {
        throw SingularConfiguration("two coordinates of xi coincide");
      }
    }
  }
  auto inside = [](const std::array<double, 2>& x) { return x[0] > 0 && x[1] > 0 && x[0] + x[1] < 1; };
  if (!inside(x0)) throw InvalidInput("x0 must lie in {a > 0, b > 0, a + b < 1}");
  cplx d1 = xi[0] - xi[2], d2 = xi[1] - xi[2];
  double J00 = d1.real(), J01 = d2.real(), J10 = d1.imag(), J11 = d2.imag();
  double det = J00 * J11 - J01 * J10;
  if (std::fabs(det) < 1e-12 * std::abs(d1) * std::abs(d2)) throw SingularConfiguration("differential has rank < 2");
  std::array<double, 2> x = x0;
  auto F = [&](const std::array<double, 2>& v) { return v[0] * xi[0] + v[1] * xi[1] + (1 - v[0] - v[1]) * xi[2] - y; };
  cplx r = F(x);
  for (int it = 0; it < 50 && std::abs(r) > tol / 4; ++it) {
    double dx0 = (-r.real() * J11 + r.imag() * J01) / det;
    double dx1 = (-r.imag() * J00 + r.real() * J10) / det;
    x[0] += dx0;
    x[1] += dx1;
    r = F(x);
  }
  if (!(std::abs(r) <= tol)) throw ConvergenceFailure("Newton did not reach the tolerance");
  if (!inside(x)) throw LeftRegion("solution leaves {a > 0, b > 0, a + b < 1}");
  return x;
}

// ---------------------------------------------------------------- arcsin law

ArcsinReport arcsin_mc(long n, double c, long samples, std::uint64_t seed) {
  if (n < 1) throw InvalidInput("n must be positive");
  if (samples < 1) throw InvalidInput("samples must be positive");
  if (!(c >= 0) || !std::isfinite(c)) throw InvalidInput("c must be a non-negative number");
  ArcsinReport r;
  r.n = n;
  r.c = c;
  r.samples = samples;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  long hit = 0;
  for (long i = 0; i < samples; ++i) {
    double a = U(rng), b = U(rng);
    // z = e^{2 pi i a}, w = e^{2 pi i b}: |z^n + w^n| = 2 |cos(pi n (a - b))|
    double t = std::fmod(static_cast<double>(n) * (a - b), 1.0);
    double v = 2 * std::fabs(std::cos(kPi * t));
    if (v <= c) ++hit;
  }
  r.empirical = static_cast<double>(hit) / static_cast<double>(samples);
  r.expected = 2 / kPi * std::asin(std::min(c, 2.0) / 2);
  if (c >= 2) r.expected = 1.0;
  r.sigma = std::sqrt(r.expected * (1 - r.expected) / static_cast<double>(samples));
  if (r.expected == 0.0 || r.expected == 1.0) {
    r.ok = r.empirical == r.expected;
  } else {
    r.ok = std::fabs(r.empirical - r.expected) <= 3 * r.sigma;
  }
  return r;
}

}  // namespace numcyc
