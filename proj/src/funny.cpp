#include "numcyc/funny.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "numcyc/errors.hpp"

namespace numcyc {

bool is_prime(long n) {
  if (n < 2) return false;
  for (long d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

Real QComplex::abs(long prec) const { return sqrt(Real::from_rat(norm2(), prec)); }

namespace {

// Ring r of the square spiral: points (a, b) with max(|a|, |b|) = r, 8r of them.
std::pair<long, long> ring_point(long r, long i) {
  if (i < 2 * r) return {r, -r + 1 + i};
  i -= 2 * r;
  if (i < 2 * r) return {r - 1 - i, r};
  i -= 2 * r;
  if (i < 2 * r) return {-r, r - 1 - i};
  i -= 2 * r;
  return {-r + 1 + i, -r};
}

Int isqrt_ceil(const Rat& x) {
  // smallest s >= 1 with s^2 >= x
  Int lo;
  mpz_class fl = x.get_num() / x.get_den();
  mpz_sqrt(lo.get_mpz_t(), fl.get_mpz_t());
  Int s = lo > 1 ? Int(lo - 1) : Int(1);
  while (Rat(s * s) < x) ++s;
  return s;
}

}  // namespace

QComplex spiral_point(long k, int half_plane) {
  if (k < 1) throw InvalidInput("spiral index starts at 1");
  long seen = 0;
  for (long L = 1;; ++L) {
    for (long r = 1; r <= L * L; ++r) {
      for (long i = 0; i < 8 * r; ++i) {
        auto [a, b] = ring_point(r, i);
        if (half_plane > 0 && a <= 0) continue;
        if (half_plane < 0 && a >= 0) continue;
        if (++seen == k) {
          QComplex z{Rat(a, L), Rat(b, L)};
          z.re.canonicalize();
          z.im.canonicalize();
          return z;
        }
      }
    }
  }
}

QComplex clamp_to_band(const QComplex& w, int k) {
  Rat n2 = w.norm2();
  if (n2 == 0) throw InvalidInput("target 0 cannot be placed in the band");
  Rat lo(1, static_cast<long>(k) * k), hi(static_cast<long>(k) * k);
  QComplex out = w;
  if (n2 < lo) {
    Int s = isqrt_ceil(lo / n2);
    out.re *= s;
    out.im *= s;
  } else if (n2 > hi) {
    Int s = isqrt_ceil(n2 / hi);
    out.re /= s;
    out.im /= s;
  }
  Rat m2 = out.norm2();
  if (m2 < lo || m2 > hi) throw InvalidInput("could not rescale target into the band");
  return out;
}

QComplex WSequence::at(int k) const {
  if (k < 1) throw InvalidInput("w is indexed from 1");
  auto spiral = [&](int half) {
    if (k == 1) return QComplex{half < 0 ? Rat(-1) : Rat(1), 0};
    return clamp_to_band(spiral_point(k - 1, half), k);
  };
  if (kind == "constant") return value;
  if (kind == "spiral") return spiral(0);
  if (kind == "spiral_right") return spiral(1);
  if (kind == "spiral_left") return spiral(-1);
  if (kind == "list") {
    if (k <= static_cast<int>(values.size())) return values[static_cast<std::size_t>(k - 1)];
    return spiral(0);
  }
  throw InvalidInput("unknown w sequence kind " + kind);
}

std::string WSequence::describe() const {
  if (kind == "constant") return "constant " + value.re.get_str() + "+" + value.im.get_str() + "i";
  return kind;
}

Int next_admissible(const Real& lo, const Real& hi, int p) {
  Real fl = floor(lo), fh = floor(hi);
  if (!(fl == fh)) throw PrecisionUnreachable("cannot certify floor for the m_k rule");
  Int m = Int(fl.to_rat().get_num()) + 1;
  if (lo.sign() < 0) m = 1;
  while (m % 2 != 0 || m % p == 0) ++m;
  return m;
}

ScaledComplex FunnyArtifacts::one_plus_z(const Index& n, double tol) const {
  return one_plus_pow_complex(tau, n, tol, params.policy);
}

ComplexInterval FunnyArtifacts::u_pow(const Index& n, double tol) const {
  return unimodular_pow(theta, n, tol, params.policy);
}

namespace {

// sum of |m| p^{-e} over terms with e > E, plus the tail
ScaledReal tail_beyond(const Lacunary& l, const Exponent& E) {
  ScaledReal acc = ScaledReal::zero(l.p);
  if (l.tail_coef != 0) acc = ScaledReal::from_int(l.tail_coef, l.p, -l.tail_e);
  for (std::size_t t = l.terms.size(); t-- > 0;) {
    if (compare(l.terms[t].e, E) <= 0) break;
    acc = scaled_add(acc, ScaledReal::from_int(abs(l.terms[t].m), l.p, -l.terms[t].e));
  }
  return acc;
}

// arg(z) / (2 pi) mod 1 for z known to within rad; err is absolute in turns.
Real turns(const Real& re, const Real& im, double rad, long prec, double& err) {
  Real a = atan2(im, re);
  Real two_pi = Real::pi(prec) * 2.0;
  Real t = a / two_pi;
  if (t.sign() < 0) t += Real(1.0, prec);
  double r = std::hypot(re.to_double(), im.to_double());
  if (!(rad < r / 2)) throw PrecisionUnreachable("phase enclosure too wide to read an argument");
  err = add_up(mul_up(rad / r, 0.5), pow2_up(8.0, -prec));  // asin(x) <= pi x / 2
  return t;
}

Int choose_q(const FunnyArtifacts& art, int k, const ComplexInterval& phase, const QComplex& w) {
  int p = art.params.p;
  Int pk;
  mpz_ui_pow_ui(pk.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(k));
  if (pk > art.params.q_cap) throw CapExceeded("q_k search over p^k = " + pk.get_str() + " values exceeds the cap");
  long prec = std::max<long>(art.params.policy.start_bits, 128);
  double e1 = 0, e2 = 0;
  Real tw = turns(Real::from_rat(w.re, prec), Real::from_rat(w.im, prec), 0.0, prec, e1);
  Real tp = turns(phase.re.with_prec(prec), phase.im.with_prec(prec), phase.rad, prec, e2);
  // target angle of w / (1 + z^nu) in turns, scaled by p^k
  Real x = (tw - tp) * Real::from_int(pk, prec);
  Real pkr = Real::from_int(pk, prec);
  while (x.sign() < 0) x += pkr;
  while (x >= pkr) x -= pkr;
  double err = add_up(e1 + e2, 0.0) * pk.get_d() * (1 + 1e-12) + std::ldexp(pk.get_d() * 16, static_cast<int>(-prec));
  Real r = floor(x + 0.5);
  Real dist = abs(x - floor(x) - Real(0.5, prec));
  Int q = r.to_rat().get_num();
  if (dist.to_double() <= err) {
    // too close to a midpoint to separate the two nearest roots: take the smaller q
    Int a = floor(x).to_rat().get_num();
    Int b = a + 1;
    if (b == pk) b = 0;
    q = std::min(a, b);
  }
  q %= pk;
  if (q < 0) q += pk;
  return q;
}

}  // namespace

FunnyArtifacts build(const FunnyParams& params) {
  if (params.p < 3 || !is_prime(params.p)) throw InvalidPrimes("p must be an odd prime");
  if (params.K < 1) throw InvalidInput("depth K must be at least 1");
  if (params.K > 40) throw CapExceeded("depth K above 40");
  FunnyArtifacts a;
  a.params = params;
  const int p = params.p, K = params.K;
  auto lad = std::make_shared<Ladder>(p);
  a.atom.assign(static_cast<std::size_t>(K + 3), -1);
  LinForm e;
  e.c0 = 1;
  for (int k = 1; k <= K + 2; ++k) {
    a.atom[static_cast<std::size_t>(k)] = lad->push(e);
    LinForm next = lad->exponent_of(a.atom[static_cast<std::size_t>(k)]);
    next.c0 += k;
    next.c[a.atom[static_cast<std::size_t>(k)]] += 1;
    e = lad->fold(next);
  }
  a.ladder = lad;
  a.e.assign(static_cast<std::size_t>(K + 3), Exponent());
  for (int k = 1; k <= K + 2; ++k) {
    a.e[static_cast<std::size_t>(k)] = Exponent::from_form(a.ladder, a.ladder->exponent_of(a.atom[static_cast<std::size_t>(k)]));
  }

  a.w.assign(static_cast<std::size_t>(K + 2), QComplex{});
  for (int k = 1; k <= K + 1; ++k) {
    QComplex wk = params.w.at(k);
    Rat n2 = wk.norm2();
    if (n2 < Rat(1, static_cast<long>(k) * k) || n2 > Rat(static_cast<long>(k) * k)) {
      throw InvalidInput("w_" + std::to_string(k) + " violates 1/k <= |w_k| <= k");
    }
    a.w[static_cast<std::size_t>(k)] = wk;
  }

  a.m.assign(static_cast<std::size_t>(K + 2), Int(0));
  a.m[1] = 1;
  for (int k = 2; k <= K + 1; ++k) {
    Int pk;
    mpz_ui_pow_ui(pk.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(k - 1));
    for (long prec = std::max<long>(params.policy.start_bits, 64);; prec *= 2) {
      if (prec > params.policy.max_bits) throw PrecisionUnreachable("m_k threshold sits on an integer");
      Real x = a.w[static_cast<std::size_t>(k - 1)].abs(prec) * Real::from_int(pk, prec) / Real::pi(prec);
      double slack = std::ldexp(std::fabs(x.to_double()) * 8, static_cast<int>(-prec));
      try {
        a.m[static_cast<std::size_t>(k)] = next_admissible(x - slack, x + slack, p);
        break;
      } catch (const PrecisionUnreachable&) {
      }
    }
  }

  Lacunary t;
  t.p = p;
  t.ladder = a.ladder;
  t.family = "funny_tau";
  for (int k = 1; k <= K + 1; ++k) t.terms.push_back({a.m[static_cast<std::size_t>(k)], a.e[static_cast<std::size_t>(k)]});
  // m_s < (s-1) p^{s-1} / pi + 4 and each later term is at most half the previous
  Int pK1;
  mpz_ui_pow_ui(pK1.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(K + 1));
  t.tail_coef = 2 * ((K + 1) * pK1 + 4);
  t.tail_e = a.e[static_cast<std::size_t>(K + 2)];
  t.check();
  a.tau = Angle(t);

  a.q.assign(static_cast<std::size_t>(K + 1), Int(0));
  for (int k = 1; k <= K; ++k) {
    ScaledComplex one = a.one_plus_z(a.nu(k), 1e-30);
    a.q[static_cast<std::size_t>(k)] = choose_q(a, k, one.phase, a.w[static_cast<std::size_t>(k)]);
  }
  Lacunary th;
  th.p = p;
  th.ladder = a.ladder;
  th.family = "funny_theta";
  for (int k = 1; k <= K; ++k) {
    if (a.q[static_cast<std::size_t>(k)] == 0) continue;
    th.terms.push_back({2 * a.q[static_cast<std::size_t>(k)], a.e[static_cast<std::size_t>(k)] + Exponent(static_cast<long>(k))});
  }
  // 2 q_s p^{-(s + e_s)} < 2 p^{-e_s}, and the terms shrink faster than halving
  th.tail_coef = 4;
  th.tail_e = a.e[static_cast<std::size_t>(K + 1)];
  th.check();
  a.theta = Angle(th);

  a.N.assign(static_cast<std::size_t>(K + 1), std::nullopt);
  a.N_mod2.assign(static_cast<std::size_t>(K + 1), 0);
  a.N_modp.assign(static_cast<std::size_t>(K + 1), Int(0));
  for (int k = 1; k <= K; ++k) {
    Int par = 0;
    for (int s = 1; s <= k; ++s) par += a.m[static_cast<std::size_t>(s)];  // nu_k / nu_s is odd
    a.N_mod2[static_cast<std::size_t>(k)] = static_cast<int>(mpz_class(par % 2).get_si());
    Int r = a.m[static_cast<std::size_t>(k)] % p;  // the other terms carry a factor p
    a.N_modp[static_cast<std::size_t>(k)] = r;
    const Exponent& ek = a.e[static_cast<std::size_t>(k)];
    if (ek.is_literal() && ek.literal() < Int(1L << 22)) {
      Int N = 0;
      for (int s = 1; s <= k; ++s) {
        Int d = ek.literal() - a.e[static_cast<std::size_t>(s)].literal();
        Int pw;
        mpz_ui_pow_ui(pw.get_mpz_t(), static_cast<unsigned long>(p), d.get_ui());
        N += a.m[static_cast<std::size_t>(s)] * pw;
      }
      a.N[static_cast<std::size_t>(k)] = N;
    }
  }
  return a;
}

LinukReport verify_linuk(const FunnyArtifacts& art, int k, double tol) {
  const int K = art.params.K, p = art.params.p;
  if (k < 1 || k > K) throw InvalidInput("linuk index outside 1..K");
  LinukReport r;
  r.k = k;
  long prec = std::max<long>(art.params.policy.start_bits, 128);
  Index nu = art.nu(k);
  ScaledReal mag = one_plus_pow(art.tau, nu, tol, art.params.policy);
  ScaledReal prod = scaled_mul(ScaledReal::power(p, nu.as_exponent(), prec), mag);
  if (!prod.representable()) throw PrecisionUnreachable("p^{nu_k} |1 + z^{nu_k}| did not cancel to a plain number");
  Real v = prod.to_real(prec);
  Real wabs = art.w[static_cast<std::size_t>(k)].abs(prec);
  r.delta = v - wabs;
  r.delta_err = add_up(mul_up(prod.err, std::fabs(v.to_double()) * (1 + 1e-12)), ulp_bound(v) + ulp_bound(wabs) + ulp_bound(r.delta));
  Int pk;
  mpz_ui_pow_ui(pk.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(k));
  r.leading = Real::pi(prec) * Real::from_int(art.m[static_cast<std::size_t>(k + 1)], prec) / Real::from_int(pk, prec);
  // x = sum_{s>k} m_s nu_k / nu_s; x_1 its first term; x <= 2 x_1
  const Lacunary& lt = art.tau.lac();
  const Exponent& ek = art.e[static_cast<std::size_t>(k)];
  const Exponent& ek1 = art.e[static_cast<std::size_t>(k + 1)];
  ScaledReal rest = scaled_mul(tail_beyond(lt, ek1), ScaledReal::power(p, nu.as_exponent() + ek, prec));
  double rest_up = mul_up(rest.abs_upper(), M_PI * (1 + 1e-15));  // p^{nu_k} pi (x - x_1)
  ScaledReal xhi = ScaledReal::from_int(2 * art.m[static_cast<std::size_t>(k + 1)], p, ek - ek1, prec);
  double pix = mul_up(xhi.abs_upper(), M_PI * (1 + 1e-15));
  double cube = mul_up(mul_up(pix, pix), 1.0 / 24 * (1 + 1e-15));
  double lead_up = r.leading.to_double_up() * (1 + 1e-15);
  r.tail = add_up(mul_up(rest_up, 1 + cube), mul_up(lead_up, cube));
  r.bound = add_up(4 * M_PI * (1 + 1e-15) / pk.get_d(), r.tail);
  r.ok = add_up(std::fabs(r.delta.to_double()), r.delta_err) <= r.bound;
  return r;
}

Linuk11Report verify_linuk11(const FunnyArtifacts& art, int k, double tol, bool use_root) {
  const int p = art.params.p;
  LinukReport lin = verify_linuk(art, k, tol);
  Linuk11Report r;
  r.k = k;
  long prec = std::max<long>(art.params.policy.start_bits, 128);
  Index nu = art.nu(k);
  ScaledComplex one = art.one_plus_z(nu, tol);
  ScaledReal prod = scaled_mul(ScaledReal::power(p, nu.as_exponent(), prec), one.mag);
  Real P = prod.to_real(prec);
  ComplexInterval A = scale(one.phase, P, prod.err);
  Int pk;
  mpz_ui_pow_ui(pk.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(k));
  ComplexInterval U;
  double utail = 0.0;
  if (use_root) {
    Real ang = Real::from_rat(Rat(2 * art.q[static_cast<std::size_t>(k)], pk), prec);
    U = ComplexInterval::unit(ang, ulp_bound(ang));
  } else {
    U = art.u_pow(nu, tol);
    const Lacunary& th = art.theta.lac();
    ScaledReal beyond = tail_beyond(th, art.e[static_cast<std::size_t>(k)] + Exponent(static_cast<long>(k)));
    ScaledReal scaled = scaled_mul(beyond, ScaledReal::power(p, nu.as_exponent(), prec));
    utail = mul_up(scaled.abs_upper(), M_PI * (1 + 1e-15));
  }
  const QComplex& w = art.w[static_cast<std::size_t>(k)];
  ComplexInterval W(Real::from_rat(w.re, prec), Real::from_rat(w.im, prec), 0.0);
  r.value = U * A - W;
  double wabs = w.abs(prec).to_double_up() * (1 + 1e-15);
  double D = lin.bound;
  r.bound = add_up(D, mul_up(wabs + D, add_up(M_PI * (1 + 1e-15) / pk.get_d(), utail)));
  r.ok = r.value.abs_upper() <= r.bound;
  return r;
}

bool is_nu(const FunnyArtifacts& art, long n) {
  for (int k = 1; k < static_cast<int>(art.atom.size()); ++k) {
    Index nu = art.nu(k);
    if (!art.ladder->materialized(art.atom[static_cast<std::size_t>(k)])) return false;
    Int v = nu.literal();
    if (v == n) return true;
    if (v > n) return false;
  }
  return false;
}

bool in_lambda(const FunnyArtifacts& art, long n) {
  const int p = art.params.p;
  for (int k = 1; k + 1 < static_cast<int>(art.atom.size()); ++k) {
    if (!art.ladder->materialized(art.atom[static_cast<std::size_t>(k)])) return false;
    Int v = art.nu(k).literal();
    if (v > n) return false;
    long nv = v.get_si();
    if (n % nv != 0) continue;
    long m = n / nv;
    if (m % 2 == 0) continue;
    // m < sqrt(nu_{k+1} / nu_k) = p^{(k + nu_k) / 2}, i.e. m^2 < p^{k + nu_k}
    Int ex = v + k;
    Int m2 = Int(m) * m;
    if (ex > 200) return true;  // p^200 exceeds any long squared
    Int pw;
    mpz_ui_pow_ui(pw.get_mpz_t(), static_cast<unsigned long>(p), ex.get_ui());
    if (m2 < pw) return true;
  }
  return false;
}

LinnukReport scan_linnuk(const FunnyArtifacts& art, long N, long n0, double tol) {
  if (N < 1) throw InvalidInput("scan length must be positive");
  if (N > 100000000) throw CapExceeded("scan length above 1e8");
  LinnukReport r;
  r.N = N;
  r.min_ratio = std::numeric_limits<double>::infinity();
  r.lambda_min_root = std::numeric_limits<double>::infinity();
  const double logp3 = std::log(static_cast<double>(art.params.p)) / 3;
  for (long n = 1; n <= N; ++n) {
    if (is_nu(art, n)) {
      ++r.excluded_nu;
      continue;
    }
    ScaledReal mag = one_plus_pow(art.tau, Index(n), 1e-12, art.params.policy);
    double lo = mag.abs_lower();
    if (in_lambda(art, n)) {
      ++r.in_lambda;
      if (n >= n0) {
        double root = std::exp(std::log(lo) / static_cast<double>(n)) * (1 - 1e-14);
        r.lambda_min_root = std::min(r.lambda_min_root, root);
        if (!(std::log(lo) / static_cast<double>(n) >= -logp3 + std::log1p(-tol))) r.lambda_violations.push_back(n);
      }
      continue;
    }
    ++r.checked;
    double need = 1.0 / (2.0 * static_cast<double>(n) * static_cast<double>(n)) * (1 + 1e-15);
    double ratio = lo / need;
    if (ratio < r.min_ratio) {
      r.min_ratio = ratio;
      r.argmin = n;
    }
    if (!(lo >= need)) r.violations.push_back(n);
  }
  return r;
}

Int brute_force_q(const FunnyArtifacts& art, int k) {
  const int p = art.params.p;
  long prec = 256;
  Int pk;
  mpz_ui_pow_ui(pk.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(k));
  if (pk > art.params.q_cap) throw CapExceeded("brute force over p^k values exceeds the cap");
  ScaledComplex one = art.one_plus_z(art.nu(k), 1e-40);
  const QComplex& w = art.w[static_cast<std::size_t>(k)];
  // target = (w / |w|) / (phase / |phase|)
  ComplexInterval W(Real::from_rat(w.re, prec), Real::from_rat(w.im, prec), 0.0);
  Real wa = w.abs(prec);
  ComplexInterval ph = one.phase;
  Real pa = hypot(ph.re, ph.im);
  // w conj(phase) / (|w| |phase|)
  ComplexInterval num = W * ph.conj();
  Real den = wa * pa;
  Real tre = num.re / den, tim = num.im / den;
  double terr = num.rad / den.to_double() * (1 + 1e-12) + 1e-60;
  Int best = -1;
  double best_hi = std::numeric_limits<double>::infinity();
  double best_lo = best_hi;
  for (Int q = 0; q < pk; ++q) {
    Real ang = Real::from_rat(Rat(2 * q, pk), prec) * Real::pi(prec);
    Real dre = tre - cos(ang), dim = tim - sin(ang);
    double d = hypot(dre, dim).to_double();
    double hi = d + terr + 1e-60, lo = d - terr - 1e-60;
    // replace only on a certified improvement, so inseparable ties keep the smaller q
    if (best < 0 || hi < best_lo) {
      best = q;
      best_hi = hi;
      best_lo = lo;
    }
  }
  return best;
}

FunnyOperator make_aq1(const FunnyParams& params) {
  FunnyOperator op;
  op.art.push_back(build(params));
  const FunnyArtifacts& a = op.art[0];
  ExactEntry e0{Rat(a.params.p), a.theta};
  ExactEntry e1{Rat(a.params.p), a.theta + a.tau};
  e1.rel_to = 0;
  e1.rel_delta = a.tau;
  op.T.entries = {e0, e1};
  op.x0 = pair_from_weights(std::vector<Rat>{Rat(1, 2), Rat(1, 2)});
  return op;
}

Aq2Operator make_aq2(int p, int q, int K, const WSequence& w, const WSequence& w2) {
  if (!is_prime(p) || !is_prime(q) || p < 3 || q < 3) throw InvalidPrimes("p and q must be odd primes");
  if (static_cast<long>(p) * p <= static_cast<long>(q) * q * q) throw InvalidPrimes("need p > q^{3/2}");
  Aq2Operator op;
  FunnyParams fp;
  fp.p = p;
  fp.w = w;
  fp.K = K;
  op.art_p = build(fp);
  FunnyParams fq = fp;
  fq.p = q;
  fq.w = w2;
  op.art_q = build(fq);
  ExactEntry a0{Rat(p), op.art_p.theta};
  ExactEntry a1{Rat(p), op.art_p.theta + op.art_p.tau};
  a1.rel_to = 0;
  a1.rel_delta = op.art_p.tau;
  ExactEntry b0{Rat(q), op.art_q.theta};
  ExactEntry b1{Rat(q), op.art_q.theta + op.art_q.tau};
  b1.rel_to = 2;
  b1.rel_delta = op.art_q.tau;
  op.T.entries = {a0, a1, b0, b1};
  op.x = pair_from_weights(std::vector<Rat>{Rat(1, 2), Rat(1, 2), 0, 0});
  op.y = pair_from_weights(std::vector<Rat>{0, 0, Rat(1, 2), Rat(1, 2)});
  return op;
}

FunnyOperator make_pno(const std::vector<QComplex>& targets, int p) {
  if (targets.empty()) throw InvalidInput("pno needs at least one target");
  WSequence w;
  w.kind = "list";
  std::vector<int> where;
  int k = 1;
  for (const auto& y : targets) {
    QComplex t{2 * y.re, 2 * y.im};
    Rat n2 = t.norm2();
    if (n2 == 0) throw InvalidInput("target 0 is not reachable by a return");
    // first index with 1/k <= |2y| <= k; earlier slots get the filler 1
    while (n2 < Rat(1, static_cast<long>(k) * k) || n2 > Rat(static_cast<long>(k) * k)) {
      w.values.push_back(QComplex{1, 0});
      ++k;
      if (k > 40) throw CapExceeded("target needs an index beyond 40");
    }
    w.values.push_back(t);
    where.push_back(k);
    ++k;
  }
  FunnyParams fp;
  fp.p = p;
  fp.w = w;
  fp.K = static_cast<int>(w.values.size());
  FunnyOperator op = make_aq1(fp);
  op.target_index = where;
  return op;
}

}  // namespace numcyc
