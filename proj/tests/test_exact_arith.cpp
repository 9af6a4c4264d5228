#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "numcyc/angle.hpp"
#include "numcyc/errors.hpp"
#include "numcyc/interval.hpp"
#include "numcyc/scaled.hpp"

using namespace numcyc;

namespace {

// tau = sum m_k 3^{-e_k} for m = 1, 2, 4, 10, 26 (|w_k| = 1), built by hand.
struct Tau {
  std::shared_ptr<const Ladder> ladder;
  std::vector<int> atom;  // atom[k] is nu_k
  Angle tau;
};

Tau make_tau(int depth = 5) {
  auto lad = std::make_shared<Ladder>(3);
  std::vector<int> atom(depth + 2, -1);
  LinForm e;
  e.c0 = 1;
  for (int k = 1; k <= depth + 1; ++k) {
    atom[k] = lad->push(e);
    LinForm next = lad->exponent_of(atom[k]);
    next.c0 += k;
    next.c[atom[k]] += 1;
    e = lad->fold(next);
  }
  std::shared_ptr<const Ladder> cl = lad;
  Lacunary l;
  l.p = 3;
  l.ladder = cl;
  const long m[] = {1, 2, 4, 10, 26, 82};
  for (int k = 1; k <= depth; ++k) {
    l.terms.push_back({Int(m[k - 1]), Exponent::from_form(cl, cl->exponent_of(atom[k]))});
  }
  Int pk;
  mpz_ui_pow_ui(pk.get_mpz_t(), 3, depth);
  l.tail_coef = 2 * (depth * pk + 4);
  l.tail_e = Exponent::from_form(cl, cl->exponent_of(atom[depth + 1]));
  return Tau{cl, atom, Angle(l)};
}

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

}  // namespace

TEST_CASE("exponent ladder for p=3 reproduces 1, 5, 250") {
  Tau t = make_tau();
  CHECK(t.ladder->exponent_of(t.atom[1]).c0 == 1);
  CHECK(t.ladder->exponent_of(t.atom[2]).c0 == 5);
  CHECK(t.ladder->exponent_of(t.atom[3]).c0 == 250);
  CHECK(t.ladder->materialized(t.atom[3]));
  CHECK_FALSE(t.ladder->materialized(t.atom[4]));
  Int e4 = 253;
  Int p250;
  mpz_ui_pow_ui(p250.get_mpz_t(), 3, 250);
  CHECK(t.ladder->exponent_of(t.atom[4]).c0 == e4 + p250);
  // e_5 - e_4 is symbolic and certified positive
  Exponent e5 = Exponent::from_form(t.ladder, t.ladder->exponent_of(t.atom[5]));
  Exponent e4x = Exponent::from_form(t.ladder, t.ladder->exponent_of(t.atom[4]));
  CHECK_FALSE(e5.is_literal());
  CHECK(compare(e5, e4x) > 0);
  CHECK((e5 - e4x - Exponent::atom(t.ladder, t.atom[4])).literal() == 4);
}

TEST_CASE("reduce_mod2 examples") {
  ReduceResult a = reduce_mod2(Angle::rational(1, 3), Index(7L), 1e-30);
  REQUIRE(a.exact);
  CHECK(*a.exact == Rat(1, 3));
  CHECK(a.err == 0.0);

  Tau t = make_tau();
  ReduceResult b = reduce_mod2(t.tau, Index(3L), 1e-30);
  CHECK(b.err <= 1e-30);
  Real expect = Real::from_string("1.0246913580246913580246913580246913580246913580247", 200);
  CHECK(abs(b.r - expect).to_double() < 1e-30);

  ReduceResult z = reduce_mod2(t.tau, Index(0L), 1e-10);
  CHECK(z.err == 0.0);
  CHECK(z.r.is_zero());

  ReduceResult s = reduce_mod2(Angle::symbolic("log2"), Index(0L), 1e-10);
  CHECK(s.r.is_zero());
}

TEST_CASE("reduce_mod2 rejects unattainable tolerance on truncated lacunary data") {
  Lacunary l;
  l.p = 3;
  l.terms.push_back({Int(1), Exponent(1L)});
  l.tail_coef = 1;
  l.tail_e = Exponent(3L);  // tail up to 1/27
  CHECK_THROWS_AS(reduce_mod2(Angle(l), Index(1L), 1e-6), PrecisionUnreachable);
}

TEST_CASE("unimodular_pow examples") {
  ComplexInterval a = unimodular_pow(Angle::rational(1, 1), Index(5L), 1e-20);
  CHECK(a.re.to_double() == -1.0);
  CHECK(a.im.to_double() == 0.0);
  CHECK(a.rad == 0.0);
  ComplexInterval b = unimodular_pow(Angle::rational(1, 2), Index(3L), 1e-20);
  CHECK(b.re.to_double() == 0.0);
  CHECK(b.im.to_double() == -1.0);
  CHECK(b.rad == 0.0);

  Tau t = make_tau();
  ComplexInterval c = unimodular_pow(t.tau, Index(3L), 1e-25);
  CHECK(c.rad <= 1e-25);
  CHECK(std::fabs(c.re.to_double() - (-0.99699294116779206480)) < 1e-15);
  CHECK(std::fabs(c.im.to_double() - (-0.07749242067193094626)) < 1e-15);
}

TEST_CASE("one_plus_pow examples") {
  ScaledReal a = one_plus_pow(Angle::rational(0, 1), Index(12345L), 1e-20);
  CHECK(a.err == 0.0);
  CHECK(a.to_real(64).to_double() == 2.0);

  Tau t = make_tau();
  ScaledReal b = one_plus_pow(t.tau, Index(3L), 1e-25);
  CHECK(rel(b.to_real(128).to_double(), 0.07755074251363342298) < 1e-15);

  // nu_2 = 243: p^{nu_2} |1 + z^{nu_2}| = 4 pi / 9 after exponent cancellation
  Index nu2 = Index::atom(t.ladder, t.atom[2]);
  CHECK(nu2.literal() == 243);
  ScaledReal c = one_plus_pow(t.tau, nu2, 1e-25);
  CHECK(c.expo.literal() < -240);
  ScaledReal scaled = scaled_mul(ScaledReal::power(3, nu2.as_exponent()), c);
  Real v = scaled.to_real(128);
  Real four_pi_9 = Real::pi(128) * 4.0 / 9.0;
  CHECK(abs(v - four_pi_9).to_double() < 1e-30);
}

TEST_CASE("cancellation p^{nu_k} |1+z^{nu_k}| = pi m_{k+1} p^{-k} (1 + delta) for k <= 4") {
  Tau t = make_tau(5);
  const long m[] = {1, 2, 4, 10, 26};
  for (int k = 1; k <= 4; ++k) {
    Index nu = Index::atom(t.ladder, t.atom[k]);
    ScaledReal mag = one_plus_pow(t.tau, nu, 1e-20);
    ScaledReal prod = scaled_mul(ScaledReal::power(3, nu.as_exponent()), mag);
    REQUIRE(prod.representable());
    double v = prod.to_real(128).to_double();
    double lead = M_PI * static_cast<double>(m[k]) / std::pow(3.0, k);
    if (k == 1) {
      // next term is not negligible at k = 1; compare with the direct value
      CHECK(rel(v, 2.09387004786810242045) < 1e-14);
    } else {
      CHECK(rel(v, lead) < 1e-14);
    }
    CHECK(prod.err < 1e-20);
  }
  // cross-check k = 2 against direct high-precision evaluation of 3^243 |1 + z^243|
  PrecisionPolicy pol{2048, 2048};
  ReduceResult rr = reduce_mod2(t.tau, Index(243L), 1e-300, pol);
  Real direct = abs(cos(Real::pi(2048) * rr.r / 2.0)) * 2.0 * Real::pow_int(3, Int(243), 2048);
  CHECK(std::fabs(direct.to_double() - 4 * M_PI / 9) < 1e-12);
}

TEST_CASE("scaled plumbing examples") {
  ScaledReal two = ScaledReal::from_int(2, 3);
  ScaledReal p5 = ScaledReal::power(3, Exponent(5L));
  ScaledReal prod = scaled_mul(two, p5);
  CHECK(prod.expo.literal() == 5);
  CHECK(prod.mant.to_double() == 2.0);
  CHECK(prod.err == 0.0);

  ScaledReal loose = p5;
  loose.err = 0.5;
  CHECK(scaled_cmp(p5, loose) == Cmp::Unknown);
  CHECK(scaled_cmp(p5, scaled_mul(two, p5)) == Cmp::Less);
  CHECK(scaled_cmp(p5, p5) == Cmp::Equal);

  ComplexInterval s = ComplexInterval::from_double(1, 0) + ComplexInterval::from_double(0, 1);
  CHECK(s.re.to_double() == 1.0);
  CHECK(s.im.to_double() == 1.0);
  CHECK(s.rad == 0.0);
}

TEST_CASE("scaled_add keeps the dominant term across a symbolic gap") {
  Tau t = make_tau();
  Exponent e5 = Exponent::from_form(t.ladder, t.ladder->exponent_of(t.atom[5]));
  ScaledReal big = ScaledReal::from_int(10, 3, Exponent(-7L));
  ScaledReal tiny = ScaledReal::from_int(26, 3, -e5);
  ScaledReal s = scaled_add(big, tiny);
  CHECK(s.err <= big.err * (1 + 1e-12) + 1e-300);
  CHECK(scaled_cmp(s, big) != Cmp::Less);
  CHECK(scaled_cmp(tiny, big) == Cmp::Less);
}

TEST_CASE("property: rational reduction equals exact integer arithmetic") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<long> num(-1000, 1000), den(1, 997), idx(0, 1000000);
  for (int i = 0; i < 10000; ++i) {
    long a = num(rng), b = den(rng), n = idx(rng);
    ReduceResult r = reduce_mod2(Angle(Rat(a, b)), Index(n), 1e-12);
    REQUIRE(r.exact);
    // (a n mod 2b) / b with machine integers
    __int128 t = static_cast<__int128>(a) * n;
    __int128 m = 2 * static_cast<__int128>(b);
    __int128 rem = ((t % m) + m) % m;
    Rat expect(Int(static_cast<long>(rem)), Int(b));
    expect.canonicalize();
    CHECK(*r.exact == expect);
  }
}

TEST_CASE("property: halving tol never widens the returned enclosure") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<long> idx(1, 1000000);
  const char* labels[] = {"log2", "log3", "sqrt2", "log10"};
  for (int i = 0; i < 200; ++i) {
    Angle th = Angle::symbolic(labels[i % 4]);
    long n = idx(rng);
    double tol = 1e-20;
    ReduceResult prev = reduce_mod2(th, Index(n), tol);
    for (int h = 0; h < 6; ++h) {
      tol /= 2;
      ReduceResult cur = reduce_mod2(th, Index(n), tol);
      CHECK(cur.err <= prev.err);
      // new window inside the old one
      Real lo_prev = prev.r - Real(prev.err, 64), hi_prev = prev.r + Real(prev.err, 64);
      Real lo_cur = cur.r - Real(cur.err, 64), hi_cur = cur.r + Real(cur.err, 64);
      CHECK(lo_cur >= lo_prev);
      CHECK(hi_cur <= hi_prev);
      prev = cur;
    }
  }
}

TEST_CASE("property: interval products enclose sampled operand points") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 2), rr(0, 0.1), ang(0, 2 * M_PI), frac(0, 1);
  for (int i = 0; i < 2000; ++i) {
    ComplexInterval a = ComplexInterval::from_double(u(rng), u(rng), rr(rng));
    ComplexInterval b = ComplexInterval::from_double(u(rng), u(rng), rr(rng));
    ComplexInterval prod = a * b, sum = a + b, diff = a - b;
    for (int s = 0; s < 10; ++s) {
      double t1 = ang(rng), t2 = ang(rng), f1 = std::sqrt(frac(rng)), f2 = std::sqrt(frac(rng));
      std::complex<double> pa = a.center() + std::polar(f1 * a.rad, t1);
      std::complex<double> pb = b.center() + std::polar(f2 * b.rad, t2);
      // widen by double rounding of the sample itself
      CHECK(prod.widened(1e-14).contains(pa * pb));
      CHECK(sum.widened(1e-14).contains(pa + pb));
      CHECK(diff.widened(1e-14).contains(pa - pb));
    }
  }
}

TEST_CASE("Lacunary tail_after dominates truncated sums") {
  Tau t = make_tau();
  const Lacunary& l = t.tau.lac();
  ScaledReal t3 = l.tail_after(3);  // 10 * 3^-e4 + 26 * 3^-e5 + tail
  ScaledReal lead = ScaledReal::from_int(10, 3, -l.terms[3].e);
  CHECK(scaled_cmp(t3, lead) != Cmp::Less);
  ScaledReal t1 = l.tail_after(1);
  Real v = t1.to_real(128);
  Real excess = v - Real::from_rat(Rat(2, 243), 256);
  // the terms after 2/243 are below 1e-100, so only rounding shows
  CHECK(abs(excess) < Real(1e-35, 64));
}
