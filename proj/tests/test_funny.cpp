#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "numcyc/errors.hpp"
#include "numcyc/funny.hpp"

using namespace numcyc;

namespace {

FunnyParams unit_params(int p, int K) {
  FunnyParams fp;
  fp.p = p;
  fp.K = K;
  fp.w.kind = "constant";
  fp.w.value = QComplex{1, 0};
  return fp;
}

void check_invariants(const FunnyArtifacts& a) {
  const int p = a.params.p;
  for (int k = 1; k <= a.params.K; ++k) {
    CHECK(a.N_mod2[static_cast<std::size_t>(k)] == 1);
    CHECK(a.N_modp[static_cast<std::size_t>(k)] != 0);
    if (a.N[static_cast<std::size_t>(k)]) {
      Int N = *a.N[static_cast<std::size_t>(k)];
      CHECK(N % 2 == 1);
      CHECK(N % p != 0);
      CHECK(N % p == a.N_modp[static_cast<std::size_t>(k)]);
    }
    CHECK(a.q[static_cast<std::size_t>(k)] >= 0);
  }
  CHECK(a.m[1] == 1);
  for (int k = 2; k <= a.params.K + 1; ++k) {
    const Int& m = a.m[static_cast<std::size_t>(k)];
    CHECK(m % 2 == 0);
    CHECK(m % p != 0);
    // 0 <= m_k - |w_{k-1}| p^{k-1} / pi < 4
    Real x = a.w[static_cast<std::size_t>(k - 1)].abs(256) * Real::pow_int(p, Int(k - 1), 256) / Real::pi(256);
    Real d = Real::from_int(m, 256) - x;
    CHECK(d.sign() >= 0);
    CHECK(d < 4.0);
  }
}

}  // namespace

TEST_CASE("build for p=3, |w| = 1") {
  FunnyArtifacts a = build(unit_params(3, 4));
  CHECK(a.e[1].literal() == 1);
  CHECK(a.e[2].literal() == 5);
  CHECK(a.e[3].literal() == 250);
  CHECK(a.nu(2).literal() == 243);
  const long m[] = {1, 2, 4, 10, 26};
  for (int k = 1; k <= 5; ++k) CHECK(a.m[static_cast<std::size_t>(k)] == m[k - 1]);
  CHECK(*a.N[1] == 1);
  CHECK(*a.N[2] == 83);
  check_invariants(a);
}

TEST_CASE("funny invariants for p in {3, 5}, K = 5") {
  for (int p : {3, 5}) {
    for (const char* kind : {"constant", "spiral"}) {
      FunnyParams fp = unit_params(p, 5);
      fp.w.kind = kind;
      FunnyArtifacts a = build(fp);
      check_invariants(a);
    }
  }
}

TEST_CASE("spiral targets sit in the band") {
  WSequence w;
  w.kind = "spiral";
  for (int k = 1; k <= 300; ++k) {
    QComplex z = w.at(k);
    CHECK(z.norm2() >= Rat(1, k * k));
    CHECK(z.norm2() <= Rat(k * k));
  }
  w.kind = "spiral_right";
  for (int k = 1; k <= 100; ++k) CHECK(w.at(k).re > 0);
  w.kind = "spiral_left";
  for (int k = 1; k <= 100; ++k) CHECK(w.at(k).re < 0);
}

TEST_CASE("bad inputs") {
  FunnyParams fp = unit_params(9, 3);
  CHECK_THROWS_AS(build(fp), InvalidPrimes);
  fp = unit_params(3, 3);
  fp.w.value = QComplex{2, 0};  // |w_1| must be 1
  CHECK_THROWS_AS(build(fp), InvalidInput);
  fp = unit_params(3, 16);
  fp.q_cap = 1000;
  CHECK_THROWS_AS(build(fp), CapExceeded);
  CHECK_THROWS_AS(make_aq2(5, 3), InvalidPrimes);  // 25 <= 27
}

TEST_CASE("verify_linuk deltas for p=3, |w| = 1") {
  FunnyArtifacts a = build(unit_params(3, 4));
  // oracle values from independent high-precision evaluation
  const double oracle[] = {1.0938700478681024, 4 * M_PI / 9 - 1, 10 * M_PI / 27 - 1, 26 * M_PI / 81 - 1};
  double prev = INFINITY;
  for (int k = 1; k <= 4; ++k) {
    LinukReport r = verify_linuk(a, k);
    CHECK(r.ok);
    double d = r.delta.to_double();
    CHECK(std::fabs(d - oracle[k - 1]) <= 1e-12 * std::fabs(oracle[k - 1]));
    CHECK(std::fabs(d) <= r.bound);
    CHECK(r.bound < prev);
    prev = r.bound;
    // the computed value sits within tail of the leading term
    Real lead_gap = abs(r.delta + Real(1.0, 128) - r.leading);
    CHECK(lead_gap.to_double() <= r.tail + r.delta_err);
  }
  CHECK(verify_linuk(a, 1).bound == doctest::Approx(4 * M_PI / 3).epsilon(1e-2));
}

TEST_CASE("verify_linuk11 with w = i") {
  FunnyParams fp = unit_params(3, 4);
  fp.w.value = QComplex{0, 1};
  FunnyArtifacts a = build(fp);
  Linuk11Report r1 = verify_linuk11(a, 1);
  Linuk11Report r2 = verify_linuk11(a, 2);
  CHECK(r1.ok);
  CHECK(r2.ok);
  CHECK(r2.bound < r1.bound / 2);
  for (int k = 1; k <= 4; ++k) {
    Linuk11Report u = verify_linuk11(a, k);
    Linuk11Report root = verify_linuk11(a, k, 1e-20, true);
    CHECK(u.ok);
    CHECK(root.ok);
    // past k = 1 the later q_s terms of theta barely move u^{nu_k} off the root
    if (k >= 2) CHECK(std::abs(u.value.center() - root.value.center()) <= 1e-3 * u.bound);
  }
}

TEST_CASE("q_k matches a brute-force rescan for k <= 6") {
  for (const char* kind : {"constant", "spiral"}) {
    FunnyParams fp = unit_params(3, 6);
    fp.w.kind = kind;
    fp.w.value = QComplex{Rat(3, 5), Rat(-4, 5)};
    FunnyArtifacts a = build(fp);
    for (int k = 1; k <= 6; ++k) CHECK(brute_force_q(a, k) == a.q[static_cast<std::size_t>(k)]);
  }
}

TEST_CASE("Lambda membership") {
  FunnyArtifacts a = build(unit_params(3, 3));
  for (long n : {3L, 9L, 15L, 21L, 243L, 729L, 1215L}) CHECK(in_lambda(a, n));
  for (long n : {1L, 2L, 6L, 27L, 81L, 486L}) CHECK_FALSE(in_lambda(a, n));
  CHECK(is_nu(a, 3));
  CHECK(is_nu(a, 243));
  CHECK_FALSE(is_nu(a, 9));
}

TEST_CASE("scan_linnuk small prefix") {
  FunnyArtifacts a = build(unit_params(3, 3));
  LinnukReport r = scan_linnuk(a, 300);
  CHECK(r.violations.empty());
  CHECK(r.excluded_nu == 2);
  // n = 2 directly
  ScaledReal v = one_plus_pow(a.tau, Index(2L), 1e-20);
  CHECK(v.abs_lower() >= 1.0 / 8);
}

TEST_CASE("aq1 returns and escape") {
  FunnyParams fp;
  fp.p = 3;
  fp.K = 3;
  fp.w.kind = "spiral";
  FunnyOperator op = make_aq1(fp);
  const FunnyArtifacts& a = op.art[0];
  OrbitOptions opt;
  opt.tol = 1e-15;
  for (int k = 1; k <= 3; ++k) {
    auto s = orbit(op.T, op.x0, {a.nu(k)}, opt);
    cplx half = a.w[static_cast<std::size_t>(k)].approx() / 2.0;
    Linuk11Report r = verify_linuk11(a, k);
    REQUIRE(r.ok);
    CHECK(std::abs(s.entries[0].value.center() - half) + s.entries[0].value.rad <= r.bound / 2);
  }
  // unequal moduli pair x = (1, 0): |<T^n x, x>| = 3^n
  DualPair e1 = pair_from_weights(std::vector<Rat>{1, 0});
  auto s = orbit_range(op.T, e1, 0, 30, opt);
  for (const auto& pt : s.entries) {
    double want = std::pow(3.0, static_cast<double>(pt.n.literal().get_si()));
    CHECK(std::fabs(std::abs(pt.value.center()) - want) <= pt.value.rad + 1e-14 * want);
  }
}

TEST_CASE("aq2 returns for both primes") {
  Aq2Operator op = make_aq2();
  OrbitOptions opt;
  opt.tol = 1e-15;
  for (int k = 1; k <= 2; ++k) {
    auto sx = orbit(op.T, op.x, {op.art_p.nu(k)}, opt);
    Linuk11Report rx = verify_linuk11(op.art_p, k);
    CHECK(std::abs(sx.entries[0].value.center() - op.art_p.w[static_cast<std::size_t>(k)].approx() / 2.0) <= rx.bound / 2);
    auto sy = orbit(op.T, op.y, {op.art_q.nu(k)}, opt);
    Linuk11Report ry = verify_linuk11(op.art_q, k);
    CHECK(std::abs(sy.entries[0].value.center() - op.art_q.w[static_cast<std::size_t>(k)].approx() / 2.0) <= ry.bound / 2);
    CHECK(op.art_p.w[static_cast<std::size_t>(k)].re > 0);
    CHECK(op.art_q.w[static_cast<std::size_t>(k)].re < 0);
  }
}

TEST_CASE("pno places targets") {
  std::vector<QComplex> t{{Rat(1, 2), 0}, {Rat(1, 4), Rat(1, 4)}, {-1, Rat(1, 2)}};
  FunnyOperator op = make_pno(t);
  REQUIRE(op.target_index.size() == 3);
  const FunnyArtifacts& a = op.art[0];
  OrbitOptions opt;
  opt.tol = 1e-15;
  for (std::size_t j = 0; j < 3; ++j) {
    int k = op.target_index[j];
    auto s = orbit(op.T, op.x0, {a.nu(k)}, opt);
    Linuk11Report r = verify_linuk11(a, k);
    CHECK(std::abs(s.entries[0].value.center() - t[j].approx()) <= r.bound / 2);
  }
}
