#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "numcyc/errors.hpp"
#include "numcyc/operators.hpp"

using namespace numcyc;

namespace {

bool near(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

TEST_CASE("hilbert_pair examples") {
  auto p = hilbert_pair({1.0, 0.0});
  CHECK(near(p.f[0], 1.0, 1e-15));
  CHECK(near(p.f[1], 0.0, 1e-15));
  CHECK(p.pi_certified);

  p = hilbert_pair({1.0, 1.0});
  CHECK(near(p.x[0], 1 / std::sqrt(2.0), 1e-15));
  CHECK(near(p.x[1], 1 / std::sqrt(2.0), 1e-15));

  p = hilbert_pair({1.0, cplx(0, 1)});
  CHECK(near(p.f[0], 1 / std::sqrt(2.0), 1e-15));
  CHECK(near(p.f[1], cplx(0, -1 / std::sqrt(2.0)), 1e-15));
  CHECK(near(p.apply(p.x), 1.0, 1e-15));

  CHECK_THROWS_AS(hilbert_pair({0.0, 0.0}), ZeroVector);
}

TEST_CASE("hilbert_pair is always certified") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int t = 0; t < 1000; ++t) {
    int n = 1 + t % 6;
    std::vector<cplx> x;
    for (int i = 0; i < n; ++i) x.emplace_back(g(rng) * std::pow(10.0, t % 9 - 4), g(rng));
    auto p = hilbert_pair(x);
    REQUIRE(p.pi_certified);
    CHECK(std::fabs(p.norm_x - 1) <= 1e-12);
    CHECK(std::fabs(p.norm_f - 1) <= 1e-12);
    CHECK(std::abs(p.apply(p.x) - 1.0) <= 1e-12);
  }
}

TEST_CASE("pair_from_weights examples") {
  auto p = pair_from_weights(std::vector<Rat>{1, 0});
  CHECK(near(p.x[0], 1.0, 0));
  CHECK(near(p.x[1], 0.0, 0));
  CHECK(p.pi_certified);

  p = pair_from_weights(std::vector<Rat>{Rat(1, 2), Rat(1, 2)});
  CHECK(near(p.x[0], 1 / std::sqrt(2.0), 1e-15));

  p = pair_from_weights(std::vector<Rat>{Rat(1, 3), Rat(1, 3), Rat(1, 3)});
  for (const auto& c : p.products()) CHECK(near(c, 1.0 / 3, 1e-15));
  for (std::size_t j = 0; j < 3; ++j) CHECK(near(p.x[j] * p.f[j], 1.0 / 3, 1e-15));

  CHECK_THROWS_AS(pair_from_weights(std::vector<Rat>{Rat(1, 2), Rat(1, 3)}), InvalidInput);
}

TEST_CASE("pair_from_weights on a skew basis") {
  DenseMatrix V = DenseMatrix::from_rows({{1.0, 1.0}, {0.0, 0.5}});
  std::vector<double> c{0.3, 0.7};
  auto p = pair_from_weights_basis(c, V);
  CHECK(p.approximate);
  CHECK(p.pi_certified);
  // e*_j(x) f(V e_j) = c_j
  cplx e0 = p.x[0] - 2.0 * p.x[1], e1 = 2.0 * p.x[1];
  cplx f0 = p.f[0], f1 = p.f[0] + 0.5 * p.f[1];
  CHECK(near(e0 * f0, 0.3, 1e-9));
  CHECK(near(e1 * f1, 0.7, 1e-9));
}

TEST_CASE("orbit examples") {
  DenseMatrix D = DenseMatrix::from_rows({{2.0, 0.0}, {0.0, 3.0}});
  auto p = hilbert_pair({1.0, 0.0});
  auto s = orbit(D, p, {Index(10L)});
  REQUIRE(s.entries.size() == 1);
  CHECK(s.entries[0].value.contains(cplx(1024, 0)));
  CHECK(s.mode == "float");

  auto I = DenseMatrix::identity(3);
  auto q = hilbert_pair({1.0, cplx(0, 2), -1.0});
  auto r = orbit_range(I, q, 0, 50);
  // x and f are rounded, so f(x) is 1 only to the certification tolerance
  for (const auto& e : r.entries) CHECK(std::abs(e.value.center() - 1.0) <= e.value.rad + 1e-12);

  CHECK_THROWS_AS(orbit(D, hilbert_pair({1.0, 0.0, 0.0}), {Index(1L)}), DimensionMismatch);
}

TEST_CASE("dense orbit falls back to the shadow when floats lose the tolerance") {
  // [[1, 1e8], [0, 1]]: entries of T^n grow but f(T^n x) stays 1 for x = e1.
  ExactEntry one{1, Angle()}, big{Rat(100000000), Angle()}, zero{0, Angle()};
  auto T = DenseMatrix::from_exact(2, {one, big, zero, one});
  DualPair p;
  p.x = {1.0, 1.0};
  p.f = {1.0, 0.0};
  OrbitOptions opt;
  opt.tol = 1e-20;
  auto s = orbit(T, p, {Index(3L), Index(30L)}, opt);
  CHECK(s.mode == "exact");
  // f(T^n x) = 1 + n 1e8
  CHECK(s.entries[1].value.contains(cplx(1 + 30 * 1e8, 0)));
  CHECK(s.entries[1].value.rad <= 1e-20 * 3.1e9);
  // the forward bound grows like |T|^n = 1e8^n, past the shadow's precision cap at n = 40
  CHECK_THROWS_AS(orbit(T, p, {Index(40L)}, opt), PrecisionUnreachable);
}

TEST_CASE("dense orbit beyond double range keeps a scaled value") {
  // [[2, 1], [0, 2]] with x = f = (0.6, 0.8): f(T^n x) = 2^n (1 + 0.24 n).
  ExactEntry two{2, Angle()}, one{1, Angle()}, zero{0, Angle()};
  auto T = DenseMatrix::from_exact(2, {two, one, zero, two});
  DualPair p;
  p.x = {0.6, 0.8};
  p.f = {0.6, 0.8};
  auto s = orbit(T, p, {Index(10L), Index(1100L), Index(1500L)});
  REQUIRE(s.entries.size() == 3);
  CHECK(!s.entries[0].scaled);
  CHECK(std::abs(s.entries[0].value.center() - 1024 * 3.4) < 1e-9);
  for (int k : {1, 2}) {
    const auto& pt = s.entries[static_cast<std::size_t>(k)];
    REQUIRE(pt.scaled);
    double n = k == 1 ? 1100 : 1500;
    double want = n * std::log(2.0) + std::log(1 + 0.24 * n);
    double got = pt.scaled->mag.log_base() * std::log(2.0) + std::log(std::abs(pt.scaled->phase.center()));
    CHECK(std::abs(got - want) < 1e-9);
    CHECK(std::abs(pt.scaled->phase.center() - 1.0) < 1e-9);
  }
}

TEST_CASE("exact diagonal agrees with its dense materialization") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> num(1, 40), den(2, 41), rad(1, 3);
  for (int t = 0; t < 20; ++t) {
    ExactDiagonal D;
    int n = 2 + t % 3;
    for (int j = 0; j < n; ++j) {
      ExactEntry e;
      e.radius = Rat(rad(rng), 2);
      e.radius.canonicalize();
      if (t % 2 == 0 && j == 1) {
        e.angle = Angle::symbolic(j == 1 ? "log2" : "log3");
      } else {
        Rat a(num(rng), den(rng));
        a.canonicalize();
        e.angle = a;
      }
      D.entries.push_back(e);
    }
    std::vector<Rat> c(static_cast<std::size_t>(n), Rat(1, n));
    auto p = pair_from_weights(c);
    OrbitOptions opt;
    opt.tol = 1e-9;
    auto ex = orbit_range(D, p, 0, 200, opt);
    auto de = orbit_range(D.to_dense(), p, 0, 200, opt);
    REQUIRE(ex.entries.size() == de.entries.size());
    for (std::size_t i = 0; i < ex.entries.size(); ++i) {
      double gap = std::abs(ex.entries[i].value.center() - de.entries[i].value.center());
      double scale = std::max(1.0, std::abs(ex.entries[i].value.center()));
      CHECK(gap <= ex.entries[i].value.rad + de.entries[i].value.rad + 1e-12 * scale);
    }
  }
}

TEST_CASE("orbit is linear in f") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int t = 0; t < 50; ++t) {
    DenseMatrix T = DenseMatrix::from_rows({{cplx(g(rng), g(rng)), cplx(g(rng), g(rng))},
                                            {cplx(g(rng), g(rng)), cplx(g(rng), g(rng))}});
    auto p = hilbert_pair({cplx(g(rng), g(rng)), cplx(g(rng), g(rng))});
    cplx alpha(g(rng), g(rng));
    DualPair q = p;
    for (auto& v : q.f) v *= alpha;
    auto a = orbit_range(T, p, 0, 30);
    auto b = orbit_range(T, q, 0, 30);
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
      cplx lhs = b.entries[i].value.center(), rhs = alpha * a.entries[i].value.center();
      double tol = b.entries[i].value.rad + std::abs(alpha) * a.entries[i].value.rad + 1e-13 * std::abs(rhs);
      CHECK(std::abs(lhs - rhs) <= tol);
    }
  }
}

TEST_CASE("exact diagonal cancels at literal indices") {
  ExactDiagonal D;
  D.entries.push_back({Rat(2), Angle(Rat(1, 3))});
  D.entries.push_back({Rat(2), Angle(Rat(2, 3))});
  auto p = pair_from_weights(std::vector<Rat>{Rat(1, 2), Rat(1, 2)});
  // 2^3 * (e^{i pi} + e^{2 i pi}) / 2 = 0
  auto s = orbit(D, p, {Index(3L), Index(6L)});
  CHECK(s.entries[0].value.contains(cplx(0, 0)));
  CHECK(s.entries[1].value.contains(cplx(64, 0)));
}

TEST_CASE("weighted shift orbits") {
  WeightedShift F;
  F.kind = ShiftKind::Forward;
  F.weights.value = 2.0;
  F.bound = 2.0;
  DualPair p;
  p.x = {1.0, 0.0, 0.0, 0.0};
  p.f = {0.0, 0.0, 0.0, 1.0};
  auto s = orbit(F, p, {Index(2L), Index(3L), Index(4L)});
  CHECK(s.entries[0].value.contains(cplx(0, 0)));
  CHECK(s.entries[1].value.contains(cplx(8, 0)));
  CHECK(s.entries[2].value.contains(cplx(0, 0)));

  WeightedShift B;
  B.kind = ShiftKind::Backward;
  B.weights.type = "harmonic";
  B.weights.a = 1;
  B.weights.b = 1;
  B.bound = 2;
  DualPair q;
  q.x = {0.0, 0.0, 1.0};
  q.f = {1.0, 0.0, 0.0};
  auto r = orbit(B, q, {Index(2L)});
  // B^2 e_2 = w_2 w_1 e_0 = 3/2 * 2
  CHECK(r.entries[0].value.contains(cplx(3, 0)));
}

TEST_CASE("shift_norm examples") {
  WeightedShift one;
  one.weights.value = 1.0;
  auto a = shift_norm(one, 7, 50);
  CHECK(a.lower == doctest::Approx(1.0));
  CHECK(a.upper == doctest::Approx(1.0));
  CHECK_FALSE(a.truncated);

  WeightedShift two;
  two.weights.value = 2.0;
  two.bound = 2.0;
  auto b = shift_norm(two, 5, 10);
  CHECK(b.lower == doctest::Approx(32.0));
  CHECK(b.upper == doctest::Approx(32.0));

  WeightedShift h;
  h.weights.type = "harmonic";
  h.weights.a = 1;
  h.weights.b = 1;
  h.bound = 2;
  auto c = shift_norm(h, 100, 1000);
  CHECK(c.lower == doctest::Approx(101.0).epsilon(1e-10));
  CHECK(c.argmax == 1);
  CHECK(c.truncated);
}

TEST_CASE("shift_norm lower bound grows with the window") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int t = 0; t < 50; ++t) {
    WeightedShift s;
    s.weights.type = "list";
    for (int k = 0; k < 60; ++k) s.weights.values.emplace_back(u(rng), 0.0);
    s.weights.value = u(rng);
    s.bound = s.weights.bound();
    for (long n : {1L, 3L, 10L}) {
      double prev = 0;
      for (long w = 1; w <= 80; w += 7) {
        double lo = shift_norm(s, n, w).lower;
        CHECK(lo >= prev);
        prev = lo;
      }
    }
  }
}
