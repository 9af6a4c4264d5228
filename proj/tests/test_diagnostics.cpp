#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "numcyc/diagnostics.hpp"
#include "numcyc/errors.hpp"
#include "numcyc/funny.hpp"

using namespace numcyc;

namespace {

ExactDiagonal diag2(Rat r1, Angle a1, Rat r2, Angle a2) {
  ExactDiagonal D;
  D.entries = {ExactEntry(std::move(r1), std::move(a1)), ExactEntry(std::move(r2), std::move(a2))};
  return D;
}

std::vector<Sample> aq1_prefix(long N) {
  FunnyParams fp;
  fp.p = 3;
  fp.K = 3;
  fp.w.kind = "spiral";
  FunnyOperator op = make_aq1(fp);
  OrbitOptions opt;
  opt.tol = 1e-12;
  return samples_of(orbit_range(op.T, op.x0, 0, N, opt));
}

std::vector<cplx> rotation(double theta, long N) {
  std::vector<cplx> z;
  for (long n = 0; n <= N; ++n) z.push_back(std::polar(1.0, M_PI * std::fmod(theta * static_cast<double>(n), 2.0)));
  return z;
}

}  // namespace

TEST_CASE("coverage extremes") {
  CoverageReport c = coverage({}, 4.0, 0.25);
  CHECK(c.hit == 0);
  CHECK(c.hit_fraction == 0.0);
  CHECK(c.cells > 0);
  // a point at every cell center
  std::vector<cplx> centers;
  const int M = 32;
  for (int j = 0; j < M; ++j) {
    for (int i = 0; i < M; ++i) {
      double x = -4.0 + (i + 0.5) * 0.25, y = -4.0 + (j + 0.5) * 0.25;
      if (x * x + y * y <= 16.0) centers.emplace_back(x, y);
    }
  }
  c = coverage(samples_of(centers));
  CHECK(c.hit == c.cells);
  CHECK(c.hit_fraction == 1.0);
  CHECK(c.uncovered.empty());
  CHECK(static_cast<long>(centers.size()) == c.cells);
  // points outside the disk never count
  c = coverage(samples_of(std::vector<cplx>{{3.99, 3.99}, {100, 0}}));
  CHECK(c.hit == 0);
  CHECK_THROWS_AS(coverage({}, 0.0, 0.25), InvalidInput);
}

TEST_CASE("coverage curve is monotone on an aq1 prefix") {
  auto pts = aq1_prefix(200);
  std::vector<long> lens{0, 10, 50, 100, 150, 201};
  auto f = coverage_curve(pts, lens);
  REQUIRE(f.size() == lens.size());
  CHECK(f[0] == 0.0);
  for (std::size_t i = 1; i < f.size(); ++i) CHECK(f[i] >= f[i - 1]);
  CHECK(f.back() == doctest::Approx(coverage(pts).hit_fraction));
  // dense rotation orbit on the unit circle fills its ring of cells
  auto rot = samples_of(rotation(std::sqrt(2.0), 20000));
  auto g = coverage_curve(rot, {100, 1000, 20000});
  CHECK(g[0] <= g[1]);
  CHECK(g[1] <= g[2]);
  CHECK(g[2] > 0.0);
}

TEST_CASE("escape profile") {
  // diag(2, 3) with x = (1, 0): |<T^n x, x>| = 2^n
  ExactDiagonal D = diag2(2, Angle(Rat(0)), 3, Angle(Rat(0)));
  DualPair e1 = pair_from_weights(std::vector<Rat>{1, 0});
  auto esc = escape_profile(samples_of(orbit_range(D, e1, 0, 200)));
  CHECK(esc.verdict == EscapeKind::Escaping);
  CHECK(std::fabs(esc.rate - std::log(2.0)) <= 0.01 * std::log(2.0));
  CHECK(esc.outliers.empty());
  // far beyond double range the scaled values still carry log|z|
  auto far = escape_profile(samples_of(orbit_range(D, e1, 1990, 2100)));
  CHECK(far.verdict == EscapeKind::Escaping);
  CHECK(std::fabs(far.rate - std::log(2.0)) <= 0.01 * std::log(2.0));

  ExactDiagonal I = diag2(1, Angle(Rat(0)), 1, Angle(Rat(0)));
  DualPair both = pair_from_weights(std::vector<Rat>{Rat(1, 2), Rat(1, 2)});
  auto bd = escape_profile(samples_of(orbit_range(I, both, 0, 100)));
  CHECK(bd.verdict == EscapeKind::Bounded);
  CHECK(std::fabs(bd.rate) < 1e-12);

  auto mixed = escape_profile(aq1_prefix(300));
  CHECK(mixed.verdict == EscapeKind::Mixed);
  CHECK_FALSE(mixed.outliers.empty());
  CHECK_THROWS_AS(escape_profile(samples_of(std::vector<cplx>(5, 1.0))), InvalidInput);
}

TEST_CASE("return times") {
  auto flat = samples_of(std::vector<cplx>(50, cplx(1, 0)));
  GapReport g = return_times(flat, 2.0);
  CHECK(g.A.size() == 50);
  CHECK(g.max_gap == 1);
  CHECK(g.gaps_bounded);

  // 1 + e^{i pi sqrt2 n} is small on a syndetic set
  auto rot = rotation(std::sqrt(2.0), 100000);
  for (auto& z : rot) z += 1.0;
  auto pts = samples_of(rot);
  g = return_times(pts, 0.1);
  CHECK_FALSE(g.A.empty());
  CHECK(g.gaps_bounded);
  CHECK(g.max_gap < 200);
  // larger thresholds only add returns
  long last = std::numeric_limits<long>::max();
  for (double C : {0.05, 0.1, 0.3, 1.0, 2.5}) {
    GapReport h = return_times(pts, C);
    CHECK(h.max_gap <= last);
    last = h.max_gap;
  }
  CHECK(last == 1);

  // escaping orbit: no returns, the whole range is one gap
  g = return_times(samples_of(std::vector<cplx>(10, cplx(5, 0))), 1.0);
  CHECK(g.A.empty());
  CHECK(g.max_gap == 11);
  CHECK_FALSE(g.gaps_bounded);
  CHECK(gaps_csv(return_times(flat, 2.0)).rfind("n,gap\n0,1\n", 0) == 0);
}

TEST_CASE("line confinement") {
  // +-e^{i pi/4} R is one line
  std::vector<cplx> diag;
  for (int k = 1; k <= 20; ++k) diag.push_back(std::polar((k % 2 ? 1.0 : -1.0) * k, M_PI / 4));
  diag.push_back(0);
  LineReport r = line_confinement(samples_of(diag), 1, 1e-9);
  CHECK(r.confined);
  REQUIRE(r.lines.size() == 1);
  CHECK(r.lines[0] == doctest::Approx(M_PI / 4));
  CHECK(r.zeros == 1);

  // r = 2 with angles of order 8
  ExactDiagonal D = diag2(2, Angle(Rat(1, 4)), 2, Angle(Rat(3, 4)));
  DualPair both = pair_from_weights(std::vector<Rat>{Rat(1, 2), Rat(1, 2)});
  auto pts = samples_of(orbit_range(D, both, 0, 60));
  r = line_confinement(pts, 8, 1e-6);
  CHECK(r.confined);
  CHECK(r.lines.size() <= 8);

  // a dense rotation is not confined
  r = line_confinement(samples_of(rotation(std::sqrt(2.0), 5000)), 8, 0.01);
  CHECK_FALSE(r.confined);
  CHECK_THROWS_AS(line_confinement(samples_of(diag), 20, 0.1), InvalidInput);
  CHECK_THROWS_AS(line_confinement(samples_of(diag), 1, 0.0), InvalidInput);
}

TEST_CASE("r scan") {
  Angle z = Angle::symbolic("sqrt2"), w = Angle::symbolic("sqrt3");
  auto rows = r_scan(z, w, {0.5, 1.0, 1.5}, 2000);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].r == 0.5);
  // r < 1 collapses to the origin, r = 1 spreads over the disk of radius 2
  CHECK(rows[0].cov.hit < rows[1].cov.hit);
  for (const auto& row : rows) CHECK(row.cov.prefix == 2001);
  std::string csv = r_scan_csv(rows);
  CHECK(csv.rfind("r,cells,hit,hit_fraction\n0.5,", 0) == 0);
  CHECK_THROWS_AS(r_scan(z, w, {}, 10), InvalidInput);
  CHECK_THROWS_AS(r_scan(z, w, {-1.0}, 10), InvalidInput);
}

TEST_CASE("csv and svg output") {
  ExactDiagonal D = diag2(2, Angle(Rat(1, 2)), 3, Angle(Rat(0)));
  DualPair both = pair_from_weights(std::vector<Rat>{Rat(1, 2), Rat(1, 2)});
  auto s = orbit_range(D, both, 0, 3);
  std::string csv = orbit_csv(s);
  CHECK(csv.rfind("n,re,im,rad,log_abs\n0,1,0,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  // past double range only log|value| is printed: (3^2000 + (2i)^2000) / 2
  std::string far = orbit_csv(orbit_range(D, both, 2000, 2000));
  auto row = far.substr(far.find('\n') + 1);
  CHECK(row.rfind("2000,,,,", 0) == 0);
  CHECK(std::abs(std::stod(row.substr(8)) - (2000 * std::log(3.0) - std::log(2.0))) < 1e-9);
  auto pts = samples_of(s);
  std::string a = scatter_svg(pts), b = scatter_svg(pts);
  CHECK(a == b);
  CHECK(a.rfind("<svg ", 0) == 0);
  CHECK(a.find("</svg>") != std::string::npos);
  CHECK(coverage_csv({1, 2}, {0.5, 0.75}) == "prefix,hit_fraction\n1,0.5\n2,0.75\n");
}
