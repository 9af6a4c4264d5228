#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "numcyc/classify.hpp"
#include "numcyc/errors.hpp"

using namespace numcyc;

namespace {

ExactEntry ent(Rat r, const std::string& label) { return ExactEntry(std::move(r), Angle::symbolic(label)); }
ExactEntry ent(Rat r, Rat a = 0) { return ExactEntry(std::move(r), Angle(std::move(a))); }

ExactDiagonal diag(std::vector<ExactEntry> e) {
  ExactDiagonal D;
  D.entries = std::move(e);
  return D;
}

DenseMatrix remark_c2() {
  std::vector<ExactEntry> e(4);
  e[0] = ent(2, "log2");
  e[1] = ent(1);
  e[3] = ent(2, "log3");
  return DenseMatrix::from_exact(2, e);
}

DenseMatrix remark_c4() {
  std::vector<ExactEntry> e(16);
  e[0] = ent(1, "log2");
  e[1] = ent(1);
  e[5] = ent(1, "log2");
  e[10] = ent(1, "log3");
  e[11] = ent(1);
  e[15] = ent(1, "log3");
  return DenseMatrix::from_exact(4, e);
}

WeightedShift shift(double a, double b, const char* type, ShiftKind kind = ShiftKind::Backward) {
  WeightedShift s;
  s.kind = kind;
  s.weights.type = type;
  s.weights.value = a;
  s.weights.a = a;
  s.weights.b = b;
  s.bound = s.weights.bound();
  return s;
}

}  // namespace

TEST_CASE("independence oracle") {
  auto r = independence({Angle::rational(1, 2), Angle::rational(1, 3)});
  CHECK(r.status == IndepStatus::Dependent);
  CHECK(r.relation == std::vector<Int>{4, 0});

  r = independence({Angle::symbolic("log2"), Angle::symbolic("log8")});
  CHECK(r.status == IndepStatus::Dependent);
  CHECK(r.relation == std::vector<Int>{3, -1});

  r = independence({Angle::symbolic("log2"), Angle::symbolic("log3")}, 10000);
  CHECK(r.status == IndepStatus::Independent);

  // 1/2 + log2 and log2: relation 4 (1/2 + log2) - 4 log2 = 2
  Angle a = Angle::symbolic("log2") + Angle::rational(1, 2);
  r = independence({a, Angle::symbolic("log2")});
  CHECK(r.status == IndepStatus::Dependent);
  CHECK(r.relation == std::vector<Int>{4, -4});

  // classes differ: only a search
  r = independence({Angle::symbolic("log2"), Angle::symbolic("sqrt2")}, 1000);
  CHECK(r.status == IndepStatus::LikelyIndependent);
  CHECK(r.H == 1000);

  // numeric labels: a + b = 1 is found but cannot be proved
  Angle u(SymbolicAngle::parse("u", "", "0.2071067811865475244008443621"));
  Angle v(SymbolicAngle::parse("v", "", "0.7928932188134524755991556379"));
  r = independence({u, v});
  CHECK(r.status == IndepStatus::Unknown);
  CHECK(r.relation == std::vector<Int>{2, 2});

  // finite lacunary sums are torsion
  Lacunary l;
  l.p = 2;
  l.ladder = std::make_shared<Ladder>(2);
  l.terms.push_back({Int(1), Exponent(5)});
  r = independence({Angle(l)});
  CHECK(r.status == IndepStatus::Dependent);
  CHECK(r.relation == std::vector<Int>{64});

  CHECK_THROWS_AS(independence({}), InvalidInput);
}

TEST_CASE("dependent relations verify exactly") {
  std::mt19937 g(7);
  const char* labels[] = {"log2", "log3", "log4", "log6", "log8", "log9", "log12"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Angle> as;
    int k = 1 + static_cast<int>(g() % 3);
    for (int j = 0; j < k; ++j) {
      Angle x = Angle::symbolic(labels[g() % 7]) * Int(static_cast<long>(g() % 5) + 1);
      if (g() % 2) x = x + Angle::rational(static_cast<long>(g() % 7), static_cast<long>(g() % 6) + 1);
      as.push_back(x);
    }
    auto r = independence(as);
    if (r.status != IndepStatus::Dependent) continue;
    Angle s;
    for (int j = 0; j < k; ++j) s = s + as[static_cast<std::size_t>(j)] * r.relation[static_cast<std::size_t>(j)];
    CHECK(angle_zero_mod2(s) == true);
  }
}

TEST_CASE("lll shortens a skewed basis") {
  std::vector<std::vector<Int>> b{{1, 0, 0, 31416}, {0, 1, 0, 27183}, {0, 0, 1, 14142}};
  auto r = lll_reduce(b);
  Int n0 = 0;
  for (const auto& x : r[0]) n0 += x * x;
  CHECK(n0 < 31416 * 31416);
}

TEST_CASE("2x2 characterization") {
  C2Result r = classify_c2(remark_c2());
  CHECK(r.wnh.value == Tri::Yes);
  CHECK(r.nh.value == Tri::Yes);
  CHECK(r.nh.rule == "2dim");
  CHECK(r.snh.value == Tri::Unknown);

  r = classify_c2(diag({ent(3), ent(2)}));
  CHECK(r.wnh.value == Tri::No);
  CHECK(r.nh.value == Tri::No);

  r = classify_c2(diag({ent(1, "log2"), ent(1, "log3")}));
  CHECK(r.wnh.value == Tri::No);
  CHECK(r.wnh.rule == "ele.1");

  // normal with independent angles: NH iff SNH, left open
  r = classify_c2(diag({ent(2, "log2"), ent(2, "log3")}));
  CHECK(r.wnh.value == Tri::Yes);
  CHECK(r.nh.value == Tri::Unknown);

  // dependent angles
  r = classify_c2(diag({ent(2, "log2"), ent(2, "log4")}));
  CHECK(r.wnh.value == Tri::No);

  // a double eigenvalue
  r = classify_c2(DenseMatrix::from_rows({{2.0, 1.0}, {0.0, 2.0}}));
  CHECK(r.wnh.value == Tri::No);

  CHECK_THROWS_AS(classify_c2(diag({ent(2), ent(2), ent(2)})), DimensionMismatch);
}

TEST_CASE("3x3 weak characterization") {
  CHECK(classify_c3_wnh(diag({ent(2, "log2"), ent(2, "log3"), ent(2, "log5")})).value == Tri::Yes);
  CHECK(classify_c3_wnh(diag({ent(4), ent(2, "log2"), ent(2, "log3")})).value == Tri::Yes);
  CHECK(classify_c3_wnh(diag({ent(4), ent(3), ent(2)})).value == Tri::No);
  // second disjunct: l1, l2 dependent, l1/l2 of infinite order, l3 independent of l1
  Verdict v = classify_c3_wnh(diag({ent(3, "log2"), ent(3, "log4"), ent(2, "log3")}));
  CHECK(v.value == Tri::Yes);
  CHECK(v.detail.find("second disjunct") != std::string::npos);
  // same, but l3 below 1
  CHECK(classify_c3_wnh(diag({ent(3, "log2"), ent(3, "log4"), ent(Rat(1, 2), "log3")})).value == Tri::No);
}

TEST_CASE("remark examples get the expected provenance") {
  Classification c = classify(remark_c2());
  CHECK(c.nh.value == Tri::Yes);
  CHECK(c.nh.rule == "2dim");
  CHECK(c.wnh.value == Tri::Yes);

  c = classify(diag({ent(2, "log2"), ent(2, "log3"), ent(2, "log5")}));
  CHECK(c.snh.value == Tri::Yes);
  CHECK(c.snh.rule == "suffsnh.2");
  CHECK(c.nh.value == Tri::Yes);
  CHECK(c.wnh.value == Tri::Yes);

  c = classify(remark_c4());
  CHECK(c.nh.value == Tri::Yes);
  CHECK(c.nh.rule == "suffnh1");
  REQUIRE(c.spectrum);
  CHECK(c.spectrum->points.size() == 2);
  for (const auto& p : c.spectrum->points) CHECK(p.defective == true);
}

TEST_CASE("sufficient conditions report") {
  SpectralData sd = spectral_data(OperatorSpec(diag({ent(2, "log2"), ent(2, "log3"), ent(2, "log5")})));
  auto rules = sufficient_conditions(sd);
  auto find = [&](const std::string& n) {
    for (const auto& r : rules) {
      if (r.rule == n) return r.status;
    }
    return Firing::Unknown;
  };
  CHECK(find("suffsnh.2") == Firing::Fired);
  CHECK(find("suffwnh.1") == Firing::Fired);
  CHECK(find("suffnh") == Firing::NotFired);  // diagonal: orthogonal eigenspaces
  CHECK(find("suffsnh.1") == Firing::NotFired);
  CHECK(find("ele.1") == Firing::NotFired);

  sd = spectral_data(OperatorSpec(diag({ent(Rat(1, 2), "log2"), ent(1, Rat(1, 3))})));
  rules = sufficient_conditions(sd);
  for (const auto& r : rules) {
    if (r.conclusion == "WNH" || r.conclusion == "NH" || r.conclusion == "SNH") CHECK(r.status != Firing::Fired);
  }
  CHECK(find("ele.1") == Firing::Fired);

  // non-orthogonal eigenspaces: suffnh fires on the triangular example
  sd = spectral_data(OperatorSpec(remark_c2()));
  CHECK(sd.normal == false);
  CHECK(sd.non_orthogonal(0, 1) == true);
}

TEST_CASE("shifts") {
  CHECK(shift_classify(shift(2, 0, "constant"), 256).value == Tri::Yes);
  CHECK(shift_classify(shift(1, 0, "constant"), 256).value == Tri::No);
  Verdict h = shift_classify(shift(1, 1, "harmonic"), 1024);
  CHECK(h.value == Tri::Yes);
  CHECK(h.rule == "KPS2");
  CHECK(shift_classify(shift(0.5, 3, "harmonic"), 256).value == Tri::No);
  CHECK(shift_classify(shift(1, -2.5, "harmonic"), 256).value == Tri::No);
  CHECK(shift_classify(shift(2, 0, "constant", ShiftKind::Bilateral), 64).value == Tri::Yes);
  CHECK(shift_classify(shift(1, 1, "harmonic", ShiftKind::Forward), 64).value == Tri::Yes);
  CHECK_THROWS_AS(shift_classify(shift(2, 0, "constant"), 0), InvalidInput);
  // weights within the tie tolerance of 1 are not decided
  CHECK(shift_classify(shift(1 + 1e-12, 0, "constant"), 256).value == Tri::Unknown);
  CHECK(shift_classify(shift(1 - 1e-12, 0, "constant"), 256).value == Tri::Unknown);
  CHECK(shift_classify(shift(1, 1e-12, "harmonic"), 256).value == Tri::Unknown);
  CHECK(shift_classify(shift(1 + 1e-6, 0, "constant"), 256).value == Tri::Yes);

  Classification c = classify(shift(2, 0, "constant"));
  CHECK(c.snh.value == Tri::Yes);
  c = classify(shift(2, 0, "constant", ShiftKind::Forward));
  CHECK(c.nh.value == Tri::Yes);
  CHECK(c.snh.value == Tri::Unknown);
  c = classify(shift(1, 0, "constant"));
  CHECK(c.wnh.value == Tri::No);
  CHECK(c.snh.value == Tri::No);
}

TEST_CASE("closure membership") {
  CHECK(closure_membership(diag({ent(2), ent(Rat(1, 2))})).value == Tri::No);
  CHECK(closure_membership(diag({ent(2), ent(2)})).value == Tri::Yes);
  CHECK(closure_membership(diag({ent(Rat(1, 2)), ent(Rat(1, 3))})).value == Tri::No);
  // equal moduli, distinct eigenvalues
  CHECK(closure_membership(diag({ent(2, "log2"), ent(2, "log3")})).value == Tri::Yes);
  // Jordan block at modulus 1
  CHECK(closure_membership(DenseMatrix::from_rows({{1.0, 1.0}, {0.0, 1.0}})).value == Tri::Yes);
  // numeric eigensolve, well separated
  CHECK(closure_membership(DenseMatrix::from_rows({{1.0, 1.0}, {1.0, 1.0}})).value == Tri::No);
}

TEST_CASE("ties give UNKNOWN, never a flip") {
  ClassifyConfig cfg;
  auto at = [&](const Rat& r2) { return classify(diag({ent(2, "log2"), ent(r2, "log3")}), cfg); };
  CHECK(at(2).wnh.value == Tri::Yes);
  CHECK(at(Rat(2) + Rat(1, 10000000000000L)).wnh.value == Tri::Unknown);
  CHECK(at(Rat(2) + Rat(1, 1000000)).wnh.value == Tri::No);
  CHECK(at(Rat(2) + Rat(1, 10000000000000L)).closure.value == Tri::Unknown);
}

TEST_CASE("eigensolve path") {
  // eigenvalues 0 and 2
  SpectralData sd = spectral_data(OperatorSpec(DenseMatrix::from_rows({{1.0, 1.0}, {1.0, 1.0}})));
  CHECK(sd.source == "eigensolve");
  CHECK(sd.points.size() == 2);
  CHECK(classify_c2(DenseMatrix::from_rows({{1.0, 1.0}, {1.0, 1.0}})).wnh.value == Tri::No);
  // rotation by a numeric angle: equal moduli cannot be certified from doubles
  double t = 0.7;
  DenseMatrix rot = DenseMatrix::from_rows({{2 * std::cos(t), -2 * std::sin(t)}, {2 * std::sin(t), 2 * std::cos(t)}});
  CHECK(classify_c2(rot).wnh.value == Tri::Unknown);
}

TEST_CASE("perturbation into a steering certificate") {
  std::vector<Target> ts = grid_targets(5, 2, 5.0, 1e-6);
  SnhPerturbation p = approx_snh_perturbation(diag({ent(2), ent(2)}), ts, 0.1);
  CHECK(p.distance <= 0.1);
  REQUIRE(p.residuals.size() == ts.size());
  for (double r : p.residuals) CHECK(r <= 1e-6);
  CHECK_FALSE(p.unchanged);

  // carrying the certificate already
  SnhPerturbation q = approx_snh_perturbation(p.cert.diagonal(), ts, 0.1, &p.cert);
  CHECK(q.unchanged);
  for (double r : q.residuals) CHECK(r <= 1e-6);

  // diag(2, -2): n_j even, so the angle difference drops out
  SnhPerturbation m = approx_snh_perturbation(diag({ent(2), ent(2, 1)}), ts, 0.1);
  for (double r : m.residuals) CHECK(r <= 1e-6);

  CHECK_THROWS_AS(approx_snh_perturbation(diag({ent(2), ent(2)}), ts, 1e-30), Unreachable);
  CHECK_THROWS_AS(approx_snh_perturbation(diag({ent(2), ent(3)}), ts, 0.1), InvalidInput);

  // the certificate shows up as a finite certificate only
  Classification c = classify(p.cert.diagonal(), ClassifyConfig(), &p.cert);
  bool seen = false;
  for (const auto& r : c.rules) {
    if (r.rule == "suffsnh.1") seen = r.status == Firing::FiredWithFiniteCertificate;
  }
  CHECK(seen);
  CHECK(c.snh.value != Tri::Yes);
}

TEST_CASE("verdict consistency on random operators") {
  std::mt19937 g(11);
  const char* labels[] = {"log2", "log3", "log5", "log4", "sqrt2"};
  std::vector<OperatorSpec> specs;
  for (int t = 0; t < 150; ++t) {
    int n = 2 + static_cast<int>(g() % 3);
    std::vector<ExactEntry> e;
    for (int j = 0; j < n; ++j) {
      Rat r = std::vector<Rat>{Rat(1, 2), 1, 2, 2, 3}[g() % 5];
      if (g() % 2) {
        e.push_back(ent(r, labels[g() % 5]));
      } else {
        e.push_back(ent(r, Rat(static_cast<long>(g() % 6), 3)));
      }
    }
    specs.push_back(diag(e));
  }
  std::vector<Classification> cs = classify_batch(specs);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const Classification& c = cs[i];
    if (c.snh.value == Tri::Yes) CHECK(c.nh.value == Tri::Yes);
    if (c.nh.value == Tri::Yes) CHECK(c.wnh.value == Tri::Yes);
    if (c.wnh.value == Tri::No) CHECK(c.nh.value == Tri::No);
    if (c.wnh.value == Tri::Yes) CHECK(c.closure.value == Tri::Yes);
    CHECK(c.wnh.rule != "conflict");
    Classification again = classify(specs[i]);
    CHECK(again.wnh.value == c.wnh.value);
    CHECK(again.wnh.detail == c.wnh.detail);
  }
}
