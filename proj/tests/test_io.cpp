#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "numcyc/errors.hpp"
#include "numcyc/io.hpp"

using namespace numcyc;

namespace {

OperatorSpec reparse(const OperatorSpec& T) { return spec_from_json(json::parse(spec_to_json(T).dump())); }

WeightedShift shift_of(const char* type) {
  WeightedShift s;
  s.weights.type = type;
  if (std::string(type) == "harmonic") {
    s.weights.a = 1;
    s.weights.b = 1;
  } else if (std::string(type) == "list") {
    s.weights.values = {{2, 0}, {0.5, 0.25}};
    s.weights.value = 1.5;
  } else {
    s.weights.value = 2;
  }
  s.bound = s.weights.bound();
  return s;
}

}  // namespace

TEST_CASE("round trip of every operator kind") {
  std::vector<ExactEntry> e(4);
  e[0] = ExactEntry(2, Angle::symbolic("log2"));
  e[1] = ExactEntry(1, Angle(Rat(0)));
  e[3] = ExactEntry(2, Angle::symbolic("log3"));
  std::vector<OperatorSpec> specs;
  specs.push_back(DenseMatrix::from_exact(2, e));
  specs.push_back(DenseMatrix::from_rows({{1.0, cplx(0.1, -0.3)}, {1e-17, cplx(2, 1.0 / 3)}}));
  ExactDiagonal d;
  d.entries = {ExactEntry(Rat(1, 3), Angle::symbolic("sqrt8")), ExactEntry(3, Angle(Rat(-7, 5)))};
  d.entries.push_back(ExactEntry(2, Angle::symbolic("log2") + Angle(Rat(1, 2))));
  d.entries.push_back(ExactEntry(1, Angle(SymbolicAngle::parse("u", "", "0.318309886183790671537767526745"))));
  specs.push_back(d);
  specs.push_back(shift_of("constant"));
  specs.push_back(shift_of("harmonic"));
  WeightedShift fwd = shift_of("list");
  fwd.kind = ShiftKind::Bilateral;
  specs.push_back(fwd);

  FunnyParams fp;
  fp.p = 3;
  fp.K = 3;
  fp.w.kind = "spiral";
  specs.push_back(make_aq1(fp).T);
  specs.push_back(make_aq2().T);
  specs.push_back(torus_steer(RadiusSchedule{}, "znwn", grid_targets(2, 2, 5.0, 1e-6)).diagonal());

  for (const auto& T : specs) {
    OperatorSpec U = reparse(T);
    CHECK(same_spec(T, U));
    CHECK(spec_to_json(U) == spec_to_json(T));
  }
  // reparsed lacunary angles still evaluate to the same values
  auto U = std::get<ExactDiagonal>(reparse(specs[6]));
  const auto& V = std::get<ExactDiagonal>(specs[6]);
  for (std::size_t i = 0; i < U.entries.size(); ++i) {
    double e1 = 0, e2 = 0;
    Real a = U.entries[i].angle.value(256, &e1);
    Real b = V.entries[i].angle.value(256, &e2);
    CHECK(std::fabs((a - b).to_double()) <= e1 + e2);
  }
}

TEST_CASE("schema is strict") {
  json j = spec_to_json(shift_of("constant"));
  json bad = j;
  bad["color"] = "red";
  CHECK_THROWS_AS(spec_from_json(bad), InvalidInput);
  bad = j;
  bad.erase("schema_version");
  CHECK_THROWS_AS(spec_from_json(bad), InvalidInput);
  bad = j;
  bad["schema_version"] = 2;
  CHECK_THROWS_AS(spec_from_json(bad), InvalidInput);
  bad = j;
  bad["kind"] = "tensor";
  CHECK_THROWS_AS(spec_from_json(bad), InvalidInput);
  bad = j;
  bad["weights"]["value"] = "two";
  CHECK_THROWS_AS(spec_from_json(bad), InvalidInput);

  json d = json::parse(R"({"schema_version":1,"kind":"exact_diagonal",
    "entries":[{"radius":"2","angle":{"rational":"1/2","extra":1}}]})");
  CHECK_THROWS_AS(spec_from_json(d), InvalidInput);
  d = json::parse(R"({"schema_version":1,"kind":"exact_diagonal","entries":[{"radius":"2/0"}]})");
  CHECK_THROWS_AS(spec_from_json(d), InvalidInput);
  d = json::parse(R"({"schema_version":1,"kind":"dense","n":2,"rows":[[1,2],[3]]})");
  CHECK_THROWS_AS(spec_from_json(d), DimensionMismatch);
  d = json::parse(R"({"schema_version":1,"kind":"exact_diagonal","entries":[{"radius":"1","rel_to":0}]})");
  CHECK_THROWS_AS(spec_from_json(d), InvalidInput);
}

TEST_CASE("documented examples parse") {
  json d = json::parse(R"({"schema_version":1,"kind":"exact_diagonal","entries":[
      {"radius":"2","angle":{"symbolic":{"label":"log2","indep_class":"logs_of_primes"}}},
      {"radius":"3","angle":{"rational":"1/3"}},
      {"radius":"3","angle":{"rational":"1/3"},"rel_to":1,"delta":{"rational":"0"}}]})");
  auto T = std::get<ExactDiagonal>(spec_from_json(d));
  REQUIRE(T.entries.size() == 3);
  CHECK(T.entries[0].angle.sym().coef.at("log2") == 1);
  CHECK(T.entries[1].angle.rat() == Rat(1, 3));
  CHECK(T.entries[2].rel_to == 1);

  json list = ops_to_json({{"a", T}, {"b", shift_of("harmonic")}});
  auto back = ops_from_json(json::parse(list.dump()));
  REQUIRE(back.size() == 2);
  CHECK(back[0].name == "a");
  CHECK(same_spec(back[0].spec, T));
  CHECK(same_spec(back[1].spec, shift_of("harmonic")));
  // a single document reads as a list of one
  CHECK(ops_from_json(d).size() == 1);
}

TEST_CASE("pairs") {
  DualPair p = pair_from_weights(std::vector<Rat>{Rat(1, 3), Rat(2, 3)});
  DualPair q = pair_from_json(json::parse(pair_to_json(p).dump()));
  CHECK(*q.c_exact == *p.c_exact);
  CHECK(q.pi_certified);
  DualPair h = pair_from_json(json::parse(R"({"schema_version":1,"x":[[0.6,0],[0,0.8]]})"));
  CHECK(h.pi_certified);
  CHECK(std::abs(h.apply(h.x) - 1.0) < 1e-12);
  CHECK_THROWS_AS(pair_from_json(json::parse(R"({"schema_version":1,"weights":["1/2","1/3"]})")), InvalidInput);
  CHECK_THROWS_AS(pair_from_json(json::parse(R"({"weights":["1/2","1/2"]})")), InvalidInput);
  CHECK_THROWS_AS(pair_from_json(json::parse(R"({"schema_version":1,"x":[[1,0]],"f":[]})")), DimensionMismatch);
}

TEST_CASE("atomic writes") {
  std::string path = "numcyc_io_test.json";
  write_atomic(path, "{\"a\":1}");
  CHECK(read_json_file(path)["a"] == 1);
  write_atomic(path, "{\"a\":2}");
  CHECK(read_json_file(path)["a"] == 2);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_json_file(path), InvalidInput);
  CHECK_THROWS_AS(write_atomic("/nonexistent-dir/x.json", "{}"), InvalidInput);
}
