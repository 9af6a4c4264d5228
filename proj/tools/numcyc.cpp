#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "numcyc/classify.hpp"
#include "numcyc/diagnostics.hpp"
#include "numcyc/errors.hpp"
#include "numcyc/funny.hpp"
#include "numcyc/io.hpp"
#include "numcyc/operators.hpp"
#include "numcyc/suites.hpp"
#include "numcyc/witness.hpp"

using namespace numcyc;

namespace {

// ---- argument parsing ----

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Rat parse_rat(const std::string& s) {
  Rat q;
  if (s.empty() || q.set_str(s, 10) != 0 || q.get_den() == 0) throw InvalidInput("bad rational '" + s + "'");
  q.canonicalize();
  return q;
}

// Integer counts also accept scientific notation such as 1e6.
long parse_count(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidInput(what + ": not a number '" + s + "'");
  }
  if (used != s.size() || v < 1 || v > 9e15 || v != std::floor(v)) throw InvalidInput(what + ": expected a positive integer");
  return static_cast<long>(v);
}

// "a..b" or a single value a.
std::pair<long, long> parse_range(const std::string& s, const std::string& what) {
  auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      long v = std::stol(s);
      return {v, v};
    }
    long a = std::stol(s.substr(0, dots)), b = std::stol(s.substr(dots + 2));
    if (b < a) throw InvalidInput(what + ": empty range '" + s + "'");
    return {a, b};
  } catch (const std::logic_error&) {
    throw InvalidInput(what + ": expected a..b, got '" + s + "'");
  }
}

// "re,im;re,im;..." with rational parts.
std::vector<QComplex> parse_qpoints(const std::string& s) {
  std::vector<QComplex> out;
  for (const auto& pt : split(s, ';')) {
    auto parts = split(pt, ',');
    if (parts.size() != 2) throw InvalidInput("point '" + pt + "' must be re,im");
    out.push_back(QComplex{parse_rat(parts[0]), parse_rat(parts[1])});
  }
  if (out.empty()) throw InvalidInput("no points given");
  return out;
}

// "gridCxR" for a C by R grid, or explicit points.
std::vector<Target> parse_targets(const std::string& s, double radius, double eps) {
  if (s.rfind("grid", 0) == 0) {
    auto x = s.find('x');
    if (x == std::string::npos) throw InvalidInput("targets: expected gridCxR");
    int c = static_cast<int>(parse_count(s.substr(4, x - 4), "grid columns"));
    int r = static_cast<int>(parse_count(s.substr(x + 1), "grid rows"));
    return grid_targets(c, r, radius, eps);
  }
  std::vector<Target> out;
  for (const auto& q : parse_qpoints(s)) out.push_back(Target{q.approx(), eps});
  return out;
}

Angle parse_angle(const std::string& s) { return angle_from_json(json(s), LadderTable()); }

// ---- files ----

void emit(const std::string& content, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << '\n';
  } else {
    write_atomic(path, content);
  }
}

void emit(const json& j, const std::string& path) { emit(j.dump(2) + "\n", path); }

json with_version(json j) {
  if (j.is_object() && !j.contains("schema_version")) j["schema_version"] = kSchemaVersion;
  return j;
}

OperatorSpec load_spec(const std::string& path, const std::string& name) {
  auto ops = ops_from_json(read_json_file(path));
  if (name.empty()) {
    if (ops.size() != 1) throw InvalidInput(path + " holds " + std::to_string(ops.size()) + " operators; pick one with --name");
    return ops[0].spec;
  }
  for (auto& o : ops) {
    if (o.name == name) return o.spec;
  }
  throw InvalidInput("no operator named '" + name + "' in " + path);
}

// A pair file, or comma separated rational weights c_j.
DualPair load_pair(const std::string& arg) {
  if (std::filesystem::exists(arg)) return pair_from_json(read_json_file(arg));
  std::vector<Rat> c;
  for (const auto& s : split(arg, ',')) c.push_back(parse_rat(s));
  if (c.empty()) throw InvalidInput("pair: no weights given");
  return pair_from_weights(c);
}

std::shared_ptr<const Ladder> ladder_of(const OperatorSpec& T) {
  if (const auto* d = std::get_if<ExactDiagonal>(&T)) {
    for (const auto& e : d->entries) {
      if (e.angle.is_lacunary()) return e.angle.lac().ladder;
    }
  }
  throw InvalidInput("--atoms needs an exact diagonal with lacunary angles");
}

PrecisionPolicy policy(long bits) {
  PrecisionPolicy p = PrecisionPolicy::from_env();
  if (bits > 0) {
    if (bits < 32) throw InvalidInput("--precision-bits must be at least 32");
    p.start_bits = bits;
    if (p.max_bits < bits) p.max_bits = bits;
  }
  return p;
}

// ---- orbit source shared by orbit, scan and report ----

struct OrbitArgs {
  std::string in, name, pair, range = "0..1000", atoms;
  double tol = 1e-10;
  bool exact = false;

  void attach(CLI::App* c, bool with_atoms) {
    c->add_option("--in", in, "operator document")->required();
    c->add_option("--name", name, "operator name inside a list document");
    c->add_option("--pair", pair, "pair document, or rational weights c1,c2,...")->required();
    c->add_option("--range", range, "indices a..b");
    if (with_atoms) c->add_option("--atoms", atoms, "ladder atoms j1,j2,... used as indices instead of --range");
    c->add_option("--tol", tol, "relative tolerance of orbit values");
    c->add_flag("--exact", exact, "evaluate every value at high precision");
  }

  OrbitSeries run(long bits) const {
    OperatorSpec T = load_spec(in, name);
    DualPair p = load_pair(pair);
    OrbitOptions opt;
    opt.tol = tol;
    opt.policy = policy(bits);
    opt.force_exact = exact;
    if (!atoms.empty()) {
      auto lad = ladder_of(T);
      std::vector<Index> idx;
      for (const auto& a : split(atoms, ',')) {
        long j = std::stol(a);
        if (j < 0 || j >= lad->size()) throw InvalidInput("atom " + a + " is not in the ladder");
        idx.push_back(Index::atom(lad, static_cast<int>(j)));
      }
      return orbit(T, p, idx, opt);
    }
    auto [a, b] = parse_range(range, "--range");
    if (a < 0) throw InvalidInput("--range must start at 0 or later");
    return orbit_range(T, p, a, b, opt);
  }
};

json escape_json(const EscapeReport& e) {
  return json{{"schema_version", kSchemaVersion},
              {"verdict", to_string(e.verdict)},
              {"rate", e.rate},
              {"intercept", e.intercept},
              {"envelope_rate", e.envelope_rate},
              {"outliers", e.outliers}};
}

json lines_json(const LineReport& l) {
  return json{{"schema_version", kSchemaVersion}, {"confined", l.confined}, {"lines", l.lines}, {"zeros", l.zeros}};
}

int suite_exit(const SuiteReport& r, const std::string& out) {
  emit(to_json(r), out);
  std::cerr << r.suite << ": " << (r.ok ? "PASS" : "FAIL") << " (" << r.checks.size() << " checks, "
            << r.failures() << " failed)\n";
  for (const auto& c : r.checks) {
    if (!c.ok) std::cerr << "  failed: " << c.name << ": " << c.detail << "\n";
  }
  return r.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical orbits of linear operators: construction, classification, witnesses"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  long bits = 0;
  app.add_option("--precision-bits", bits, "starting working precision (overrides NUMCYC_PRECISION_BITS)");

  std::function<int()> action;

  // construct
  auto* construct = app.add_subcommand("construct", "build an operator or funny-number artifacts");
  construct->require_subcommand(1);
  int p = 3, q = 3, depth = 3, p_aq2 = 7, depth_aq2 = 2;
  std::string w_kind = "constant", out, pair_out, pair2_out, targets, name;
  bool list = false;

  auto* c_funny = construct->add_subcommand("funny", "funny-number artifacts");
  c_funny->add_option("--p", p, "odd prime");
  c_funny->add_option("--depth", depth, "number of terms K");
  c_funny->add_option("--w", w_kind, "target sequence: constant | spiral | spiral_right | spiral_left");
  c_funny->add_option("--out", out, "output file (stdout when absent)");
  c_funny->callback([&] {
    action = [&] {
      FunnyParams fp;
      fp.p = p;
      fp.K = depth;
      fp.w.kind = w_kind;
      fp.policy = policy(bits);
      emit(funny_to_json(build(fp)), out);
      return 0;
    };
  });

  auto* c_aq1 = construct->add_subcommand("aq1", "2x2 diagonal with returning orbit");
  c_aq1->add_option("--p", p, "odd prime");
  c_aq1->add_option("--depth", depth, "number of terms K");
  c_aq1->add_option("--w", w_kind, "target sequence")->default_str("spiral");
  c_aq1->add_option("--out", out, "operator file");
  c_aq1->add_option("--pair-out", pair_out, "pair file");
  c_aq1->callback([&] {
    action = [&] {
      FunnyParams fp;
      fp.p = p;
      fp.K = depth;
      fp.w.kind = c_aq1->count("--w") ? w_kind : "spiral";
      fp.policy = policy(bits);
      FunnyOperator op = make_aq1(fp);
      emit(spec_to_json(OperatorSpec(op.T)), out);
      if (!pair_out.empty()) emit(pair_to_json(op.x0), pair_out);
      return 0;
    };
  });

  auto* c_aq2 = construct->add_subcommand("aq2", "4x4 diagonal with two returning pairs");
  c_aq2->add_option("--p", p_aq2, "larger prime");
  c_aq2->add_option("--q", q, "smaller prime");
  c_aq2->add_option("--depth", depth_aq2, "number of terms K");
  c_aq2->add_option("--out", out, "operator file");
  c_aq2->add_option("--pair-out", pair_out, "pair x file");
  c_aq2->add_option("--pair2-out", pair2_out, "pair y file");
  c_aq2->callback([&] {
    action = [&] {
      Aq2Operator op = make_aq2(p_aq2, q, depth_aq2);
      emit(spec_to_json(OperatorSpec(op.T)), out);
      if (!pair_out.empty()) emit(pair_to_json(op.x), pair_out);
      if (!pair2_out.empty()) emit(pair_to_json(op.y), pair2_out);
      return 0;
    };
  });

  auto* c_pno = construct->add_subcommand("pno", "diagonal whose orbit visits given points");
  c_pno->add_option("--targets", targets, "rational points re,im;re,im;...")->required();
  c_pno->add_option("--p", p, "odd prime");
  c_pno->add_option("--out", out, "operator file");
  c_pno->add_option("--pair-out", pair_out, "pair file");
  c_pno->callback([&] {
    action = [&] {
      FunnyOperator op = make_pno(parse_qpoints(targets), p);
      emit(spec_to_json(OperatorSpec(op.T)), out);
      if (!pair_out.empty()) emit(pair_to_json(op.x0), pair_out);
      json idx = json::array();
      for (int k : op.target_index) idx.push_back(k);
      std::cerr << "target indices nu_k, k = " << idx.dump() << "\n";
      return 0;
    };
  });

  auto* c_ex = construct->add_subcommand("examples", "named example operators");
  c_ex->add_option("--name", name, "one example; all of them as a list when absent");
  c_ex->add_flag("--list", list, "print the names only");
  c_ex->add_option("--out", out, "output file");
  c_ex->callback([&] {
    action = [&] {
      if (list) {
        for (const auto& n : example_names()) std::cout << n << "\n";
        return 0;
      }
      if (!name.empty()) {
        emit(spec_to_json(named_example(name)), out);
        return 0;
      }
      std::vector<NamedSpec> ops;
      for (const auto& n : example_names()) ops.push_back(NamedSpec{n, named_example(n)});
      emit(ops_to_json(ops), out);
      return 0;
    };
  });

  // verify
  auto* verify = app.add_subcommand("verify", "run a verification suite; nonzero exit iff a check fails");
  std::string suite, k_range = "1..4", n_range, samples = "1000000", trials = "10000", count_s;
  long N = 0;
  std::uint64_t seed = 1, seed_dd = 4;
  verify->add_option("suite", suite, "linuk | linnuk | linuk11 | aq1 | aq2 | penta | arcsin | funny | steer | ddiaa | battery | consistency")
      ->required()
      ->check(CLI::IsMember({"linuk", "linnuk", "linuk11", "aq1", "aq2", "penta", "arcsin", "funny", "steer", "ddiaa",
                             "battery", "consistency"}));
  verify->add_option("--p", p, "prime (aq2: larger prime, default 7)");
  verify->add_option("--q", q, "smaller prime for aq2");
  verify->add_option("--k", k_range, "term range 1..K");
  verify->add_option("--N", N, "scan length");
  verify->add_option("--n-range", n_range, "aq1 escape indices a..b (default 10..2000)");
  verify->add_option("--samples", samples, "Monte Carlo or calibration samples");
  verify->add_option("--trials", trials, "penta solves");
  verify->add_option("--count", count_s, "random operators (consistency) or targets (ddiaa)");
  verify->add_option("--seed", seed, "seed of every random choice");
  verify->add_option("--out", out, "report file (stdout when absent)");
  verify->callback([&] {
    action = [&] {
      auto [k_lo, k_hi] = parse_range(k_range, "--k");
      if (k_lo != 1 || k_hi < 1) throw InvalidInput("--k must be a range 1..K");
      int K = static_cast<int>(k_hi);
      bool has_p = verify->count("--p") > 0, has_q = verify->count("--q") > 0;
      SuiteReport r;
      if (suite == "linuk") r = suite_linuk(has_p ? p : 3, K);
      else if (suite == "linuk11") r = suite_linuk11(has_p ? p : 3, K);
      else if (suite == "linnuk") r = suite_linnuk(has_p ? p : 3, N > 0 ? N : 10000);
      else if (suite == "aq1") {
        auto [a, b] = parse_range(n_range.empty() ? "10..2000" : n_range, "--n-range");
        r = suite_aq1(verify->count("--k") ? K : 3, a, b);
      } else if (suite == "aq2") r = suite_aq2(has_p ? p : 7, has_q ? q : 3, verify->count("--k") ? K : 2, N > 0 ? N : 1000);
      else if (suite == "arcsin") r = suite_arcsin(parse_count(samples, "--samples"), seed);
      else if (suite == "penta") {
        long cal = verify->count("--samples") ? parse_count(samples, "--samples") : 2000;
        r = suite_penta(parse_count(trials, "--trials"), cal, seed);
      } else if (suite == "funny") {
        r = suite_funny(has_p ? std::vector<int>{p} : std::vector<int>{3, 5}, verify->count("--k") ? K : 5);
      } else if (suite == "steer") r = suite_steer(2, 1e-6);
      else if (suite == "ddiaa") {
        r = suite_ddiaa(count_s.empty() ? 10 : static_cast<int>(parse_count(count_s, "--count")), 1e-8,
                        verify->count("--seed") ? seed : 4);
      } else if (suite == "battery") r = suite_battery();
      else {
        r = suite_consistency(count_s.empty() ? 1000 : parse_count(count_s, "--count"),
                              verify->count("--seed") ? seed : 7);
      }
      return suite_exit(r, out);
    };
  });

  // orbit
  auto* orb = app.add_subcommand("orbit", "orbit values f(T^n x) as CSV");
  OrbitArgs oa;
  oa.attach(orb, true);
  orb->add_option("--out", out, "CSV file (stdout when absent)");
  orb->callback([&] {
    action = [&] {
      emit(orbit_csv(oa.run(bits)), out);
      return 0;
    };
  });

  // classify
  auto* cls = app.add_subcommand("classify", "WNH / NH / SNH verdicts with provenance");
  std::string in;
  ClassifyConfig cfg;
  cls->add_option("--in", in, "operator document or operator list")->required();
  cls->add_option("--out", out, "verdict file (stdout when absent)");
  cls->add_option("--tie", cfg.tie, "moduli closer than this but unequal are ties");
  cls->add_option("--H", cfg.H, "relation height");
  cls->add_option("--horizon", cfg.shift_horizon, "weight products scanned for shifts");
  cls->callback([&] {
    action = [&] {
      if (cfg.H < 1 || cfg.shift_horizon < 1 || !(cfg.tie >= 0)) throw InvalidInput("caps must be positive");
      json doc = read_json_file(in);
      auto ops = ops_from_json(doc);
      std::vector<OperatorSpec> specs;
      for (const auto& o : ops) specs.push_back(o.spec);
      auto res = classify_batch(specs, cfg);
      if (!doc.contains("operators")) {
        emit(with_version(classification_to_json(res[0])), out);
        return 0;
      }
      json arr = json::array();
      for (std::size_t i = 0; i < res.size(); ++i) {
        json v = classification_to_json(res[i]);
        v["name"] = ops[i].name;
        arr.push_back(v);
      }
      emit(json{{"schema_version", kSchemaVersion}, {"results", arr}}, out);
      return 0;
    };
  });

  // witness
  auto* wit = app.add_subcommand("witness", "witness constructions with replayable certificates");
  wit->require_subcommand(1);
  long R = 2;
  double eps = 1e-6, radius = 5.0, tol = 1e-8;
  int gap = 2;
  std::string op_out;

  auto* w_znwn = wit->add_subcommand("znwn", "steer z^n + w^n onto targets");
  w_znwn->add_option("--R", R, "radius base, even");
  w_znwn->add_option("--targets", targets, "gridCxR or re,im;re,im;...")->default_str("grid5x4");
  w_znwn->add_option("--radius", radius, "grid radius");
  w_znwn->add_option("--eps", eps, "residual target");
  w_znwn->add_option("--gap", gap, "extra separation between targets");
  w_znwn->add_option("--out", out, "steering certificate");
  w_znwn->add_option("--operator-out", op_out, "the steered diagonal as an operator document");
  w_znwn->callback([&] {
    action = [&] {
      RadiusSchedule sched;
      sched.R = R;
      SteerOptions so;
      so.gap = gap;
      auto t = parse_targets(targets.empty() ? "grid5x4" : targets, radius, eps);
      SteeringResult s = torus_steer(sched, "znwn", t, so);
      auto res = replay(s);
      emit(with_version(steering_to_json(s, res)), out);
      if (!op_out.empty()) emit(spec_to_json(OperatorSpec(s.diagonal())), op_out);
      for (std::size_t j = 0; j < res.size(); ++j) {
        if (!(res[j] <= t[j].eps)) {
          std::cerr << "target " << j << " replays to " << res[j] << "\n";
          return 1;
        }
      }
      return 0;
    };
  });

  auto* w_penta = wit->add_subcommand("penta-calibrate", "calibrate the pentagon solver region");
  w_penta->add_option("--samples", samples, "calibration samples")->default_str("2000");
  w_penta->add_option("--seed", seed, "sampling seed");
  w_penta->add_option("--out", out, "calibration file");
  w_penta->callback([&] {
    action = [&] {
      long n = w_penta->count("--samples") ? parse_count(samples, "--samples") : 2000;
      emit(with_version(penta_to_json(penta_calibrate(n, seed))), out);
      return 0;
    };
  });

  auto* w_dd = wit->add_subcommand("ddiaa", "l1-weight greedy on exp(i pi Q)");
  w_dd->add_option("--targets", targets, "re,im;re,im;... (random in [-5,5]^2 when absent)");
  w_dd->add_option("--count", count_s, "number of random targets")->default_str("10");
  w_dd->add_option("--seed", seed_dd, "seed of the random targets");
  w_dd->add_option("--tol", tol, "replay tolerance");
  w_dd->add_option("--out", out, "certificate file");
  w_dd->add_option("--operator-out", op_out, "the resulting diagonal as an operator document");
  w_dd->callback([&] {
    action = [&] {
      std::vector<cplx> ys;
      if (!targets.empty()) {
        for (const auto& qp : parse_qpoints(targets)) ys.push_back(qp.approx());
      } else {
        long n = count_s.empty() ? 10 : parse_count(count_s, "--count");
        std::mt19937_64 gen(seed_dd);
        std::uniform_real_distribution<double> u(-5.0, 5.0);
        for (long j = 0; j < n; ++j) {
          double re = u(gen);
          ys.emplace_back(re, u(gen));
        }
      }
      std::vector<double> ds;
      for (std::size_t j = 0; j < ys.size(); ++j) ds.push_back(std::ldexp(0.1, -static_cast<int>(j)));
      RadiusSchedule sched;
      DdiaaState s = ddiaa_build(ys, ds, sched, tol);
      auto v = ddiaa_replay(s);
      emit(with_version(ddiaa_to_json(s, v)), out);
      if (!op_out.empty()) emit(spec_to_json(OperatorSpec(s.diagonal())), op_out);
      for (std::size_t j = 0; j < ys.size() && j < v.size(); ++j) {
        double d = std::abs(v[j].center() - ys[j]) + v[j].rad;
        if (!(d <= tol)) {
          std::cerr << "target " << j << " replays to " << d << "\n";
          return 1;
        }
      }
      return 0;
    };
  });

  // scan
  auto* scan = app.add_subcommand("scan", "orbit diagnostics");
  scan->require_subcommand(1);
  double rho = 4.0, cell = 0.25, C = 1.0, lt = 1e-9;
  int L = 2;
  std::string lens, z_s, w_s, r_grid;
  long n_r = 1000;

  auto* s_cov = scan->add_subcommand("coverage", "grid coverage of the disk by orbit prefixes");
  OrbitArgs sa;
  sa.attach(s_cov, false);
  s_cov->add_option("--rho", rho, "disk radius");
  s_cov->add_option("--eps", cell, "grid cell size");
  s_cov->add_option("--lens", lens, "prefix lengths l1,l2,... (powers of ten when absent)");
  s_cov->add_option("--out", out, "CSV file");
  s_cov->callback([&] {
    action = [&] {
      auto pts = samples_of(sa.run(bits));
      std::vector<long> ls;
      if (lens.empty()) {
        for (long l = 10; l < static_cast<long>(pts.size()); l *= 10) ls.push_back(l);
        ls.push_back(static_cast<long>(pts.size()));
      } else {
        for (const auto& s : split(lens, ',')) ls.push_back(parse_count(s, "--lens"));
      }
      emit(coverage_csv(ls, coverage_curve(pts, ls, rho, cell)), out);
      return 0;
    };
  });

  auto* s_r = scan->add_subcommand("rscan", "coverage of r^n (z^n + w^n) over a grid of r");
  s_r->add_option("--z", z_s, "angle of z (rational a/b or a label such as log2)")->required();
  s_r->add_option("--w", w_s, "angle of w")->required();
  s_r->add_option("--r", r_grid, "lo:hi:count")->required();
  s_r->add_option("--N", n_r, "orbit length");
  s_r->add_option("--rho", rho, "disk radius");
  s_r->add_option("--eps", cell, "grid cell size");
  s_r->add_option("--out", out, "CSV file");
  s_r->callback([&] {
    action = [&] {
      auto parts = split(r_grid, ':');
      if (parts.size() != 3) throw InvalidInput("--r must be lo:hi:count");
      double lo = std::stod(parts[0]), hi = std::stod(parts[1]);
      long cnt = parse_count(parts[2], "--r count");
      std::vector<double> grid;
      for (long i = 0; i < cnt; ++i) grid.push_back(cnt == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cnt - 1));
      if (n_r < 1) throw InvalidInput("--N must be positive");
      emit(r_scan_csv(r_scan(parse_angle(z_s), parse_angle(w_s), grid, n_r, rho, cell)), out);
      return 0;
    };
  });

  auto* s_gap = scan->add_subcommand("gaps", "return times to the disk of radius C");
  OrbitArgs ga;
  ga.attach(s_gap, false);
  s_gap->add_option("--C", C, "return radius");
  s_gap->add_option("--out", out, "CSV file");
  s_gap->callback([&] {
    action = [&] {
      emit(gaps_csv(return_times(samples_of(ga.run(bits)), C)), out);
      return 0;
    };
  });

  auto* s_esc = scan->add_subcommand("escape", "growth profile of log|f(T^n x)|");
  OrbitArgs ea;
  ea.attach(s_esc, false);
  s_esc->add_option("--out", out, "JSON file");
  s_esc->callback([&] {
    action = [&] {
      emit(escape_json(escape_profile(samples_of(ea.run(bits)))), out);
      return 0;
    };
  });

  auto* s_line = scan->add_subcommand("lines", "confinement of the orbit to finitely many lines");
  OrbitArgs la;
  la.attach(s_line, false);
  s_line->add_option("--L", L, "largest number of lines");
  s_line->add_option("--line-tol", lt, "angular tolerance");
  s_line->add_option("--out", out, "JSON file");
  s_line->callback([&] {
    action = [&] {
      emit(lines_json(line_confinement(samples_of(la.run(bits)), L, lt)), out);
      return 0;
    };
  });

  // report
  auto* rep = app.add_subcommand("report", "SVG scatter and CSV table of an orbit");
  OrbitArgs ra;
  ra.attach(rep, true);
  std::string svg, csv;
  int size = 600;
  rep->add_option("--svg", svg, "SVG file");
  rep->add_option("--csv", csv, "orbit CSV file");
  rep->add_option("--rho", rho, "disk radius");
  rep->add_option("--eps", cell, "grid cell size");
  rep->add_option("--size", size, "picture size in pixels");
  rep->callback([&] {
    action = [&] {
      if (svg.empty() && csv.empty()) throw InvalidInput("report needs --svg or --csv");
      OrbitSeries s = ra.run(bits);
      if (!svg.empty()) emit(scatter_svg(samples_of(s), rho, cell, size), svg);
      if (!csv.empty()) emit(orbit_csv(s), csv);
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorClass::Input);
  }
  try {
    return action ? action() : 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.error_class());
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: bad argument: " << e.what() << "\n";
    return static_cast<int>(ErrorClass::Input);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorClass::Failure);
  }
}
