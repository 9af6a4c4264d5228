#include "numcyc/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include "numcyc/errors.hpp"

namespace numcyc {

namespace {

void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidInput(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!ok.count(it.key())) throw InvalidInput(where + ": unknown field '" + it.key() + "'");
  }
}

const json& need(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw InvalidInput(where + ": missing field '" + key + "'");
  return *it;
}

std::string rat_str(const Rat& q) { return q.get_str(); }

Rat rat_from(const json& j, const std::string& where) {
  if (j.is_number_integer()) return Rat(j.get<long>());
  if (!j.is_string()) throw InvalidInput(where + ": expected a rational string like \"a/b\"");
  std::string s = j.get<std::string>();
  Rat q;
  if (s.empty() || q.set_str(s, 10) != 0) throw InvalidInput(where + ": bad rational '" + s + "'");
  if (q.get_den() == 0) throw InvalidInput(where + ": zero denominator");
  q.canonicalize();
  return q;
}

Int int_from(const json& j, const std::string& where) {
  if (j.is_number_integer()) return Int(j.get<long>());
  if (!j.is_string()) throw InvalidInput(where + ": expected an integer string");
  Int v;
  std::string s = j.get<std::string>();
  if (s.empty() || v.set_str(s, 10) != 0) throw InvalidInput(where + ": bad integer '" + s + "'");
  return v;
}

json form_to_json(const LinForm& f) {
  if (f.literal()) return f.c0.get_str();
  json a = json::object();
  for (const auto& [k, v] : f.c) a[std::to_string(k)] = v.get_str();
  return json{{"c0", f.c0.get_str()}, {"atoms", a}};
}

LinForm form_from_json(const json& j, const std::string& where) {
  LinForm f;
  if (!j.is_object()) {
    f.c0 = int_from(j, where);
    return f;
  }
  only_keys(j, {"c0", "atoms"}, where);
  f.c0 = int_from(need(j, "c0", where), where);
  const json& a = need(j, "atoms", where);
  if (!a.is_object()) throw InvalidInput(where + ": atoms must be an object");
  for (auto it = a.begin(); it != a.end(); ++it) {
    int k = 0;
    try {
      k = std::stoi(it.key());
    } catch (const std::exception&) {
      throw InvalidInput(where + ": bad atom index '" + it.key() + "'");
    }
    Int c = int_from(it.value(), where);
    if (c != 0) f.c[k] = c;
  }
  return f;
}

Exponent exponent_from(const json& j, const std::shared_ptr<const Ladder>& l, const std::string& where) {
  LinForm f = form_from_json(j, where);
  if (f.literal()) return Exponent(f.c0);
  if (!l) throw InvalidInput(where + ": symbolic exponent without a ladder");
  for (const auto& [k, v] : f.c) {
    if (k < 0 || k >= l->size()) throw InvalidInput(where + ": atom index out of range");
  }
  return Exponent::from_form(l, f);
}

bool same_form(const LinForm& a, const Ladder* la, const LinForm& b, const Ladder* lb);
}  // namespace
Angle angle_from_json_impl(const json& j, const LadderTable& lt);
namespace {

bool same_atom(const Ladder* la, int i, const Ladder* lb, int j) {
  if (la == lb && i == j) return true;
  if (!la || !lb || la->base() != lb->base()) return false;
  return same_form(la->exponent_of(i), la, lb->exponent_of(j), lb);
}

bool same_form(const LinForm& a, const Ladder* la, const LinForm& b, const Ladder* lb) {
  if (a.c0 != b.c0 || a.c.size() != b.c.size()) return false;
  auto ia = a.c.begin();
  auto ib = b.c.begin();
  for (; ia != a.c.end(); ++ia, ++ib) {
    if (ia->second != ib->second || !same_atom(la, ia->first, lb, ib->first)) return false;
  }
  return true;
}

bool same_exp(const Exponent& a, const Exponent& b) {
  return same_form(a.form(), a.ladder().get(), b.form(), b.ladder().get());
}

bool same_angle(const Angle& a, const Angle& b) {
  if (a.data().index() != b.data().index()) return false;
  if (a.is_rational()) return a.rat() == b.rat();
  if (a.is_symbolic()) {
    const auto& x = a.sym();
    const auto& y = b.sym();
    return x.constant == y.constant && x.coef == y.coef && x.values == y.values && x.indep_class == y.indep_class;
  }
  const Lacunary& x = a.lac();
  const Lacunary& y = b.lac();
  if (x.p != y.p || x.family != y.family || x.offset != y.offset || x.tail_coef != y.tail_coef) return false;
  if (x.terms.size() != y.terms.size() || !same_exp(x.tail_e, y.tail_e)) return false;
  for (std::size_t i = 0; i < x.terms.size(); ++i) {
    if (x.terms[i].m != y.terms[i].m || !same_exp(x.terms[i].e, y.terms[i].e)) return false;
  }
  return true;
}

bool same_entry(const ExactEntry& a, const ExactEntry& b) {
  if (a.radius != b.radius || a.rel_to != b.rel_to || !same_angle(a.angle, b.angle)) return false;
  return a.rel_to < 0 || same_angle(a.rel_delta, b.rel_delta);
}

json entry_to_json(const ExactEntry& e, LadderTable& lt) {
  json j{{"radius", rat_str(e.radius)}, {"angle", angle_to_json(e.angle, lt)}};
  if (e.rel_to >= 0) {
    j["rel_to"] = e.rel_to;
    j["delta"] = angle_to_json(e.rel_delta, lt);
  }
  return j;
}

ExactEntry entry_from_json(const json& j, const LadderTable& lt, const std::string& where) {
  only_keys(j, {"radius", "angle", "rel_to", "delta"}, where);
  ExactEntry e;
  e.radius = rat_from(need(j, "radius", where), where + ".radius");
  if (e.radius < 0) throw InvalidInput(where + ": negative radius");
  e.angle = j.contains("angle") ? angle_from_json_impl(j["angle"], lt) : Angle(Rat(0));
  if (j.contains("rel_to") != j.contains("delta")) throw InvalidInput(where + ": rel_to and delta go together");
  if (j.contains("rel_to")) {
    if (!j["rel_to"].is_number_integer()) throw InvalidInput(where + ": rel_to must be an integer");
    e.rel_to = j["rel_to"].get<int>();
    e.rel_delta = angle_from_json_impl(j["delta"], lt);
  }
  return e;
}

const char* kind_name(ShiftKind k) {
  switch (k) {
    case ShiftKind::Forward: return "forward";
    case ShiftKind::Backward: return "backward";
    case ShiftKind::Bilateral: break;
  }
  return "bilateral";
}

}  // namespace

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw InvalidInput("complex number must be [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

// ---- ladders ----

int LadderTable::index_of(const std::shared_ptr<const Ladder>& l) {
  for (std::size_t i = 0; i < ladders_.size(); ++i) {
    if (ladders_[i] == l) return static_cast<int>(i);
  }
  ladders_.push_back(l);
  return static_cast<int>(ladders_.size()) - 1;
}

std::shared_ptr<const Ladder> LadderTable::at(int i) const {
  if (i < 0 || i >= static_cast<int>(ladders_.size())) throw InvalidInput("ladder index out of range");
  return ladders_[static_cast<std::size_t>(i)];
}

json LadderTable::to_json() const {
  json out = json::array();
  for (const auto& l : ladders_) {
    json atoms = json::array();
    for (int j = 0; j < l->size(); ++j) atoms.push_back(form_to_json(l->exponent_of(j)));
    out.push_back({{"p", l->base()}, {"materialize_bits", l->materialize_bits()}, {"atoms", atoms}});
  }
  return out;
}

LadderTable LadderTable::from_json(const json& j) {
  LadderTable t;
  if (!j.is_array()) throw InvalidInput("ladders must be an array");
  for (const auto& lj : j) {
    only_keys(lj, {"p", "materialize_bits", "atoms"}, "ladder");
    int p = need(lj, "p", "ladder").get<int>();
    if (p < 2) throw InvalidInput("ladder base must be at least 2");
    long bits = lj.value("materialize_bits", 1L << 21);
    auto l = std::make_shared<Ladder>(p, bits);
    const json& atoms = need(lj, "atoms", "ladder");
    if (!atoms.is_array()) throw InvalidInput("ladder atoms must be an array");
    for (const auto& a : atoms) {
      LinForm f = form_from_json(a, "ladder atom");
      for (const auto& [k, v] : f.c) {
        if (k < 0 || k >= l->size()) throw InvalidInput("ladder atom refers forward");
      }
      l->push(f);
    }
    t.ladders_.push_back(l);
  }
  return t;
}

// ---- angles ----

json angle_to_json(const Angle& a, LadderTable& lt) {
  if (a.is_rational()) return json{{"rational", rat_str(a.rat())}};
  if (a.is_symbolic()) {
    const SymbolicAngle& s = a.sym();
    json b{{"label", s.label}, {"indep_class", s.indep_class}};
    bool plain = false;
    try {
      std::string v = s.values.count(s.label) ? s.values.at(s.label) : "";
      SymbolicAngle p = SymbolicAngle::parse(s.label, s.indep_class, v);
      plain = p.constant == s.constant && p.coef == s.coef && p.values == s.values && p.indep_class == s.indep_class;
      if (plain && !v.empty()) b["value"] = v;
    } catch (const Error&) {
      plain = false;
    }
    if (!plain) {
      json coef = json::object();
      for (const auto& [k, v] : s.coef) coef[k] = rat_str(v);
      b["constant"] = rat_str(s.constant);
      b["coef"] = coef;
      b["values"] = s.values;
    }
    return json{{"symbolic", b}};
  }
  const Lacunary& l = a.lac();
  json params;
  params["ladder"] = l.ladder ? json(lt.index_of(l.ladder)) : json(nullptr);
  json terms = json::array();
  for (const auto& t : l.terms) {
    if (!t.e.is_literal() && t.e.ladder() != l.ladder) throw InvalidInput("lacunary term on a foreign ladder");
    terms.push_back({{"m", t.m.get_str()}, {"e", form_to_json(t.e.form())}});
  }
  params["terms"] = terms;
  params["tail_coef"] = l.tail_coef.get_str();
  params["tail_e"] = form_to_json(l.tail_e.form());
  params["offset"] = rat_str(l.offset);
  return json{{"lacunary", {{"p", l.p}, {"family", l.family}, {"params", params}}}};
}

Angle angle_from_json_impl(const json& j, const LadderTable& lt) {
  if (j.is_string()) {
    // shorthand: "a/b" or a symbolic label
    std::string s = j.get<std::string>();
    if (!s.empty() && (std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '-')) return Angle(rat_from(j, "angle"));
    return Angle::symbolic(s);
  }
  if (!j.is_object() || j.size() != 1) throw InvalidInput("angle must have exactly one of rational, lacunary, symbolic");
  if (j.contains("rational")) return Angle(rat_from(j["rational"], "angle.rational"));
  if (j.contains("symbolic")) {
    const json& b = j["symbolic"];
    only_keys(b, {"label", "indep_class", "value", "constant", "coef", "values"}, "angle.symbolic");
    std::string label = b.value("label", "");
    std::string cls = b.value("indep_class", "");
    if (b.contains("coef") || b.contains("constant")) {
      SymbolicAngle s;
      s.label = label;
      s.indep_class = cls;
      if (b.contains("constant")) s.constant = rat_from(b["constant"], "angle.symbolic.constant");
      if (b.contains("coef")) {
        if (!b["coef"].is_object()) throw InvalidInput("angle.symbolic.coef must be an object");
        for (auto it = b["coef"].begin(); it != b["coef"].end(); ++it) {
          Rat c = rat_from(it.value(), "angle.symbolic.coef");
          if (c != 0) s.coef[it.key()] = c;
        }
      }
      if (b.contains("values")) s.values = b["values"].get<std::map<std::string, std::string>>();
      for (const auto& [k, v] : s.coef) {
        bool known = k.rfind("log", 0) == 0 || k.rfind("sqrt", 0) == 0 || s.values.count(k);
        if (!known) throw InvalidInput("symbolic label '" + k + "' has no value");
      }
      return Angle(s);
    }
    if (label.empty()) throw InvalidInput("angle.symbolic: missing label");
    return Angle(SymbolicAngle::parse(label, cls, b.value("value", "")));
  }
  if (j.contains("lacunary")) {
    const json& b = j["lacunary"];
    only_keys(b, {"p", "family", "params"}, "angle.lacunary");
    Lacunary l;
    l.p = need(b, "p", "angle.lacunary").get<int>();
    if (l.p < 2) throw InvalidInput("lacunary base must be at least 2");
    l.family = b.value("family", "");
    const json& pr = need(b, "params", "angle.lacunary");
    only_keys(pr, {"ladder", "terms", "tail_coef", "tail_e", "offset"}, "angle.lacunary.params");
    if (pr.contains("ladder") && !pr["ladder"].is_null()) {
      l.ladder = lt.at(pr["ladder"].get<int>());
      if (l.ladder->base() != l.p) throw InvalidInput("lacunary base differs from its ladder");
    }
    for (const auto& t : need(pr, "terms", "angle.lacunary.params")) {
      only_keys(t, {"m", "e"}, "lacunary term");
      l.terms.push_back({int_from(need(t, "m", "lacunary term"), "lacunary term"),
                         exponent_from(need(t, "e", "lacunary term"), l.ladder, "lacunary term")});
    }
    l.tail_coef = pr.contains("tail_coef") ? int_from(pr["tail_coef"], "tail_coef") : Int(0);
    l.tail_e = pr.contains("tail_e") ? exponent_from(pr["tail_e"], l.ladder, "tail_e") : Exponent(0L);
    l.offset = pr.contains("offset") ? rat_from(pr["offset"], "offset") : Rat(0);
    l.check();
    return Angle(l);
  }
  throw InvalidInput("angle must have exactly one of rational, lacunary, symbolic");
}

// ---- operators ----

namespace {

json spec_body(const OperatorSpec& T, LadderTable& lt) {
  json j;
  if (const auto* d = std::get_if<DenseMatrix>(&T)) {
    j["kind"] = "dense";
    j["n"] = d->n;
    json rows = json::array();
    for (int r = 0; r < d->n; ++r) {
      json row = json::array();
      for (int c = 0; c < d->n; ++c) row.push_back(complex_to_json(d->at(r, c)));
      rows.push_back(row);
    }
    j["rows"] = rows;
    if (d->exact) {
      json ex = json::array();
      for (const auto& e : *d->exact) ex.push_back(entry_to_json(e, lt));
      j["exact"] = ex;
    }
  } else if (const auto* e = std::get_if<ExactDiagonal>(&T)) {
    j["kind"] = "exact_diagonal";
    json ents = json::array();
    for (const auto& x : e->entries) ents.push_back(entry_to_json(x, lt));
    j["entries"] = ents;
  } else {
    const auto& s = std::get<WeightedShift>(T);
    j["kind"] = "shift";
    j["direction"] = kind_name(s.kind);
    json w{{"type", s.weights.type}};
    if (s.weights.type == "constant") {
      w["value"] = complex_to_json(s.weights.value);
    } else if (s.weights.type == "harmonic") {
      w["a"] = s.weights.a;
      w["b"] = s.weights.b;
    } else {
      json vals = json::array();
      for (const auto& v : s.weights.values) vals.push_back(complex_to_json(v));
      w["values"] = vals;
      w["tail"] = complex_to_json(s.weights.value);
    }
    j["weights"] = w;
    j["bound"] = s.bound;
  }
  return j;
}

OperatorSpec spec_body_from(const json& j, const LadderTable& lt) {
  std::string kind = need(j, "kind", "operator").get<std::string>();
  if (kind == "dense") {
    only_keys(j, {"schema_version", "ladders", "kind", "n", "rows", "exact"}, "dense operator");
    int n = need(j, "n", "dense operator").get<int>();
    if (n < 1) throw InvalidInput("dense operator: n must be positive");
    if (j.contains("exact")) {
      std::vector<ExactEntry> ex;
      for (const auto& e : j["exact"]) ex.push_back(entry_from_json(e, lt, "dense exact entry"));
      if (ex.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
        throw DimensionMismatch("dense operator: exact needs n*n entries");
      }
      DenseMatrix m = DenseMatrix::from_exact(n, ex);
      if (j.contains("rows")) {
        // stored rows must match the shadow they were rounded from
        const json& rows = j["rows"];
        if (rows.size() != static_cast<std::size_t>(n)) throw DimensionMismatch("dense operator: row count");
        for (int r = 0; r < n; ++r) {
          if (rows[static_cast<std::size_t>(r)].size() != static_cast<std::size_t>(n)) {
            throw DimensionMismatch("dense operator: row length");
          }
          for (int c = 0; c < n; ++c) {
            cplx v = complex_from_json(rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
            cplx w = m.at(r, c);
            if (std::abs(v - w) > 1e-12 * std::max(1.0, std::abs(w))) {
              throw InvalidInput("dense operator: rows disagree with the exact entries");
            }
            m.a[static_cast<std::size_t>(r * n + c)] = v;
          }
        }
      }
      return m;
    }
    const json& rows = need(j, "rows", "dense operator");
    if (!rows.is_array() || rows.size() != static_cast<std::size_t>(n)) throw DimensionMismatch("dense operator: row count");
    std::vector<std::vector<cplx>> rr;
    for (const auto& row : rows) {
      if (!row.is_array() || row.size() != static_cast<std::size_t>(n)) throw DimensionMismatch("dense operator: row length");
      std::vector<cplx> v;
      for (const auto& x : row) v.push_back(complex_from_json(x));
      rr.push_back(v);
    }
    return DenseMatrix::from_rows(rr);
  }
  if (kind == "exact_diagonal") {
    only_keys(j, {"schema_version", "ladders", "kind", "entries"}, "exact_diagonal operator");
    ExactDiagonal d;
    for (const auto& e : need(j, "entries", "exact_diagonal operator")) d.entries.push_back(entry_from_json(e, lt, "diagonal entry"));
    if (d.entries.empty()) throw InvalidInput("exact_diagonal operator: no entries");
    return d;
  }
  if (kind == "shift") {
    only_keys(j, {"schema_version", "ladders", "kind", "direction", "weights", "bound"}, "shift operator");
    WeightedShift s;
    std::string dir = j.value("direction", "backward");
    if (dir == "forward") {
      s.kind = ShiftKind::Forward;
    } else if (dir == "backward") {
      s.kind = ShiftKind::Backward;
    } else if (dir == "bilateral") {
      s.kind = ShiftKind::Bilateral;
    } else {
      throw InvalidInput("shift direction must be forward, backward or bilateral");
    }
    const json& w = need(j, "weights", "shift operator");
    std::string type = need(w, "type", "shift weights").get<std::string>();
    s.weights.type = type;
    if (type == "constant") {
      only_keys(w, {"type", "value"}, "constant weights");
      s.weights.value = complex_from_json(need(w, "value", "constant weights"));
    } else if (type == "harmonic") {
      only_keys(w, {"type", "a", "b"}, "harmonic weights");
      s.weights.a = need(w, "a", "harmonic weights").get<double>();
      s.weights.b = need(w, "b", "harmonic weights").get<double>();
    } else if (type == "list") {
      only_keys(w, {"type", "values", "tail"}, "list weights");
      for (const auto& v : need(w, "values", "list weights")) s.weights.values.push_back(complex_from_json(v));
      s.weights.value = complex_from_json(need(w, "tail", "list weights"));
    } else {
      throw InvalidInput("shift weights type must be constant, harmonic or list");
    }
    s.bound = j.contains("bound") ? j["bound"].get<double>() : s.weights.bound();
    return s;
  }
  throw InvalidInput("operator kind must be dense, exact_diagonal or shift");
}

void check_version(const json& j) {
  if (!j.contains("schema_version")) throw InvalidInput("missing schema_version");
  if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != kSchemaVersion) {
    throw InvalidInput("unsupported schema_version");
  }
}

}  // namespace

json spec_to_json(const OperatorSpec& T) {
  LadderTable lt;
  json body = spec_body(T, lt);
  json j{{"schema_version", kSchemaVersion}};
  if (!lt.empty()) j["ladders"] = lt.to_json();
  for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
  return j;
}

OperatorSpec spec_from_json_impl(const json& j) {
  if (!j.is_object()) throw InvalidInput("operator document must be an object");
  check_version(j);
  LadderTable lt = j.contains("ladders") ? LadderTable::from_json(j["ladders"]) : LadderTable();
  OperatorSpec T = spec_body_from(j, lt);
  validate(T);
  return T;
}

bool same_spec(const OperatorSpec& a, const OperatorSpec& b) {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<DenseMatrix>(&a)) {
    const auto& y = std::get<DenseMatrix>(b);
    if (x->n != y.n || x->a != y.a || x->exact.has_value() != y.exact.has_value()) return false;
    if (x->exact) {
      for (std::size_t i = 0; i < x->exact->size(); ++i) {
        if (!same_entry((*x->exact)[i], (*y.exact)[i])) return false;
      }
    }
    return true;
  }
  if (const auto* x = std::get_if<ExactDiagonal>(&a)) {
    const auto& y = std::get<ExactDiagonal>(b);
    if (x->entries.size() != y.entries.size()) return false;
    for (std::size_t i = 0; i < x->entries.size(); ++i) {
      if (!same_entry(x->entries[i], y.entries[i])) return false;
    }
    return true;
  }
  const auto& x = std::get<WeightedShift>(a);
  const auto& y = std::get<WeightedShift>(b);
  const WeightSpec& u = x.weights;
  const WeightSpec& v = y.weights;
  return x.kind == y.kind && x.bound == y.bound && u.type == v.type && u.value == v.value && u.a == v.a && u.b == v.b &&
         u.values == v.values;
}

json ops_to_json(const std::vector<NamedSpec>& ops) {
  json arr = json::array();
  for (const auto& o : ops) {
    json body = spec_to_json(o.spec);
    body.erase("schema_version");
    arr.push_back({{"name", o.name}, {"operator", body}});
  }
  return json{{"schema_version", kSchemaVersion}, {"operators", arr}};
}

std::vector<NamedSpec> ops_from_json_impl(const json& j) {
  if (!j.is_object()) throw InvalidInput("operator document must be an object");
  if (!j.contains("operators")) return {{"", spec_from_json_impl(j)}};
  only_keys(j, {"schema_version", "operators"}, "operator list");
  check_version(j);
  std::vector<NamedSpec> out;
  for (const auto& o : j["operators"]) {
    only_keys(o, {"name", "operator"}, "operator list entry");
    json body = need(o, "operator", "operator list entry");
    body["schema_version"] = kSchemaVersion;
    out.push_back({o.value("name", ""), spec_from_json_impl(body)});
  }
  return out;
}

json pair_to_json(const DualPair& p) {
  if (p.c_exact) {
    json w = json::array();
    for (const auto& c : *p.c_exact) w.push_back(rat_str(c));
    return json{{"schema_version", kSchemaVersion}, {"weights", w}};
  }
  json x = json::array(), f = json::array();
  for (const auto& v : p.x) x.push_back(complex_to_json(v));
  for (const auto& v : p.f) f.push_back(complex_to_json(v));
  json j{{"schema_version", kSchemaVersion}, {"x", x}, {"f", f}};
  if (p.shift_offset != 0) j["shift_offset"] = p.shift_offset;
  return j;
}

DualPair pair_from_json_impl(const json& j) {
  if (!j.is_object()) throw InvalidInput("pair document must be an object");
  only_keys(j, {"schema_version", "weights", "x", "f", "shift_offset"}, "pair");
  check_version(j);
  if (j.contains("weights")) {
    std::vector<Rat> c;
    for (const auto& w : j["weights"]) c.push_back(rat_from(w, "pair weight"));
    return pair_from_weights(c);
  }
  std::vector<cplx> x;
  for (const auto& v : need(j, "x", "pair")) x.push_back(complex_from_json(v));
  DualPair p;
  if (j.contains("f")) {
    p.x = x;
    for (const auto& v : j["f"]) p.f.push_back(complex_from_json(v));
    if (p.f.size() != p.x.size()) throw DimensionMismatch("pair: x and f lengths differ");
    double nx = 0, nf = 0;
    for (const auto& v : p.x) nx += std::norm(v);
    for (const auto& v : p.f) nf += std::norm(v);
    p.norm_x = std::sqrt(nx);
    p.norm_f = std::sqrt(nf);
    cplx fx = p.apply(p.x);
    p.pi_certified = std::fabs(p.norm_x - 1) <= 1e-12 && std::fabs(p.norm_f - 1) <= 1e-12 && std::abs(fx - 1.0) <= 1e-12;
  } else {
    p = hilbert_pair(x);
  }
  p.shift_offset = j.value("shift_offset", 0L);
  return p;
}

namespace {

template <class F>
auto guarded(F f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed document: ") + e.what());
  }
}

}  // namespace

OperatorSpec spec_from_json(const json& j) {
  return guarded([&] { return spec_from_json_impl(j); });
}
std::vector<NamedSpec> ops_from_json(const json& j) {
  return guarded([&] { return ops_from_json_impl(j); });
}
DualPair pair_from_json(const json& j) {
  return guarded([&] { return pair_from_json_impl(j); });
}
Angle angle_from_json(const json& j, const LadderTable& lt) {
  return guarded([&] { return angle_from_json_impl(j, lt); });
}

// ---- reports ----

json verdict_to_json(const Verdict& v, bool closure) {
  std::string value = to_string(v.value);
  if (closure && v.value == Tri::Yes) value = "inside";
  if (closure && v.value == Tri::No) value = "outside";
  return json{{"value", value}, {"rule", v.rule}, {"detail", v.detail}};
}

json classification_to_json(const Classification& c) {
  json rules = json::array();
  for (const auto& r : c.rules) {
    rules.push_back({{"rule", r.rule}, {"conclusion", r.conclusion}, {"status", to_string(r.status)}, {"certificate", r.certificate}});
  }
  bool decided = c.wnh.value != Tri::Unknown && c.nh.value != Tri::Unknown && c.snh.value != Tri::Unknown;
  json j{{"wnh", verdict_to_json(c.wnh)},
         {"nh", verdict_to_json(c.nh)},
         {"snh", verdict_to_json(c.snh)},
         {"closure", verdict_to_json(c.closure, true)},
         {"rules", rules},
         {"status", decided ? "decided" : "partial"}};
  if (c.spectrum) {
    json pts = json::array();
    for (const auto& p : c.spectrum->points) {
      pts.push_back({{"value", complex_to_json(p.value)},
                     {"err", p.err},
                     {"radius", p.radius},
                     {"angle", p.angle.describe()},
                     {"multiplicity", p.multiplicity}});
    }
    j["spectrum"] = {{"source", c.spectrum->source}, {"points", pts}};
  }
  return j;
}

json steering_to_json(const SteeringResult& s, const std::vector<double>& residuals) {
  json hits = json::array();
  for (std::size_t i = 0; i < s.hits.size(); ++i) {
    const auto& h = s.hits[i];
    json e{{"n", h.n.str()}, {"target", complex_to_json(h.target)}, {"eps", h.eps}, {"value", complex_to_json(h.value)},
           {"residual", h.residual}};
    if (i < residuals.size()) e["replay_residual"] = residuals[i];
    hits.push_back(e);
  }
  json sched = json::array();
  for (const auto& e : s.schedule_log) {
    sched.push_back({{"j", e.j}, {"E", e.E.str()}, {"c", e.c.get_str()}, {"d", e.d.get_str()}, {"degradation", e.degradation}});
  }
  double worst = 0;
  bool ok = !residuals.empty();
  for (std::size_t i = 0; i < residuals.size() && i < s.hits.size(); ++i) {
    worst = std::max(worst, residuals[i]);
    ok = ok && residuals[i] <= s.hits[i].eps;
  }
  return json{{"R", s.R},
              {"alpha", s.alpha.describe()},
              {"beta", s.beta.describe()},
              {"guard_bits", s.guard_bits},
              {"gap", s.gap},
              {"hits", hits},
              {"schedule", sched},
              {"operator", spec_to_json(s.diagonal())},
              {"max_residual", worst},
              {"ok", ok}};
}

json funny_to_json(const FunnyArtifacts& a) {
  json k = json::array();
  const int K = a.params.K;
  for (int i = 1; i <= K + 2; ++i) {
    json e{{"k", i}, {"nu", a.nu(i).str()}, {"e", a.e[static_cast<std::size_t>(i)].str()}};
    if (i <= K + 1) {
      e["m"] = a.m[static_cast<std::size_t>(i)].get_str();
      const QComplex& w = a.w[static_cast<std::size_t>(i)];
      e["w"] = {rat_str(w.re), rat_str(w.im)};
    }
    if (i <= K) e["q"] = a.q[static_cast<std::size_t>(i)].get_str();
    if (static_cast<std::size_t>(i) < a.N.size() && a.N[static_cast<std::size_t>(i)]) {
      e["N"] = a.N[static_cast<std::size_t>(i)]->get_str();
    }
    if (static_cast<std::size_t>(i) < a.N_mod2.size()) e["N_mod2"] = a.N_mod2[static_cast<std::size_t>(i)];
    if (static_cast<std::size_t>(i) < a.N_modp.size()) e["N_modp"] = a.N_modp[static_cast<std::size_t>(i)].get_str();
    k.push_back(e);
  }
  LadderTable lt;
  json tau = angle_to_json(a.tau, lt);
  json theta = angle_to_json(a.theta, lt);
  return json{{"schema_version", kSchemaVersion},
              {"p", a.params.p},
              {"depth", K},
              {"w", a.params.w.describe()},
              {"levels", k},
              {"ladders", lt.to_json()},
              {"tau", tau},
              {"theta", theta}};
}

json ddiaa_to_json(const DdiaaState& s, const std::vector<ComplexInterval>& replayed) {
  json pts = json::array();
  for (std::size_t i = 0; i < s.angle.size(); ++i) {
    json e{{"angle", rat_str(s.angle[i])}, {"weight", rat_str(s.weight[i])}, {"step", s.step[i]}};
    if (s.rel_to[i] >= 0) {
      e["rel_to"] = s.rel_to[i];
      e["delta"] = rat_str(s.rel_delta[i]);
    }
    pts.push_back(e);
  }
  json certs = json::array();
  for (std::size_t i = 0; i < s.certificates.size(); ++i) {
    const auto& c = s.certificates[i];
    json e{{"n", c.n.get_str()}, {"m", c.m.get_str()}, {"y", complex_to_json(c.y)}, {"delta", c.delta},
           {"residual", c.residual}, {"omega_added", c.omega_added}};
    if (i < replayed.size()) {
      e["replay"] = complex_to_json(replayed[i].center());
      e["replay_residual"] = std::abs(replayed[i].center() - c.y) + replayed[i].rad;
    }
    certs.push_back(e);
  }
  return json{{"M", s.M}, {"omega", s.omega}, {"R", s.R}, {"omega_mass", s.omega_mass()}, {"points", pts},
              {"certificates", certs}};
}

json penta_to_json(const PentaCalibration& c) {
  return json{{"epsilon", c.epsilon}, {"d", c.d}, {"det_center", c.det_center}, {"det_rad", c.det_rad},
              {"samples", c.samples}, {"seed", c.seed}};
}

// ---- files ----

void write_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write " + path);
    out << content;
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw InvalidInput("cannot write " + path);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw InvalidInput("cannot replace " + path);
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

}  // namespace numcyc
