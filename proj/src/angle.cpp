#include "numcyc/angle.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

#include "numcyc/errors.hpp"

namespace numcyc {

namespace {

constexpr double kTiny = std::numeric_limits<double>::denorm_min();

double two_pow(long e) {
  if (e < -1074) return kTiny;
  return std::ldexp(1.0, static_cast<int>(e));
}

long bits(const Int& v) { return v == 0 ? 0 : static_cast<long>(mpz_sizeinbase(v.get_mpz_t(), 2)); }

std::shared_ptr<const Ladder> pick_ladder(const std::shared_ptr<const Ladder>& a,
                                          const std::shared_ptr<const Ladder>& b) {
  if (a && b && a != b) throw InvalidInput("lacunary angles built on different ladders");
  return a ? a : b;
}

// Error of a declared decimal value: half a unit in its last digit.
double decimal_err(const std::string& s) {
  auto dot = s.find('.');
  if (dot == std::string::npos) return 0.5;
  std::size_t digits = 0;
  for (std::size_t i = dot + 1; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) ++digits;
  return 0.5 * std::pow(10.0, -static_cast<double>(digits));
}

Lacunary merge(const Lacunary& a, const Lacunary& b, int sb) {
  if (a.p != b.p) throw InvalidInput("lacunary angles in different bases cannot be added");
  Lacunary r;
  r.p = a.p;
  r.ladder = pick_ladder(a.ladder, b.ladder);
  r.offset = a.offset + (sb > 0 ? b.offset : Rat(-b.offset));
  r.family = a.family == b.family ? a.family : "combined";
  std::size_t i = 0, j = 0;
  while (i < a.terms.size() || j < b.terms.size()) {
    int c;
    if (i == a.terms.size()) {
      c = 1;
    } else if (j == b.terms.size()) {
      c = -1;
    } else {
      c = compare(a.terms[i].e, b.terms[j].e);
    }
    if (c < 0) {
      r.terms.push_back(a.terms[i++]);
    } else if (c > 0) {
      LacTerm t = b.terms[j++];
      if (sb < 0) t.m = -t.m;
      r.terms.push_back(t);
    } else {
      Int m = a.terms[i].m + (sb > 0 ? b.terms[j].m : Int(-b.terms[j].m));
      if (m != 0) r.terms.push_back({m, a.terms[i].e});
      ++i;
      ++j;
    }
  }
  if (a.tail_coef == 0) {
    r.tail_coef = b.tail_coef;
    r.tail_e = b.tail_e;
  } else if (b.tail_coef == 0) {
    r.tail_coef = a.tail_coef;
    r.tail_e = a.tail_e;
  } else {
    // c1 p^-e1 + c2 p^-e2 <= (c1 + c2) p^-min(e1, e2)
    r.tail_coef = a.tail_coef + b.tail_coef;
    r.tail_e = compare(a.tail_e, b.tail_e) <= 0 ? a.tail_e : b.tail_e;
  }
  return r;
}

SymbolicAngle sym_combine(const SymbolicAngle& a, const SymbolicAngle& b, int sb) {
  SymbolicAngle r = a;
  r.constant += sb > 0 ? b.constant : Rat(-b.constant);
  for (const auto& [k, v] : b.coef) {
    r.coef[k] += sb > 0 ? v : Rat(-v);
    if (r.coef[k] == 0) r.coef.erase(k);
  }
  for (const auto& [k, v] : b.values) r.values[k] = v;
  if (a.indep_class != b.indep_class) r.indep_class = "mixed";
  r.label = "(" + a.label + (sb > 0 ? ")+(" : ")-(") + b.label + ")";
  return r;
}

}  // namespace

PrecisionPolicy PrecisionPolicy::from_env() {
  PrecisionPolicy p;
  if (const char* v = std::getenv("NUMCYC_PRECISION_BITS")) {
    long b = std::strtol(v, nullptr, 10);
    if (b < 32) throw InvalidInput("NUMCYC_PRECISION_BITS must be at least 32");
    p.start_bits = b;
    if (p.max_bits < b) p.max_bits = b;
  }
  return p;
}

Rat mod2(const Rat& x) {
  Rat q = x;
  q.canonicalize();
  Int den = q.get_den();
  Int num = q.get_num();
  Int m = 2 * den;
  Int r;
  mpz_fdiv_r(r.get_mpz_t(), num.get_mpz_t(), m.get_mpz_t());
  Rat out(r, den);
  out.canonicalize();
  return out;
}

void Lacunary::check() const {
  for (std::size_t i = 1; i < terms.size(); ++i) {
    if (compare(terms[i - 1].e, terms[i].e) >= 0) throw InvalidInput("lacunary exponents must increase");
  }
  for (const auto& t : terms) {
    if (t.m == 0) throw InvalidInput("lacunary coefficient is zero");
  }
  if (tail_coef < 0) throw InvalidInput("negative tail coefficient");
}

ScaledReal Lacunary::tail_after(std::size_t s) const {
  ScaledReal acc = ScaledReal::zero(p);
  if (tail_coef != 0) acc = ScaledReal::from_int(tail_coef, p, -tail_e);
  for (std::size_t t = terms.size(); t-- > s;) {
    ScaledReal term = ScaledReal::from_int(abs(terms[t].m), p, -terms[t].e);
    acc = scaled_add(acc, term);
  }
  return acc;
}

SymbolicAngle SymbolicAngle::parse(const std::string& label, const std::string& cls, const std::string& value) {
  SymbolicAngle s;
  s.label = label;
  auto parse_n = [&](std::size_t from) -> Int {
    std::string digits = label.substr(from);
    if (digits.empty()) throw InvalidInput("symbolic label without argument: " + label);
    for (char ch : digits) {
      if (!std::isdigit(static_cast<unsigned char>(ch))) throw InvalidInput("bad symbolic label: " + label);
    }
    return Int(digits);
  };
  if (label.rfind("log", 0) == 0 && value.empty()) {
    Int n = parse_n(3);
    if (n < 1) throw InvalidInput("log of a non-positive integer");
    Int rest = n;
    for (Int d = 2; d * d <= rest; ++d) {
      while (rest % d == 0) {
        s.coef["log" + d.get_str()] += 1;
        rest /= d;
      }
    }
    if (rest > 1) s.coef["log" + rest.get_str()] += 1;
    s.indep_class = cls.empty() ? "logs_of_primes" : cls;
    return s;
  }
  if (label.rfind("sqrt", 0) == 0 && value.empty()) {
    Int n = parse_n(4);
    if (n < 0) throw InvalidInput("sqrt of a negative integer");
    Int sq = 1, f = 1, rest = n;
    for (Int d = 2; d * d <= rest; ++d) {
      int e = 0;
      while (rest % d == 0) {
        rest /= d;
        ++e;
      }
      for (int i = 0; i < e / 2; ++i) sq *= d;
      if (e % 2) f *= d;
    }
    f *= rest;
    if (n == 0) {
      s.constant = 0;
    } else if (f == 1) {
      s.constant = sq;
    } else {
      s.coef["sqrt" + f.get_str()] = sq;
    }
    s.indep_class = cls.empty() ? "sqrt_squarefree" : cls;
    return s;
  }
  if (value.empty()) throw InvalidInput("symbolic angle '" + label + "' needs an explicit value");
  s.coef[label] = 1;
  s.values[label] = value;
  s.indep_class = cls.empty() ? "numeric" : cls;
  return s;
}

Real SymbolicAngle::value(long prec) const {
  Real v = Real::from_rat(constant, prec);
  for (const auto& [k, c] : coef) {
    Real base(prec);
    if (values.count(k)) {
      base = Real::from_string(values.at(k), prec);
    } else if (k.rfind("log", 0) == 0) {
      base = log(Real::from_int(Int(k.substr(3)), prec));
    } else if (k.rfind("sqrt", 0) == 0) {
      base = sqrt(Real::from_int(Int(k.substr(4)), prec));
    } else {
      throw InvalidInput("no value for symbolic label " + k);
    }
    v += base * Real::from_rat(c, prec);
  }
  return v;
}

namespace {
double symbolic_err(const SymbolicAngle& s, long prec, const Real& v) {
  double e = std::ldexp(1.0 + std::fabs(v.to_double()), static_cast<int>(4 - prec));
  for (const auto& [k, c] : s.coef) {
    double w = std::fabs(c.get_d()) * 2 + 1;
    e = add_up(e, std::ldexp(w, static_cast<int>(2 - prec)));
    if (s.values.count(k)) e = add_up(e, std::fabs(c.get_d()) * decimal_err(s.values.at(k)));
  }
  return e;
}
}  // namespace

Angle::Angle(Rat q) : d_(std::move(q)) { std::get<Rat>(d_).canonicalize(); }
Angle::Angle(Lacunary l) : d_(std::move(l)) { std::get<Lacunary>(d_).check(); }
Angle::Angle(SymbolicAngle s) : d_(std::move(s)) {}

Real Angle::value(long prec, double* err) const {
  double e = 0.0;
  Real out(prec);
  if (is_rational()) {
    out = Real::from_rat(rat(), prec);
    e = ulp_bound(out);
  } else if (is_symbolic()) {
    out = sym().value(prec + 8).with_prec(prec);
    e = add_up(symbolic_err(sym(), prec, out), ulp_bound(out));
  } else {
    const Lacunary& l = lac();
    out = Real::from_rat(l.offset, prec + 16);
    for (const auto& t : l.terms) {
      ScaledReal s = ScaledReal::from_int(t.m, l.p, -t.e, prec + 16);
      if (s.representable() && s.abs_upper() > two_pow(-(prec + 24))) {
        out += s.to_real(prec + 16);
        e = add_up(e, std::ldexp(1.0, static_cast<int>(-(prec + 10))));
      } else {
        e = add_up(e, s.abs_upper());
      }
    }
    if (l.tail_coef != 0) e = add_up(e, ScaledReal::from_int(l.tail_coef, l.p, -l.tail_e).abs_upper());
    out = out.with_prec(prec);
    e = add_up(e, ulp_bound(out));
  }
  if (err) *err = e;
  return out;
}

double Angle::approx() const { return value(64, nullptr).to_double(); }

std::string Angle::describe() const {
  if (is_rational()) return rat().get_str();
  if (is_symbolic()) return sym().label;
  const Lacunary& l = lac();
  return "lacunary(p=" + std::to_string(l.p) + ", " + std::to_string(l.terms.size()) + " terms" +
         (l.family.empty() ? "" : ", " + l.family) + ")";
}

Angle operator+(const Angle& a, const Angle& b) {
  if (a.is_rational() && b.is_rational()) return Angle(Rat(a.rat() + b.rat()));
  if (a.is_lacunary() && b.is_rational()) {
    Lacunary l = a.lac();
    l.offset += b.rat();
    return Angle(l);
  }
  if (a.is_rational() && b.is_lacunary()) return b + a;
  if (a.is_lacunary() && b.is_lacunary()) return Angle(merge(a.lac(), b.lac(), +1));
  if (a.is_symbolic() && b.is_rational()) {
    SymbolicAngle s = a.sym();
    s.constant += b.rat();
    return Angle(s);
  }
  if (a.is_rational() && b.is_symbolic()) return b + a;
  if (a.is_symbolic() && b.is_symbolic()) return Angle(sym_combine(a.sym(), b.sym(), +1));
  throw InvalidInput("cannot add a lacunary angle and a symbolic angle");
}

Angle operator-(const Angle& a) {
  if (a.is_rational()) return Angle(Rat(-a.rat()));
  if (a.is_symbolic()) {
    SymbolicAngle s = a.sym();
    s.constant = -s.constant;
    for (auto& [k, v] : s.coef) v = -v;
    s.label = "-(" + s.label + ")";
    return Angle(s);
  }
  Lacunary l = a.lac();
  for (auto& t : l.terms) t.m = -t.m;
  l.offset = -l.offset;
  return Angle(l);
}

Angle operator-(const Angle& a, const Angle& b) {
  if (a.is_lacunary() && b.is_lacunary()) return Angle(merge(a.lac(), b.lac(), -1));
  return a + (-b);
}

Angle operator*(const Angle& a, const Int& k) {
  if (k == 0) return Angle();
  if (a.is_rational()) return Angle(Rat(a.rat() * k));
  if (a.is_symbolic()) {
    SymbolicAngle s = a.sym();
    s.constant *= k;
    for (auto& [key, v] : s.coef) v *= k;
    s.label = k.get_str() + "*(" + s.label + ")";
    return Angle(s);
  }
  Lacunary l = a.lac();
  for (auto& t : l.terms) t.m *= k;
  l.offset *= k;
  l.tail_coef *= abs(k);
  return Angle(l);
}

Index Index::atom(const std::shared_ptr<const Ladder>& ladder, int j, const Int& c) {
  Index n;
  n.c = c;
  n.base = ladder->base();
  n.E = Exponent::from_form(ladder, ladder->exponent_of(j));
  n.ladder = ladder;
  return n;
}

bool Index::is_literal() const {
  if (base == 0 || c == 0) return true;
  if (!E.is_literal()) return false;
  const Int& e = E.literal();
  return e >= 0 && e.get_d() * std::log2(static_cast<double>(base)) <= static_cast<double>(1L << 21);
}

Int Index::literal() const {
  if (base == 0 || c == 0) return c;
  if (!is_literal()) throw PrecisionUnreachable("index " + str() + " is too large to write down");
  Int v;
  mpz_ui_pow_ui(v.get_mpz_t(), static_cast<unsigned long>(base), E.literal().get_ui());
  return c * v;
}

Exponent Index::as_exponent() const {
  if (is_literal()) return Exponent(literal());
  if (!ladder) throw PrecisionUnreachable("index " + str() + " has no ladder to name it");
  int j = ladder->find(E.form());
  if (j < 0) throw PrecisionUnreachable("index " + str() + " is not an atom of its ladder");
  return Exponent::atom(ladder, j) * c;
}

std::string Index::str() const {
  if (is_literal()) return literal().get_str();
  std::string s = c == 1 ? "" : c.get_str() + "*";
  return s + std::to_string(base) + "^(" + E.str() + ")";
}

namespace {

// n written as c * p^E for the lacunary base p.
void index_in_base(const Index& n, int p, Int& c, Exponent& E) {
  if (n.base == p) {
    c = n.c;
    E = n.E;
    return;
  }
  if (!n.is_literal()) throw PrecisionUnreachable("index " + n.str() + " is not expressible in base " + std::to_string(p));
  Int N = n.literal();
  if (N == 0) {
    c = 0;
    E = Exponent(0L);
    return;
  }
  Int pp(p);
  unsigned long v = mpz_remove(c.get_mpz_t(), N.get_mpz_t(), pp.get_mpz_t());
  E = Exponent(static_cast<long>(v));
}

Rat times_index_mod2(const Rat& q, const Index& n) {
  if (n.is_literal()) return mod2(q * n.literal());
  Rat qq = q;
  qq.canonicalize();
  if (qq.get_den() != 1) throw PrecisionUnreachable("rational angle times a symbolic index");
  if (n.base % 2 == 1) return mod2(Rat(qq.get_num() * n.c));
  return Rat(0);  // n is even
}

}  // namespace

Reduced reduce_terms(const Angle& theta, const Index& n, long prec) {
  Reduced red;
  red.base = theta.is_lacunary() ? theta.lac().p : 2;
  red.tail = ScaledReal::zero(red.base);
  if (n.c == 0) return red;
  if (theta.is_rational()) {
    red.R = times_index_mod2(theta.rat(), n);
    return red;
  }
  if (theta.is_symbolic()) {
    Int N = n.literal();
    long extra = bits(N) + 16;
    Real v = theta.sym().value(prec + extra);
    double verr = symbolic_err(theta.sym(), prec + extra, v);
    Real x = v * Real::from_int(N, prec + extra);
    Real two(2.0, prec + extra);
    Real fl = floor(x / two);
    x = x - two * fl;
    red.has_A = true;
    red.A = x.with_prec(prec + 16);
    red.A_err = add_up(mul_up(verr, std::fabs(N.get_d())), pow2_up(8.0, -prec));
    return red;
  }
  const Lacunary& l = theta.lac();
  int p = l.p;
  Int c;
  Exponent E;
  index_in_base(n, p, c, E);
  if (c == 0) return red;
  Rat R = 0;
  if (l.offset != 0) R += times_index_mod2(l.offset, n);
  double lp = std::log2(static_cast<double>(p));
  for (const auto& t : l.terms) {
    Exponent D = E - t.e;
    int s = D.sign();
    Int cm = c * t.m;
    if (s >= 0) {
      if (p % 2 == 1) {
        R += Rat(Int(cm % 2 != 0 ? 1 : 0));
      } else if (s == 0) {
        R += Rat(Int(cm % 2 != 0 ? 1 : 0));
      }
      continue;
    }
    if (D.is_literal() && static_cast<double>(bits(cm)) + D.literal().get_d() * lp >= -64.0) {
      Int den;
      mpz_ui_pow_ui(den.get_mpz_t(), static_cast<unsigned long>(p), Int(-D.literal()).get_ui());
      R += mod2(Rat(cm, den));
      continue;
    }
    red.small.push_back(ScaledReal::from_int(cm, p, D, prec + 16));
  }
  if (l.tail_coef != 0) red.tail = ScaledReal::from_int(abs(c) * l.tail_coef, p, E - l.tail_e, prec + 16);
  red.R = mod2(R);
  return red;
}

ReduceResult reduce_mod2(const Angle& theta, const Index& n, double tol, const PrecisionPolicy& pol) {
  if (!(tol > 0)) throw InvalidInput("reduce_mod2: tol must be positive");
  Reduced red = reduce_terms(theta, n, pol.start_bits);
  if (!red.has_A && red.small.empty() && red.tail.is_zero()) {
    ReduceResult out{Real::from_rat(red.R, pol.start_bits), 0.0, red.R};
    return out;
  }
  for (long prec = pol.start_bits; prec <= pol.max_bits; prec *= 2) {
    if (red.has_A && prec != pol.start_bits) red = reduce_terms(theta, n, prec);
    long wp = prec + 16;
    Real r = Real::from_rat(red.R, wp);
    double err = ulp_bound(r);
    double fixed = red.tail.abs_upper();
    for (const auto& s : red.small) {
      double up = s.abs_upper();
      if (s.representable() && up > two_pow(-(prec + 16))) {
        r += s.to_real(wp);
        err = add_up(err, add_up(mul_up(up, s.err), std::ldexp(up, static_cast<int>(2 - wp))));
        err = add_up(err, ulp_bound(r));
      } else {
        fixed = add_up(fixed, up);
      }
    }
    if (!(fixed <= tol)) {
      throw PrecisionUnreachable("stored precision of " + theta.describe() + " cannot meet tolerance at n=" + n.str());
    }
    if (red.has_A) {
      r += red.A;
      err = add_up(err, add_up(red.A_err, ulp_bound(r)));
    }
    Real two(2.0, wp);
    Real fl = floor(r / two);
    if (!fl.is_zero()) {
      r = r - two * fl;
      err = add_up(err, ulp_bound(two));
    }
    err = add_up(err, fixed);
    if (err <= tol) return ReduceResult{r.with_prec(prec), add_up(err, ulp_bound(r)), std::nullopt};
    if (!red.has_A && std::ldexp(1.0, static_cast<int>(-prec)) < fixed * 1e-3) {
      // rounding no longer dominates; more bits cannot help
      break;
    }
  }
  throw PrecisionUnreachable("reduce_mod2: tolerance not reached within " + std::to_string(pol.max_bits) + " bits");
}

ComplexInterval unimodular_pow(const Angle& theta, const Index& n, double tol, const PrecisionPolicy& pol) {
  ReduceResult rr = reduce_mod2(theta, n, tol / 8, pol);
  if (rr.exact) {
    Rat two_q = 2 * *rr.exact;
    two_q.canonicalize();
    if (two_q.get_den() == 1) return ComplexInterval::unit(Real::from_rat(*rr.exact, 64), 0.0);
    for (long prec = pol.start_bits; prec <= pol.max_bits; prec *= 2) {
      Real r = Real::from_rat(*rr.exact, prec);
      ComplexInterval u = ComplexInterval::unit(r, ulp_bound(r));
      if (u.rad <= tol) return u;
    }
    throw PrecisionUnreachable("unimodular_pow: tolerance below the precision cap");
  }
  ComplexInterval u = ComplexInterval::unit(rr.r, rr.err);
  if (!(u.rad <= tol)) throw PrecisionUnreachable("unimodular_pow: tolerance below the precision cap");
  return u;
}

namespace {

// Signed sum of the tiny terms, with the tail folded into its relative error.
ScaledReal small_sum(const Reduced& red) {
  ScaledReal S = ScaledReal::zero(red.base);
  for (const auto& s : red.small) S = scaled_add(S, s);
  if (!red.tail.is_zero()) {
    if (S.is_zero()) throw PrecisionUnreachable("tail dominates the residual angle");
    double ratio = scaled_div(red.tail, scaled_abs(S)).abs_upper();
    S = scaled_widen(S, ratio);
  }
  return S;
}

ScaledComplex near_minus_one(const Reduced& red, double tol, const PrecisionPolicy& pol) {
  int p = red.base;
  ScaledComplex out;
  ScaledReal S = small_sum(red);
  if (S.is_zero()) {
    out.mag = ScaledReal::zero(p);
    out.phase = ComplexInterval::from_double(1.0, 0.0);
    return out;
  }
  for (long prec = pol.start_bits; prec <= pol.max_bits; prec *= 2) {
    ScaledReal pi_s = ScaledReal::from_real(Real::pi(prec), p, std::ldexp(1.0, static_cast<int>(1 - prec)));
    ScaledReal absS = scaled_abs(S);
    ScaledReal mag = scaled_mul(pi_s, absS);
    // |1 + e^{i pi (1+S)}| = 2 sin(pi|S|/2) = pi|S| * sinc, sinc = sin(x)/x
    double up = absS.abs_upper();
    if (absS.representable() && up > 1e-60) {
      Real x = Real::pi(prec + 16) * absS.to_real(prec + 16) / 2.0;
      Real f = sin(x) / x;
      mag = scaled_mul(mag, ScaledReal::from_real(f, p, pow2_up(4.0, -prec)));
    } else {
      double x = mul_up(up, 1.5708);
      mag = scaled_widen(mag, add_up(mul_up(mul_up(x, x), 0.17), kTiny));
    }
    mag = scaled_widen(mag, mul_up(S.err, 0.6));
    if (mag.err > tol && prec * 2 <= pol.max_bits) {
      if (S.err > tol) break;
      continue;
    }
    out.mag = mag;
    // phase of 1 + e^{i pi (1+S)} is e^{i pi ((1+S)/2 + [S>0])}
    if (S.representable() && up > 1e-60) {
      Real half = (Real(1.0, prec + 16) + S.to_real(prec + 16)) / 2.0;
      if (S.sign > 0) half = half + 1.0;
      out.phase = ComplexInterval::unit(half, add_up(mul_up(up, S.err), ulp_bound(half)));
    } else {
      out.phase = ComplexInterval::from_double(0.0, S.sign > 0 ? -1.0 : 1.0, 0.0, prec);
      out.phase.rad = add_up(mul_up(up, 1.5708), kTiny);
    }
    if (out.mag.err > tol) throw PrecisionUnreachable("one_plus_pow: relative tolerance not reached");
    return out;
  }
  throw PrecisionUnreachable("one_plus_pow: relative tolerance not reached");
}

}  // namespace

ScaledComplex one_plus_pow_complex(const Angle& theta, const Index& n, double tol, const PrecisionPolicy& pol) {
  if (!(tol > 0)) throw InvalidInput("one_plus_pow: tol must be positive");
  Reduced red = reduce_terms(theta, n, pol.start_bits);
  int base = red.base;
  if (!red.has_A && red.R == 1) return near_minus_one(red, tol, pol);
  for (long prec = pol.start_bits; prec <= pol.max_bits; prec *= 2) {
    PrecisionPolicy one{prec, prec};
    ReduceResult rr;
    try {
      rr = reduce_mod2(theta, n, std::max(std::ldexp(1.0, static_cast<int>(16 - prec)), 1e-300), one);
    } catch (const PrecisionUnreachable&) {
      if (prec * 2 > pol.max_bits) throw;
      continue;
    }
    long wp = prec + 16;
    Real half = rr.r.with_prec(wp) / 2.0;
    Real c = cos(Real::pi(wp) * half);
    double cerr = add_up(mul_up(rr.err, 1.5708), std::ldexp(8.0, static_cast<int>(-wp)));
    double ac = abs(c).to_double_down();
    if (rr.exact && (*rr.exact == 0)) {
      ScaledComplex out;
      out.mag = ScaledReal::from_real(Real(2.0, prec), base);
      out.phase = ComplexInterval::from_double(1.0, 0.0);
      return out;
    }
    if (ac > 0 && cerr / ac <= tol) {
      ScaledComplex out;
      out.mag = ScaledReal::from_real(abs(c) * 2.0, base, round_up(cerr / ac));
      if (c.sign() < 0) half = half + 1.0;
      out.phase = ComplexInterval::unit(half, add_up(rr.err / 2, ulp_bound(half)));
      return out;
    }
  }
  throw PrecisionUnreachable("one_plus_pow: relative tolerance not reached within the precision cap");
}

ScaledReal one_plus_pow(const Angle& theta, const Index& n, double tol, const PrecisionPolicy& pol) {
  return one_plus_pow_complex(theta, n, tol, pol).mag;
}

}  // namespace numcyc
