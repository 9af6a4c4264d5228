#include "numcyc/scaled.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "numcyc/errors.hpp"

namespace numcyc {

namespace {

constexpr double kTiny = std::numeric_limits<double>::denorm_min();
constexpr double kInf = std::numeric_limits<double>::infinity();

double log2_base(int base) { return std::log2(static_cast<double>(base)); }

double rounding(long prec, int ops) { return std::ldexp(static_cast<double>(ops), static_cast<int>(1 - prec)); }

void check_err(double err) {
  if (!(err < 1.0)) throw PrecisionUnreachable("relative error of a scaled quantity reached 1");
}

// |x| > 0 written as mant * base^k with mant in [1, base).
ScaledReal normalize(int sign, Real x, int base, const Exponent& shift, double err) {
  ScaledReal r;
  r.base = base;
  r.sign = sign;
  long prec = x.prec();
  Real lg(prec);
  mpfr_log2(lg.get(), x.get(), MPFR_RNDN);
  long k = static_cast<long>(std::floor(lg.to_double() / log2_base(base)));
  if (k != 0) {
    Real pw(prec + 32), bb(static_cast<double>(base), 64);
    bool inexact = mpfr_pow_si(pw.get(), bb.get(), k, MPFR_RNDN) != 0;
    inexact = (mpfr_div(x.get(), x.get(), pw.get(), MPFR_RNDN) != 0) || inexact;
    if (inexact) err = add_up(err, rounding(prec, 2));
  }
  Real b(static_cast<double>(base), prec);
  while (x >= b) {
    if (mpfr_div_ui(x.get(), x.get(), static_cast<unsigned long>(base), MPFR_RNDN) != 0) {
      err = add_up(err, rounding(prec, 1));
    }
    ++k;
  }
  while (x < 1.0) {
    if (mpfr_mul_ui(x.get(), x.get(), static_cast<unsigned long>(base), MPFR_RNDN) != 0) {
      err = add_up(err, rounding(prec, 1));
    }
    --k;
  }
  r.mant = std::move(x);
  r.expo = shift + Exponent(k);
  r.err = err;
  check_err(r.err);
  return r;
}

// Smallest K with base^-K below every positive double.
long underflow_gap(int base) { return static_cast<long>(std::ceil(1080.0 / log2_base(base))) + 2; }

}  // namespace

const char* to_string(Cmp c) {
  switch (c) {
    case Cmp::Less: return "LESS";
    case Cmp::Equal: return "EQUAL";
    case Cmp::Greater: return "GREATER";
    default: return "UNKNOWN";
  }
}

double round_up(double x) { return x == 0.0 ? 0.0 : std::nextafter(x, kInf); }
double add_up(double a, double b) { return round_up(a + b); }
double mul_up(double a, double b) { return round_up(a * b); }

double pow2_up(double c, long k) {
  if (c <= 0) return 0.0;
  if (k < -2000) return std::numeric_limits<double>::denorm_min();
  return std::max(round_up(std::ldexp(c, static_cast<int>(k))), std::numeric_limits<double>::denorm_min());
}

ScaledReal ScaledReal::zero(int base) {
  ScaledReal r;
  r.base = base;
  r.mant = Real(1.0, 64);
  return r;
}

ScaledReal ScaledReal::from_real(const Real& x, int base, double rel_err, const Exponent& shift) {
  if (x.is_zero()) return zero(base);
  if (!x.is_finite()) throw PrecisionUnreachable("non-finite value in scaled arithmetic");
  return normalize(x.sign(), abs(x), base, shift, rel_err);
}

ScaledReal ScaledReal::from_int(const Int& v, int base, const Exponent& shift, long prec) {
  if (v == 0) return zero(base);
  long bits = static_cast<long>(mpz_sizeinbase(v.get_mpz_t(), 2));
  Real x = Real::from_int(v, prec);
  double err = bits > prec ? rounding(prec, 1) : 0.0;
  return normalize(sgn(v), abs(x), base, shift, err);
}

ScaledReal ScaledReal::power(int base, const Exponent& e, long prec) {
  ScaledReal r;
  r.base = base;
  r.sign = 1;
  r.mant = Real(1.0, prec);
  r.expo = e;
  return r;
}

bool ScaledReal::representable() const {
  if (sign == 0) return true;
  if (!expo.is_literal()) return false;
  const Int& e = expo.literal();
  return abs(e) < Int(1L << 29) && std::fabs(e.get_d() * log2_base(base)) < static_cast<double>(1L << 29);
}

Real ScaledReal::to_real(long prec) const {
  if (sign == 0) return Real(prec);
  if (!representable()) throw PrecisionUnreachable("scaled value " + str() + " is outside the floating range");
  Real r = mant.with_prec(prec) * Real::pow_int(base, expo.literal(), prec);
  return sign < 0 ? -r : r;
}

double ScaledReal::log_base() const {
  if (sign == 0) return -kInf;
  Real lg(mant.prec());
  mpfr_log2(lg.get(), mant.get(), MPFR_RNDN);
  return expo.literal().get_d() + lg.to_double() / log2_base(base);
}

double ScaledReal::abs_upper() const {
  if (sign == 0) return 0.0;
  double lb = log2_base(base);
  if (expo.is_literal()) {
    double e2 = expo.literal().get_d() * lb;
    if (e2 > 1100) return kInf;
    if (e2 < -1150) return kTiny;
    double m = mul_up(mant.to_double_up(), add_up(1.0, err));
    double v = m * std::pow(static_cast<double>(base), expo.literal().get_d());
    return round_up(round_up(v) + kTiny);
  }
  try {
    if (compare(expo, Exponent(-underflow_gap(base))) < 0) return kTiny;
  } catch (const PrecisionUnreachable&) {
  }
  return kInf;
}

double ScaledReal::abs_lower() const {
  if (sign == 0) return 0.0;
  if (expo.is_literal()) {
    double e2 = expo.literal().get_d() * log2_base(base);
    if (e2 > 1100) return std::numeric_limits<double>::max();
    if (e2 < -1000) return 0.0;
    double m = mant.to_double_down() * (1.0 - err);
    double v = m * std::pow(static_cast<double>(base), expo.literal().get_d());
    return std::max(0.0, std::nextafter(std::nextafter(v, 0.0), 0.0));
  }
  try {
    if (expo.sign() > 0) return std::numeric_limits<double>::max();
  } catch (const PrecisionUnreachable&) {
  }
  return 0.0;
}

std::string ScaledReal::str(int digits) const {
  if (sign == 0) return "0";
  std::string s = sign < 0 ? "-" : "";
  s += mant.str(digits) + "*" + std::to_string(base) + "^(" + expo.str() + ")";
  if (err > 0) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2g", err);
    s += " (rel " + std::string(buf) + ")";
  }
  return s;
}

ScaledReal scaled_mul(const ScaledReal& a, const ScaledReal& b) {
  if (a.sign == 0 || b.sign == 0) return ScaledReal::zero(a.sign == 0 ? a.base : b.base);
  if (a.base != b.base) throw InvalidInput("scaled_mul: bases differ");
  ScaledReal r;
  r.base = a.base;
  r.sign = a.sign * b.sign;
  long prec = std::max(a.mant.prec(), b.mant.prec());
  r.mant = Real(prec);
  bool inexact = mpfr_mul(r.mant.get(), a.mant.get(), b.mant.get(), MPFR_RNDN) != 0;
  r.expo = a.expo + b.expo;
  double err = add_up(add_up(a.err, b.err), mul_up(a.err, b.err));
  if (inexact) err = add_up(err, rounding(prec, 1));
  if (r.mant >= Real(static_cast<double>(r.base), prec)) {
    if (mpfr_div_ui(r.mant.get(), r.mant.get(), static_cast<unsigned long>(r.base), MPFR_RNDN) != 0) {
      err = add_up(err, rounding(prec, 1));
    }
    r.expo = r.expo + Exponent(1L);
  }
  r.err = err;
  check_err(r.err);
  return r;
}

ScaledReal scaled_div(const ScaledReal& a, const ScaledReal& b) {
  if (b.sign == 0) throw InvalidInput("scaled_div: division by zero");
  if (a.sign == 0) return ScaledReal::zero(a.base);
  if (a.base != b.base) throw InvalidInput("scaled_div: bases differ");
  ScaledReal r;
  r.base = a.base;
  r.sign = a.sign * b.sign;
  r.mant = a.mant / b.mant;
  r.expo = a.expo - b.expo;
  long prec = r.mant.prec();
  double err = round_up(add_up(a.err, b.err) / (1.0 - b.err));
  err = add_up(err, rounding(prec, 1));
  if (r.mant < 1.0) {
    r.mant *= Real(static_cast<double>(r.base), prec);
    r.expo = r.expo - Exponent(1L);
    err = add_up(err, rounding(prec, 1));
  }
  r.err = err;
  check_err(r.err);
  return r;
}

ScaledReal scaled_neg(const ScaledReal& a) {
  ScaledReal r = a;
  r.sign = -r.sign;
  return r;
}

ScaledReal scaled_abs(const ScaledReal& a) {
  ScaledReal r = a;
  if (r.sign < 0) r.sign = 1;
  return r;
}

ScaledReal scaled_widen(const ScaledReal& a, double extra_rel) {
  if (a.sign == 0) return a;
  ScaledReal r = a;
  r.err = add_up(r.err, extra_rel);
  check_err(r.err);
  return r;
}

ScaledReal scaled_add(const ScaledReal& a, const ScaledReal& b) {
  if (a.sign == 0) return b;
  if (b.sign == 0) return a;
  if (a.base != b.base) throw InvalidInput("scaled_add: bases differ");
  int base = a.base;
  double lb = log2_base(base);
  long prec = std::max(a.mant.prec(), b.mant.prec());
  Exponent d = a.expo - b.expo;
  if (d.is_literal() && std::fabs(d.literal().get_d()) * lb <= 2.0 * static_cast<double>(prec) + 64.0) {
    // Close exponents: add exactly in units of base^{min exponent}.
    long dl = d.literal().get_si();
    const ScaledReal& hi = dl >= 0 ? a : b;
    const ScaledReal& lo = dl >= 0 ? b : a;
    long g = dl >= 0 ? dl : -dl;
    Real scale = Real::pow_int(base, Int(-g), prec + 16);
    Real vh = hi.mant.with_prec(prec + 16);
    if (hi.sign < 0) vh = -vh;
    Real vl = lo.mant.with_prec(prec + 16) * scale;
    if (lo.sign < 0) vl = -vl;
    Real s = vh + vl;
    double abs_err = add_up(mul_up(hi.err, hi.mant.to_double_up()),
                            mul_up(lo.err, mul_up(lo.mant.to_double_up(), scale.to_double_up())));
    abs_err = add_up(abs_err, mul_up(rounding(prec + 16, 3), static_cast<double>(base)));
    if (s.is_zero()) {
      if (a.err == 0.0 && b.err == 0.0) return ScaledReal::zero(base);
      throw PrecisionUnreachable("scaled_add: cancellation below the error radius");
    }
    double rel = round_up(abs_err / abs(s).to_double_down());
    if (a.err == 0.0 && b.err == 0.0 && g == 0) {
      Real probe(prec + 16);
      if (mpfr_add(probe.get(), vh.get(), vl.get(), MPFR_RNDN) == 0) rel = 0.0;  // exact sum
    }
    int sign = s.sign();
    ScaledReal r = normalize(sign, abs(s), base, hi.expo, rel);
    return r;
  }
  int ds = d.sign();  // throws when the order cannot be certified
  const ScaledReal& x = ds > 0 ? a : b;
  const ScaledReal& y = ds > 0 ? b : a;
  Exponent gap = ds > 0 ? d : -d;
  double ratio;
  if (gap.is_literal()) {
    double l2 = lb * (1.0 - gap.literal().get_d()) + std::log2(1.0 + y.err);
    ratio = l2 < -1070 ? kTiny : round_up(std::ldexp(1.0, static_cast<int>(std::ceil(l2))));
  } else {
    if (compare(gap, Exponent(underflow_gap(base))) <= 0) {
      throw PrecisionUnreachable("scaled_add: exponent gap not certified");
    }
    ratio = kTiny;
  }
  return scaled_widen(x, ratio);
}

namespace {

// Compare |a| with |b| for nonzero a, b.
Cmp cmp_magnitude(const ScaledReal& a, const ScaledReal& b) {
  Exponent d = a.expo - b.expo;
  if (d.is_literal() && d.literal() == 0 && a.err == 0.0 && b.err == 0.0) {
    if (a.mant == b.mant) return Cmp::Equal;
    return a.mant > b.mant ? Cmp::Greater : Cmp::Less;
  }
  double lb = log2_base(a.base);
  if (!d.is_literal()) {
    int s;
    try {
      s = d.sign();
    } catch (const PrecisionUnreachable&) {
      return Cmp::Unknown;
    }
    // A symbolic gap dwarfs any mantissa ratio as long as errors stay away from 1.
    if (a.err > 1.0 - 1e-12 || b.err > 1.0 - 1e-12) return Cmp::Unknown;
    return s > 0 ? Cmp::Greater : Cmp::Less;
  }
  double dd = d.literal().get_d();
  double a_lo = std::log2(a.mant.to_double_down() * (1.0 - a.err)) / lb;
  double a_hi = std::log2(a.mant.to_double_up() * (1.0 + a.err)) / lb;
  double b_lo = std::log2(b.mant.to_double_down() * (1.0 - b.err)) / lb;
  double b_hi = std::log2(b.mant.to_double_up() * (1.0 + b.err)) / lb;
  double margin = 1e-12 * (1.0 + std::fabs(dd));
  if (dd + a_lo > b_hi + margin) return Cmp::Greater;
  if (dd + a_hi < b_lo - margin) return Cmp::Less;
  return Cmp::Unknown;
}

Cmp flip(Cmp c) {
  if (c == Cmp::Less) return Cmp::Greater;
  if (c == Cmp::Greater) return Cmp::Less;
  return c;
}

}  // namespace

Cmp scaled_cmp(const ScaledReal& a, const ScaledReal& b) {
  if (a.sign == 0 && b.sign == 0) return Cmp::Equal;
  if (a.sign == 0) return b.sign > 0 ? Cmp::Less : Cmp::Greater;
  if (b.sign == 0) return a.sign > 0 ? Cmp::Greater : Cmp::Less;
  if (a.sign != b.sign) return a.sign > 0 ? Cmp::Greater : Cmp::Less;
  if (a.base != b.base) throw InvalidInput("scaled_cmp: bases differ");
  Cmp m = cmp_magnitude(a, b);
  return a.sign > 0 ? m : flip(m);
}

}  // namespace numcyc
