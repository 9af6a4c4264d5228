#include "numcyc/interval.hpp"

#include <cmath>
#include <limits>

#include "numcyc/errors.hpp"

namespace numcyc {

namespace {

double half_ulp(const Real& x) { return x.is_zero() ? 0.0 : ulp_bound(x); }

// Adds exactly when MPFR says so; otherwise charges one rounding of the result.
double charge(int ternary, const Real& r) { return ternary == 0 ? 0.0 : half_ulp(r); }

long pmax(const ComplexInterval& a, const ComplexInterval& b) { return std::max(a.prec(), b.prec()); }

}  // namespace

ComplexInterval ComplexInterval::from_double(double r, double i, double radius, long prec) {
  return ComplexInterval(Real(r, prec), Real(i, prec), radius);
}

ComplexInterval ComplexInterval::from_complex(std::complex<double> z, double radius, long prec) {
  return from_double(z.real(), z.imag(), radius, prec);
}

ComplexInterval ComplexInterval::unit(const Real& r, double err) {
  long prec = r.prec();
  Real pr = Real::pi(prec + 16) * r;
  ComplexInterval out(prec);
  // exact quarter turns come out exact
  Rat q = r.to_rat();
  Rat two_q = 2 * q;
  two_q.canonicalize();
  if (two_q.get_den() == 1) {
    Int k = two_q.get_num() % 4;
    if (k < 0) k += 4;
    long kk = k.get_si();
    out.re = Real(kk == 0 ? 1.0 : (kk == 2 ? -1.0 : 0.0), prec);
    out.im = Real(kk == 1 ? 1.0 : (kk == 3 ? -1.0 : 0.0), prec);
    out.rad = err == 0.0 ? 0.0 : mul_up(M_PI * (1 + 1e-15), err);
    return out;
  }
  out.re = cos(pr).with_prec(prec);
  out.im = sin(pr).with_prec(prec);
  // pi*r rounding plus cos/sin rounding, and |e^{ia}-e^{ib}| <= |a-b|.
  double round = mul_up(pow2_up(8.0, -prec), 1.0 + std::fabs(pr.to_double()));
  out.rad = add_up(mul_up(M_PI * (1 + 1e-15), err), round);
  return out;
}

double ComplexInterval::abs_upper() const {
  Real h = hypot(re, im);
  return add_up(add_up(h.to_double_up(), half_ulp(h)), rad);
}

double ComplexInterval::abs_lower() const {
  Real h = hypot(re, im);
  double v = h.to_double_down() - half_ulp(h) - rad;
  v = std::nextafter(v, -1.0);
  return v > 0 ? v : 0.0;
}

bool ComplexInterval::contains(std::complex<double> z) const {
  Real dr = re - Real(z.real(), 64);
  Real di = im - Real(z.imag(), 64);
  return hypot(dr, di).to_double_down() <= rad;
}

bool ComplexInterval::contains(const ComplexInterval& o) const {
  Real dr = re - o.re;
  Real di = im - o.im;
  return add_up(hypot(dr, di).to_double_up(), o.rad) <= rad;
}

ComplexInterval ComplexInterval::widened(double extra) const {
  ComplexInterval r = *this;
  r.rad = add_up(r.rad, extra);
  return r;
}

ComplexInterval ComplexInterval::conj() const { return ComplexInterval(re, -im, rad); }

std::string ComplexInterval::str(int digits) const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", rad);
  return re.str(digits) + (im.sign() < 0 ? " - " : " + ") + abs(im).str(digits) + "i +/- " + buf;
}

ComplexInterval operator+(const ComplexInterval& a, const ComplexInterval& b) {
  long p = pmax(a, b);
  ComplexInterval r(p);
  int t1 = mpfr_add(r.re.get(), a.re.get(), b.re.get(), MPFR_RNDN);
  int t2 = mpfr_add(r.im.get(), a.im.get(), b.im.get(), MPFR_RNDN);
  r.rad = add_up(add_up(a.rad, b.rad), add_up(charge(t1, r.re), charge(t2, r.im)));
  return r;
}

ComplexInterval operator-(const ComplexInterval& a) { return ComplexInterval(-a.re, -a.im, a.rad); }

ComplexInterval operator-(const ComplexInterval& a, const ComplexInterval& b) { return a + (-b); }

ComplexInterval operator*(const ComplexInterval& a, const ComplexInterval& b) {
  long p = pmax(a, b) + 8;
  Real t1(2 * p), t2(2 * p), t3(2 * p), t4(2 * p);
  int e1 = mpfr_mul(t1.get(), a.re.get(), b.re.get(), MPFR_RNDN);
  int e2 = mpfr_mul(t2.get(), a.im.get(), b.im.get(), MPFR_RNDN);
  int e3 = mpfr_mul(t3.get(), a.re.get(), b.im.get(), MPFR_RNDN);
  int e4 = mpfr_mul(t4.get(), a.im.get(), b.re.get(), MPFR_RNDN);
  ComplexInterval r(pmax(a, b));
  int f1 = mpfr_sub(r.re.get(), t1.get(), t2.get(), MPFR_RNDN);
  int f2 = mpfr_add(r.im.get(), t3.get(), t4.get(), MPFR_RNDN);
  double round = add_up(add_up(charge(e1, t1), charge(e2, t2)), add_up(charge(e3, t3), charge(e4, t4)));
  round = add_up(round, add_up(charge(f1, r.re), charge(f2, r.im)));
  double ma = hypot(a.re, a.im).to_double_up();
  double mb = hypot(b.re, b.im).to_double_up();
  double prop = add_up(add_up(mul_up(ma, b.rad), mul_up(mb, a.rad)), mul_up(a.rad, b.rad));
  r.rad = add_up(prop, round);
  return r;
}

ComplexInterval scale(const ComplexInterval& a, const Real& s, double rel) {
  long p = std::max(a.prec(), s.prec());
  ComplexInterval r(p);
  int t1 = mpfr_mul(r.re.get(), a.re.get(), s.get(), MPFR_RNDN);
  int t2 = mpfr_mul(r.im.get(), a.im.get(), s.get(), MPFR_RNDN);
  double as = abs(s).to_double_up();
  double prop = mul_up(a.rad, mul_up(as, 1.0 + rel));
  double relpart = mul_up(rel, mul_up(as, hypot(a.re, a.im).to_double_up()));
  r.rad = add_up(add_up(prop, relpart), add_up(charge(t1, r.re), charge(t2, r.im)));
  return r;
}

ComplexInterval ScaledComplex::to_interval(long prec) const {
  if (mag.is_zero()) return ComplexInterval(prec);
  Real m = mag.to_real(prec + 16);
  double rel = add_up(mag.err, pow2_up(4.0, -prec));
  return scale(phase, m, rel);
}

}  // namespace numcyc
