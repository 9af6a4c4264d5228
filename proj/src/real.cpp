#include "numcyc/real.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace numcyc {

namespace {
long max_prec(const Real& a, const Real& b) { return a.prec() > b.prec() ? a.prec() : b.prec(); }
}  // namespace

Real::Real(long prec) {
  mpfr_init2(v_, prec);
  mpfr_set_zero(v_, 1);
}

Real::Real(double v, long prec) {
  mpfr_init2(v_, prec);
  mpfr_set_d(v_, v, MPFR_RNDN);
}

Real::Real(const Real& o) {
  mpfr_init2(v_, o.prec());
  mpfr_set(v_, o.v_, MPFR_RNDN);
}

Real::Real(Real&& o) noexcept {
  mpfr_init2(v_, MPFR_PREC_MIN);
  mpfr_swap(v_, o.v_);
}

Real& Real::operator=(const Real& o) {
  if (this != &o) {
    mpfr_set_prec(v_, o.prec());
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  return *this;
}

Real& Real::operator=(Real&& o) noexcept {
  mpfr_swap(v_, o.v_);
  return *this;
}

Real::~Real() { mpfr_clear(v_); }

Real Real::from_int(const Int& v, long prec) {
  Real r(prec);
  mpfr_set_z(r.v_, v.get_mpz_t(), MPFR_RNDN);
  return r;
}

Real Real::from_rat(const Rat& v, long prec) {
  Real r(prec);
  mpfr_set_q(r.v_, v.get_mpq_t(), MPFR_RNDN);
  return r;
}

Real Real::from_string(const std::string& s, long prec) {
  Real r(prec);
  mpfr_set_str(r.v_, s.c_str(), 10, MPFR_RNDN);
  return r;
}

Real Real::pi(long prec) {
  Real r(prec);
  mpfr_const_pi(r.v_, MPFR_RNDN);
  return r;
}

Real Real::pow_int(long base, const Int& e, long prec) {
  Real b(prec);
  mpfr_set_si(b.v_, base, MPFR_RNDN);
  Real r(prec);
  mpfr_pow_z(r.v_, b.v_, e.get_mpz_t(), MPFR_RNDN);
  return r;
}

Real Real::with_prec(long prec) const {
  Real r(prec);
  mpfr_set(r.v_, v_, MPFR_RNDN);
  return r;
}

Rat Real::to_rat() const {
  Rat q;
  mpfr_get_q(q.get_mpq_t(), v_);
  return q;
}

std::string Real::str(int digits) const {
  std::vector<char> buf(static_cast<size_t>(digits) + 64);
  std::string fmt = "%." + std::to_string(digits) + "Rg";
  mpfr_snprintf(buf.data(), buf.size(), fmt.c_str(), v_);
  return std::string(buf.data());
}

Real& Real::operator+=(const Real& o) {
  if (o.prec() > prec()) mpfr_prec_round(v_, o.prec(), MPFR_RNDN);
  mpfr_add(v_, v_, o.v_, MPFR_RNDN);
  return *this;
}
Real& Real::operator-=(const Real& o) {
  if (o.prec() > prec()) mpfr_prec_round(v_, o.prec(), MPFR_RNDN);
  mpfr_sub(v_, v_, o.v_, MPFR_RNDN);
  return *this;
}
Real& Real::operator*=(const Real& o) {
  if (o.prec() > prec()) mpfr_prec_round(v_, o.prec(), MPFR_RNDN);
  mpfr_mul(v_, v_, o.v_, MPFR_RNDN);
  return *this;
}
Real& Real::operator/=(const Real& o) {
  if (o.prec() > prec()) mpfr_prec_round(v_, o.prec(), MPFR_RNDN);
  mpfr_div(v_, v_, o.v_, MPFR_RNDN);
  return *this;
}

Real operator+(const Real& a, const Real& b) {
  Real r(max_prec(a, b));
  mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN);
  return r;
}
Real operator-(const Real& a, const Real& b) {
  Real r(max_prec(a, b));
  mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN);
  return r;
}
Real operator*(const Real& a, const Real& b) {
  Real r(max_prec(a, b));
  mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN);
  return r;
}
Real operator/(const Real& a, const Real& b) {
  Real r(max_prec(a, b));
  mpfr_div(r.v_, a.v_, b.v_, MPFR_RNDN);
  return r;
}
Real operator-(const Real& a) {
  Real r(a.prec());
  mpfr_neg(r.v_, a.v_, MPFR_RNDN);
  return r;
}
Real operator*(const Real& a, double b) {
  Real r(a.prec());
  mpfr_mul_d(r.v_, a.v_, b, MPFR_RNDN);
  return r;
}
Real operator+(const Real& a, double b) {
  Real r(a.prec());
  mpfr_add_d(r.v_, a.v_, b, MPFR_RNDN);
  return r;
}
Real operator-(const Real& a, double b) {
  Real r(a.prec());
  mpfr_sub_d(r.v_, a.v_, b, MPFR_RNDN);
  return r;
}
Real operator/(const Real& a, double b) {
  Real r(a.prec());
  mpfr_div_d(r.v_, a.v_, b, MPFR_RNDN);
  return r;
}

#define NUMCYC_UNARY(name, fn)             \
  Real name(const Real& x) {               \
    Real r(x.prec());                      \
    fn(r.get(), x.get(), MPFR_RNDN);       \
    return r;                              \
  }

NUMCYC_UNARY(abs, mpfr_abs)
NUMCYC_UNARY(sqrt, mpfr_sqrt)
NUMCYC_UNARY(sin, mpfr_sin)
NUMCYC_UNARY(cos, mpfr_cos)
NUMCYC_UNARY(exp, mpfr_exp)
NUMCYC_UNARY(log, mpfr_log)
NUMCYC_UNARY(asin, mpfr_asin)
#undef NUMCYC_UNARY

Real floor(const Real& x) {
  Real r(x.prec());
  mpfr_floor(r.get(), x.get());
  return r;
}

Real atan2(const Real& y, const Real& x) {
  Real r(y.prec() > x.prec() ? y.prec() : x.prec());
  mpfr_atan2(r.get(), y.get(), x.get(), MPFR_RNDN);
  return r;
}

Real hypot(const Real& x, const Real& y) {
  Real r(y.prec() > x.prec() ? y.prec() : x.prec());
  mpfr_hypot(r.get(), x.get(), y.get(), MPFR_RNDN);
  return r;
}

double ulp_bound(const Real& x) {
  if (x.is_zero()) return 0.0;
  // |x| < 2^e, one rounding costs at most 2^(e - prec).
  long e = x.exponent2() - x.prec();
  if (e < -1074) return std::numeric_limits<double>::denorm_min();
  if (e > 1023) return std::numeric_limits<double>::infinity();
  return std::ldexp(1.0, static_cast<int>(e));
}

}  // namespace numcyc
