#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <string>

namespace numcyc {

using Int = mpz_class;
using Rat = mpq_class;

// Owning wrapper around an mpfr_t. Every operation rounds to nearest, so the
// relative error of a single result is at most 2^-prec.
class Real {
 public:
  explicit Real(long prec = 128);
  Real(double v, long prec);
  Real(const Real& o);
  Real(Real&& o) noexcept;
  Real& operator=(const Real& o);
  Real& operator=(Real&& o) noexcept;
  ~Real();

  static Real from_int(const Int& v, long prec);
  static Real from_rat(const Rat& v, long prec);
  static Real from_string(const std::string& s, long prec);
  static Real pi(long prec);
  static Real pow_int(long base, const Int& e, long prec);  // base^e, e may be negative

  long prec() const { return mpfr_get_prec(v_); }
  Real with_prec(long prec) const;
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  // Rounded up/down so that callers can build enclosures from doubles.
  double to_double_up() const { return mpfr_get_d(v_, MPFR_RNDU); }
  double to_double_down() const { return mpfr_get_d(v_, MPFR_RNDD); }
  Rat to_rat() const;
  int sign() const { return mpfr_sgn(v_); }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  long exponent2() const { return is_zero() ? 0 : mpfr_get_exp(v_); }  // x = m*2^e, m in [1/2,1)
  std::string str(int digits = 20) const;

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

  Real& operator+=(const Real& o);
  Real& operator-=(const Real& o);
  Real& operator*=(const Real& o);
  Real& operator/=(const Real& o);

  friend Real operator+(const Real& a, const Real& b);
  friend Real operator-(const Real& a, const Real& b);
  friend Real operator*(const Real& a, const Real& b);
  friend Real operator/(const Real& a, const Real& b);
  friend Real operator-(const Real& a);
  friend Real operator*(const Real& a, double b);
  friend Real operator*(double b, const Real& a) { return a * b; }
  friend Real operator+(const Real& a, double b);
  friend Real operator-(const Real& a, double b);
  friend Real operator/(const Real& a, double b);

  friend bool operator<(const Real& a, const Real& b) { return mpfr_less_p(a.v_, b.v_); }
  friend bool operator>(const Real& a, const Real& b) { return mpfr_greater_p(a.v_, b.v_); }
  friend bool operator<=(const Real& a, const Real& b) { return mpfr_lessequal_p(a.v_, b.v_); }
  friend bool operator>=(const Real& a, const Real& b) { return mpfr_greaterequal_p(a.v_, b.v_); }
  friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.v_, b.v_); }
  friend bool operator<(const Real& a, double b) { return mpfr_cmp_d(a.v_, b) < 0; }
  friend bool operator>(const Real& a, double b) { return mpfr_cmp_d(a.v_, b) > 0; }

 private:
  mpfr_t v_;
};

Real abs(const Real& x);
Real sqrt(const Real& x);
Real sin(const Real& x);
Real cos(const Real& x);
Real exp(const Real& x);
Real log(const Real& x);
Real atan2(const Real& y, const Real& x);
Real floor(const Real& x);
Real asin(const Real& x);
Real hypot(const Real& x, const Real& y);

// 2^-prec scaled to |x|: an upper bound for one rounding of x.
double ulp_bound(const Real& x);

}  // namespace numcyc
