#pragma once

#include <string>

#include "numcyc/exponent.hpp"
#include "numcyc/real.hpp"

namespace numcyc {

enum class Cmp { Less, Equal, Greater, Unknown };

const char* to_string(Cmp c);

// sign * mant * base^expo, known up to a relative error err < 1.
// mant lies in [1, base). Zero has sign 0 and err 0.
struct ScaledReal {
  int sign = 0;
  Real mant{128};
  int base = 2;
  Exponent expo;
  double err = 0.0;

  static ScaledReal zero(int base);
  // x * base^shift with x carrying relative error rel_err.
  static ScaledReal from_real(const Real& x, int base, double rel_err = 0.0, const Exponent& shift = Exponent(0L));
  static ScaledReal from_int(const Int& v, int base, const Exponent& shift = Exponent(0L), long prec = 128);
  static ScaledReal power(int base, const Exponent& e, long prec = 128);  // base^e, exact

  bool is_zero() const { return sign == 0; }
  // Whether to_real can produce the value without leaving MPFR's exponent range.
  bool representable() const;
  Real to_real(long prec) const;  // throws PrecisionUnreachable when not representable
  // Upper bound on |value| as a double (may be +inf); exact tiny values give denorm_min.
  double abs_upper() const;
  double abs_lower() const;
  // log_base |value| of the center; requires a literal exponent.
  double log_base() const;
  std::string str(int digits = 12) const;
};

ScaledReal scaled_mul(const ScaledReal& a, const ScaledReal& b);
ScaledReal scaled_div(const ScaledReal& a, const ScaledReal& b);
ScaledReal scaled_add(const ScaledReal& a, const ScaledReal& b);
ScaledReal scaled_neg(const ScaledReal& a);
ScaledReal scaled_abs(const ScaledReal& a);
// Widen the relative error; throws PrecisionUnreachable if it reaches 1.
ScaledReal scaled_widen(const ScaledReal& a, double extra_rel);
Cmp scaled_cmp(const ScaledReal& a, const ScaledReal& b);

// Rounding helpers for error bookkeeping in doubles.
double round_up(double x);
double add_up(double a, double b);
double mul_up(double a, double b);
// c * 2^k as an upper bound that never underflows to 0.
double pow2_up(double c, long k);

}  // namespace numcyc
