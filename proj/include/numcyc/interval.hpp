#pragma once

#include <complex>
#include <string>

#include "numcyc/real.hpp"
#include "numcyc/scaled.hpp"

namespace numcyc {

// Disk enclosure: center (re, im), radius rad.
struct ComplexInterval {
  Real re{128};
  Real im{128};
  double rad = 0.0;

  ComplexInterval() = default;
  explicit ComplexInterval(long prec) : re(prec), im(prec) {}
  ComplexInterval(Real r, Real i, double radius) : re(std::move(r)), im(std::move(i)), rad(radius) {}
  static ComplexInterval from_double(double r, double i, double radius = 0.0, long prec = 128);
  static ComplexInterval from_complex(std::complex<double> z, double radius = 0.0, long prec = 128);
  // e^{i pi r} where r is known to within err.
  static ComplexInterval unit(const Real& r, double err);

  long prec() const { return std::max(re.prec(), im.prec()); }
  std::complex<double> center() const { return {re.to_double(), im.to_double()}; }
  double abs_upper() const;
  double abs_lower() const;
  bool contains(std::complex<double> z) const;
  bool contains(const ComplexInterval& o) const;  // o's disk inside ours
  ComplexInterval widened(double extra) const;
  ComplexInterval conj() const;
  std::string str(int digits = 17) const;
};

ComplexInterval operator+(const ComplexInterval& a, const ComplexInterval& b);
ComplexInterval operator-(const ComplexInterval& a, const ComplexInterval& b);
ComplexInterval operator-(const ComplexInterval& a);
ComplexInterval operator*(const ComplexInterval& a, const ComplexInterval& b);
// Multiply by a real known to relative error rel.
ComplexInterval scale(const ComplexInterval& a, const Real& s, double rel = 0.0);

// mag * phase, where mag may be far outside floating range and phase is a
// moderate complex enclosure (a unit number in the one_plus_pow case).
struct ScaledComplex {
  ScaledReal mag;
  ComplexInterval phase;

  bool representable() const { return mag.representable(); }
  ComplexInterval to_interval(long prec) const;
};

}  // namespace numcyc
