#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "numcyc/exponent.hpp"
#include "numcyc/interval.hpp"
#include "numcyc/real.hpp"
#include "numcyc/scaled.hpp"

namespace numcyc {

struct PrecisionPolicy {
  long start_bits = 128;
  long max_bits = 8192;
  // Reads NUMCYC_PRECISION_BITS as the starting precision when set.
  static PrecisionPolicy from_env();
};

struct LacTerm {
  Int m;
  Exponent e;
};

// offset + sum_s m_s p^{-e_s} + (omitted terms bounded by tail_coef * p^{-tail_e}).
struct Lacunary {
  int p = 3;
  std::shared_ptr<const Ladder> ladder;
  std::vector<LacTerm> terms;  // strictly increasing e
  Int tail_coef = 0;
  Exponent tail_e;
  Rat offset = 0;
  std::string family;  // how the angle was made, kept for serialization

  // Upper bound for |sum_{t >= s} m_t p^{-e_t}| plus the tail.
  ScaledReal tail_after(std::size_t s) const;
  void check() const;  // throws InvalidInput when exponents are not increasing
};

// constant + sum coef[label] * value(label). Labels are normalized: "log<prime>",
// "sqrt<squarefree>" or a user name with an explicit decimal value.
struct SymbolicAngle {
  Rat constant = 0;
  std::map<std::string, Rat> coef;
  std::map<std::string, std::string> values;  // explicit decimal values for user labels
  std::string indep_class;
  std::string label;  // as given, for serialization

  static SymbolicAngle parse(const std::string& label, const std::string& indep_class,
                             const std::string& value = "");
  Real value(long prec) const;
};

class Angle {
 public:
  using Data = std::variant<Rat, Lacunary, SymbolicAngle>;

  Angle() : d_(Rat(0)) {}
  Angle(Rat q);  // NOLINT(google-explicit-constructor)
  Angle(Lacunary l);  // NOLINT(google-explicit-constructor)
  Angle(SymbolicAngle s);  // NOLINT(google-explicit-constructor)
  static Angle rational(long a, long b) { return Angle(Rat(a, b)); }
  static Angle symbolic(const std::string& label, const std::string& cls = "") {
    return Angle(SymbolicAngle::parse(label, cls));
  }

  bool is_rational() const { return std::holds_alternative<Rat>(d_); }
  bool is_lacunary() const { return std::holds_alternative<Lacunary>(d_); }
  bool is_symbolic() const { return std::holds_alternative<SymbolicAngle>(d_); }
  const Rat& rat() const { return std::get<Rat>(d_); }
  const Lacunary& lac() const { return std::get<Lacunary>(d_); }
  const SymbolicAngle& sym() const { return std::get<SymbolicAngle>(d_); }
  const Data& data() const { return d_; }

  // theta to within *err (absolute).
  Real value(long prec, double* err) const;
  double approx() const;
  std::string describe() const;

  friend Angle operator+(const Angle& a, const Angle& b);
  friend Angle operator-(const Angle& a, const Angle& b);
  friend Angle operator-(const Angle& a);
  friend Angle operator*(const Angle& a, const Int& k);

 private:
  Data d_;
};

// An exponent n = c * base^E, possibly too large to write down. base 0 means
// a plain integer.
struct Index {
  Int c = 0;
  int base = 0;
  Exponent E;
  std::shared_ptr<const Ladder> ladder;  // used to name n as an atom

  Index() = default;
  Index(const Int& n) : c(n) {}  // NOLINT(google-explicit-constructor)
  Index(long n) : c(n) {}  // NOLINT(google-explicit-constructor)
  // c * nu_j for atom j of the ladder
  static Index atom(const std::shared_ptr<const Ladder>& ladder, int j, const Int& c = 1);

  bool is_literal() const;
  Int literal() const;
  // n as an Exponent, e.g. for R^n with R = base.
  Exponent as_exponent() const;
  std::string str() const;
};

struct ReduceResult {
  Real r;       // in [0, 2)
  double err;   // |r - (n theta mod 2)| <= err, 0 when exact holds the value
  std::optional<Rat> exact;
};

// n*theta mod 2 split into an exact rational part, tiny terms kept at
// relative precision, and an absolute tail.
struct Reduced {
  Rat R = 0;
  std::vector<ScaledReal> small;
  ScaledReal tail;
  bool has_A = false;
  Real A{128};
  double A_err = 0.0;
  int base = 2;
};

Reduced reduce_terms(const Angle& theta, const Index& n, long prec = 128);
ReduceResult reduce_mod2(const Angle& theta, const Index& n, double tol,
                         const PrecisionPolicy& pol = PrecisionPolicy());
ComplexInterval unimodular_pow(const Angle& theta, const Index& n, double tol,
                               const PrecisionPolicy& pol = PrecisionPolicy());
// 1 + e^{i pi n theta} as modulus times unit phase, modulus at relative precision tol.
ScaledComplex one_plus_pow_complex(const Angle& theta, const Index& n, double tol,
                                   const PrecisionPolicy& pol = PrecisionPolicy());
ScaledReal one_plus_pow(const Angle& theta, const Index& n, double tol,
                        const PrecisionPolicy& pol = PrecisionPolicy());

// x mod 2 into [0, 2).
Rat mod2(const Rat& x);

}  // namespace numcyc
