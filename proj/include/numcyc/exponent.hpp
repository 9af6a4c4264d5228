#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "numcyc/real.hpp"

namespace numcyc {

// c0 + sum_j c[j] * nu_j, where nu_j is atom j of a Ladder.
struct LinForm {
  Int c0 = 0;
  std::map<int, Int> c;

  bool literal() const { return c.empty(); }
  int top() const { return c.empty() ? -1 : c.rbegin()->first; }
  std::string key() const;
  friend bool operator==(const LinForm& a, const LinForm& b) { return a.c0 == b.c0 && a.c == b.c; }
};

// Towers of powers of a fixed base p. Atom j stands for nu_j = p^{e_j}, where
// e_j is a LinForm over earlier atoms. Atoms small enough to hold as integers
// are materialized and folded away; the rest stay symbolic.
class Ladder {
 public:
  explicit Ladder(int p, long materialize_bits = 1L << 21);
  Ladder(const Ladder& o) : p_(o.p_), mat_bits_(o.mat_bits_), atoms_(o.atoms_) {}

  int base() const { return p_; }
  long materialize_bits() const { return mat_bits_; }
  int size() const { return static_cast<int>(atoms_.size()); }
  int push(const LinForm& e);
  const LinForm& exponent_of(int j) const { return atoms_.at(j).e; }
  bool materialized(int j) const { return atoms_.at(j).materialized; }
  const Int& value(int j) const { return atoms_.at(j).value; }

  LinForm fold(const LinForm& f) const;
  // Index of an atom whose exponent equals f, or -1.
  int find(const LinForm& f) const;
  // Certified sign of a folded form.
  int sign(const LinForm& f) const;
  std::string render(const LinForm& f) const;

 private:
  struct Atom {
    LinForm e;
    bool materialized = false;
    Int value;
  };
  int p_;
  long mat_bits_;
  std::vector<Atom> atoms_;
  mutable std::mutex memo_mu_;
  mutable std::map<std::string, int> memo_;

  LinForm log_bound(const Int& coef, int atom) const;
  int sign_uncached(const LinForm& f) const;
};

// An integer that may be far too large to write down, e.g. p^{nu_3} + 4.
class Exponent {
 public:
  Exponent() = default;
  Exponent(long v) { f_.c0 = v; }  // NOLINT(google-explicit-constructor)
  Exponent(const Int& v) { f_.c0 = v; }  // NOLINT(google-explicit-constructor)
  static Exponent atom(std::shared_ptr<const Ladder> ladder, int j);
  static Exponent from_form(std::shared_ptr<const Ladder> ladder, const LinForm& f);

  bool is_literal() const { return f_.literal(); }
  const Int& literal() const;
  int sign() const;
  const LinForm& form() const { return f_; }
  const std::shared_ptr<const Ladder>& ladder() const { return ladder_; }
  std::string str() const;

  friend Exponent operator+(const Exponent& a, const Exponent& b);
  friend Exponent operator-(const Exponent& a, const Exponent& b);
  friend Exponent operator-(const Exponent& a);
  friend Exponent operator*(const Exponent& a, const Int& k);
  friend int compare(const Exponent& a, const Exponent& b) { return (a - b).sign(); }
  friend bool operator==(const Exponent& a, const Exponent& b) {
    Exponent d = a - b;
    return d.is_literal() && d.literal() == 0;
  }

 private:
  LinForm f_;
  std::shared_ptr<const Ladder> ladder_;
};

}  // namespace numcyc
