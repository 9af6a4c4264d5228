#include "numcyc/exponent.hpp"

#include <cmath>

#include "numcyc/errors.hpp"

namespace numcyc {

namespace {

long bits_of(const Int& v) { return v == 0 ? 0 : static_cast<long>(mpz_sizeinbase(v.get_mpz_t(), 2)); }

void add_term(LinForm& f, int j, const Int& k) {
  if (k == 0) return;
  auto it = f.c.find(j);
  if (it == f.c.end()) {
    f.c.emplace(j, k);
  } else {
    it->second += k;
    if (it->second == 0) f.c.erase(it);
  }
}

LinForm combine(const LinForm& a, const LinForm& b, int sb) {
  LinForm r = a;
  if (sb > 0) {
    r.c0 += b.c0;
  } else {
    r.c0 -= b.c0;
  }
  for (const auto& [j, k] : b.c) add_term(r, j, sb > 0 ? k : Int(-k));
  return r;
}

}  // namespace

std::string LinForm::key() const {
  std::string k = c0.get_str(16);
  for (const auto& [j, v] : c) k += "|" + std::to_string(j) + ":" + v.get_str(16);
  return k;
}

int Ladder::find(const LinForm& f) const {
  LinForm g = fold(f);
  for (int j = 0; j < size(); ++j) {
    if (atoms_[j].e == g) return j;
  }
  return -1;
}

Ladder::Ladder(int p, long materialize_bits) : p_(p), mat_bits_(materialize_bits) {
  if (p < 2) throw InvalidInput("ladder base must be at least 2");
}

LinForm Ladder::fold(const LinForm& f) const {
  LinForm r;
  r.c0 = f.c0;
  for (const auto& [j, k] : f.c) {
    if (j < 0 || j >= size()) throw InvalidInput("exponent references an unknown atom");
    if (atoms_[j].materialized) {
      r.c0 += k * atoms_[j].value;
    } else {
      add_term(r, j, k);
    }
  }
  return r;
}

int Ladder::push(const LinForm& e_in) {
  Atom a;
  a.e = fold(e_in);
  if (a.e.literal() && a.e.c0 >= 0) {
    double bits = a.e.c0.get_d() * std::log2(static_cast<double>(p_));
    if (bits <= static_cast<double>(mat_bits_)) {
      a.materialized = true;
      mpz_ui_pow_ui(a.value.get_mpz_t(), static_cast<unsigned long>(p_), a.e.c0.get_ui());
    }
  }
  atoms_.push_back(std::move(a));
  return size() - 1;
}

LinForm Ladder::log_bound(const Int& coef, int atom) const {
  // |coef * nu_atom| <= p^{bound}; atom < 0 means a bare integer.
  double lp = std::log2(static_cast<double>(p_));
  LinForm b;
  b.c0 = static_cast<long>(std::ceil(static_cast<double>(bits_of(coef)) / lp)) + 1;
  if (atom >= 0) b = combine(b, atoms_[atom].e, +1);
  return b;
}

int Ladder::sign(const LinForm& f) const {
  if (f.literal()) return sgn(f.c0);
  std::string key = f.key();
  {
    std::lock_guard<std::mutex> lk(memo_mu_);
    auto it = memo_.find(key);
    if (it != memo_.end()) {
      if (it->second == 2) throw PrecisionUnreachable("cannot certify the order of symbolic exponents");
      return it->second;
    }
  }
  int s = 2;
  try {
    s = sign_uncached(f);
  } catch (const PrecisionUnreachable&) {
    std::lock_guard<std::mutex> lk(memo_mu_);
    memo_[key] = 2;
    throw;
  }
  std::lock_guard<std::mutex> lk(memo_mu_);
  memo_[key] = s;
  return s;
}

int Ladder::sign_uncached(const LinForm& f) const {
  int top = f.top();
  const Int& ctop = f.c.at(top);
  std::vector<LinForm> bounds;
  if (f.c0 != 0) bounds.push_back(log_bound(f.c0, -1));
  for (const auto& [j, k] : f.c) {
    if (j != top) bounds.push_back(log_bound(k, j));
  }
  if (bounds.empty()) return sgn(ctop);
  double lp = std::log2(static_cast<double>(p_));
  long slack = static_cast<long>(std::ceil(std::log2(static_cast<double>(bounds.size()) + 1.0) / lp)) + 1;
  for (const auto& b : bounds) {
    LinForm gap = combine(atoms_[top].e, b, -1);
    gap.c0 -= slack;
    if (sign(fold(gap)) <= 0) {
      throw PrecisionUnreachable("cannot certify the order of symbolic exponents");
    }
  }
  return sgn(ctop);
}

std::string Ladder::render(const LinForm& f) const {
  std::string out;
  for (auto it = f.c.rbegin(); it != f.c.rend(); ++it) {
    const Int& k = it->second;
    std::string term = std::to_string(p_) + "^(" + render(atoms_[it->first].e) + ")";
    if (!out.empty()) out += k < 0 ? " - " : " + ";
    else if (k < 0) out += "-";
    Int ak = abs(k);
    if (ak != 1) out += ak.get_str() + "*";
    out += term;
  }
  if (out.empty()) return f.c0.get_str();
  if (f.c0 > 0) out += " + " + f.c0.get_str();
  if (f.c0 < 0) out += " - " + Int(-f.c0).get_str();
  return out;
}

Exponent Exponent::atom(std::shared_ptr<const Ladder> ladder, int j) {
  LinForm f;
  f.c[j] = 1;
  return from_form(std::move(ladder), f);
}

Exponent Exponent::from_form(std::shared_ptr<const Ladder> ladder, const LinForm& f) {
  Exponent e;
  e.f_ = ladder ? ladder->fold(f) : f;
  if (!e.f_.literal()) e.ladder_ = std::move(ladder);
  if (!e.f_.literal() && !e.ladder_) throw InvalidInput("symbolic exponent without a ladder");
  return e;
}

const Int& Exponent::literal() const {
  if (!is_literal()) throw PrecisionUnreachable("exponent " + str() + " is too large to materialize");
  return f_.c0;
}

int Exponent::sign() const {
  if (is_literal()) return sgn(f_.c0);
  return ladder_->sign(f_);
}

std::string Exponent::str() const {
  if (is_literal()) return f_.c0.get_str();
  return ladder_->render(f_);
}

namespace {
std::shared_ptr<const Ladder> pick(const Exponent& a, const Exponent& b) {
  if (a.ladder() && b.ladder() && a.ladder() != b.ladder()) {
    throw InvalidInput("exponents from different ladders cannot be combined");
  }
  return a.ladder() ? a.ladder() : b.ladder();
}
}  // namespace

Exponent operator+(const Exponent& a, const Exponent& b) {
  return Exponent::from_form(pick(a, b), combine(a.f_, b.f_, +1));
}

Exponent operator-(const Exponent& a, const Exponent& b) {
  return Exponent::from_form(pick(a, b), combine(a.f_, b.f_, -1));
}

Exponent operator-(const Exponent& a) { return Exponent(0L) - a; }

Exponent operator*(const Exponent& a, const Int& k) {
  LinForm f;
  f.c0 = a.f_.c0 * k;
  for (const auto& [j, c] : a.f_.c) add_term(f, j, c * k);
  return Exponent::from_form(a.ladder_, f);
}

}  // namespace numcyc
