#include "numcyc/classify.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "numcyc/errors.hpp"

namespace numcyc {

const char* to_string(IndepStatus s) {
  switch (s) {
    case IndepStatus::Dependent: return "DEPENDENT";
    case IndepStatus::Independent: return "INDEPENDENT";
    case IndepStatus::LikelyIndependent: return "LIKELY_INDEPENDENT";
    case IndepStatus::Unknown: break;
  }
  return "UNKNOWN";
}

const char* to_string(Tri t) {
  switch (t) {
    case Tri::Yes: return "YES";
    case Tri::No: return "NO";
    case Tri::Unknown: break;
  }
  return "UNKNOWN";
}

const char* to_string(Firing f) {
  switch (f) {
    case Firing::Fired: return "fired";
    case Firing::NotFired: return "not-fired";
    case Firing::FiredWithFiniteCertificate: return "fired-with-finite-certificate";
    case Firing::Unknown: break;
  }
  return "unknown";
}

namespace {

constexpr double kEps = 0x1.0p-52;

Int round_rat(const Rat& q) {
  Int num = 2 * q.get_num() + q.get_den();
  Int den = 2 * q.get_den();
  Int r;
  mpz_fdiv_q(r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  return r;
}

Rat dot(const std::vector<Rat>& a, const std::vector<Rat>& b) {
  Rat s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void normalize_sign(std::vector<Int>& m) {
  for (const auto& v : m) {
    if (v == 0) continue;
    if (v < 0) {
      for (auto& w : m) w = -w;
    }
    return;
  }
}

Int max_abs(const std::vector<Int>& m) {
  Int r = 0;
  for (const auto& v : m) r = std::max(r, Int(abs(v)));
  return r;
}

bool declared_class(const std::string& c) { return !c.empty() && c != "numeric" && c != "mixed"; }

// The order of e^{i pi q} in the circle group.
Int rational_order(const Rat& q) {
  Rat half = mod2(q) / 2;
  half.canonicalize();
  return half.get_den();
}

// A lacunary angle with no omitted tail and literal exponents, as a rational.
std::optional<Rat> lacunary_rational(const Lacunary& l) {
  if (l.tail_coef != 0) return std::nullopt;
  Rat s = l.offset;
  for (const auto& t : l.terms) {
    if (!t.e.is_literal()) return std::nullopt;
    const Int& e = t.e.literal();
    if (e < 0 || e > 100000) return std::nullopt;
    Int pe;
    mpz_ui_pow_ui(pe.get_mpz_t(), static_cast<unsigned long>(l.p), e.get_ui());
    s += Rat(t.m, pe);
  }
  s.canonicalize();
  return s;
}

std::optional<Rat> as_rational(const Angle& a) {
  if (a.is_rational()) return a.rat();
  if (a.is_symbolic() && a.sym().coef.empty()) return a.sym().constant;
  if (a.is_lacunary()) return lacunary_rational(a.lac());
  return std::nullopt;
}

// distance of x to 2Z
double dist_2z(const Real& x) {
  Real y = x / 2.0;
  Real f = y - floor(y);
  double d = f.to_double();
  return 2 * std::min(d, 1 - d);
}

std::optional<bool> relation_holds(const std::vector<Angle>& angles, const std::vector<Int>& m) {
  try {
    Angle s;
    for (std::size_t j = 0; j < angles.size(); ++j) {
      if (m[j] != 0) s = s + angles[j] * m[j];
    }
    return angle_zero_mod2(s);
  } catch (const InvalidInput&) {
    return std::nullopt;
  }
}

// Integer kernel of the label matrix of symbolic angles, one vector per free column.
std::vector<std::vector<Int>> symbolic_kernel(const std::vector<const SymbolicAngle*>& s, int& rank) {
  std::vector<std::string> labels;
  for (const auto* a : s) {
    for (const auto& [k, v] : a->coef) {
      if (v != 0 && std::find(labels.begin(), labels.end(), k) == labels.end()) labels.push_back(k);
    }
  }
  const std::size_t k = s.size();
  std::vector<std::vector<Rat>> M(labels.size(), std::vector<Rat>(k, 0));
  for (std::size_t r = 0; r < labels.size(); ++r) {
    for (std::size_t j = 0; j < k; ++j) {
      auto it = s[j]->coef.find(labels[r]);
      if (it != s[j]->coef.end()) M[r][j] = it->second;
    }
  }
  // reduced row echelon form
  std::vector<int> pivot_col;
  std::size_t row = 0;
  for (std::size_t col = 0; col < k && row < M.size(); ++col) {
    std::size_t p = row;
    while (p < M.size() && M[p][col] == 0) ++p;
    if (p == M.size()) continue;
    std::swap(M[p], M[row]);
    Rat inv = 1 / M[row][col];
    for (auto& v : M[row]) v *= inv;
    for (std::size_t r = 0; r < M.size(); ++r) {
      if (r == row || M[r][col] == 0) continue;
      Rat f = M[r][col];
      for (std::size_t c = 0; c < k; ++c) M[r][c] -= f * M[row][c];
    }
    pivot_col.push_back(static_cast<int>(col));
    ++row;
  }
  rank = static_cast<int>(pivot_col.size());
  std::vector<std::vector<Int>> out;
  for (std::size_t f = 0; f < k; ++f) {
    if (std::find(pivot_col.begin(), pivot_col.end(), static_cast<int>(f)) != pivot_col.end()) continue;
    std::vector<Rat> v(k, 0);
    v[f] = 1;
    for (std::size_t r = 0; r < pivot_col.size(); ++r) v[static_cast<std::size_t>(pivot_col[r])] = -M[r][f];
    Int l = 1;
    for (const auto& x : v) l = lcm(l, Int(x.get_den()));
    std::vector<Int> iv;
    Int g = 0;
    for (const auto& x : v) {
      Rat y = x * l;
      iv.push_back(y.get_num());
      g = gcd(g, Int(y.get_num()));
    }
    if (g > 1) {
      for (auto& x : iv) x /= g;
    }
    out.push_back(iv);
  }
  return out;
}

struct SearchOutcome {
  std::optional<std::vector<Int>> candidate;  // (m_0, m_1, .., m_k)
  long h_excluded = 0;                         // no relation of height <= this
};

SearchOutcome relation_search(const std::vector<Real>& x, double err, long H, long P) {
  const std::size_t d = x.size();
  Real S = Real::pow_int(2, Int(P), P + 64);
  std::vector<std::vector<Int>> B(d, std::vector<Int>(d + 1, 0));
  for (std::size_t i = 0; i < d; ++i) {
    B[i][i] = 1;
    B[i][d] = round_rat((x[i] * S).to_rat());
  }
  B = lll_reduce(B);
  SearchOutcome out;
  for (const auto& row : B) {
    std::vector<Int> m(row.begin(), row.begin() + static_cast<long>(d));
    Int h = max_abs(m);
    if (h == 0 || h > H) continue;
    Real r(x[0].prec());
    double l1 = 0;
    for (std::size_t i = 0; i < d; ++i) {
      r += x[i] * Real::from_int(m[i], x[0].prec());
      l1 += std::fabs(m[i].get_d());
    }
    if (std::fabs(r.to_double()) <= l1 * err * 4 + std::ldexp(l1, -static_cast<int>(P) + 2)) {
      out.candidate = m;
      break;
    }
  }
  // shortest Gram-Schmidt vector bounds every lattice vector from below
  std::vector<std::vector<Rat>> bs;
  double mu = std::numeric_limits<double>::infinity();
  for (const auto& row : B) {
    std::vector<Rat> v(row.begin(), row.end());
    for (const auto& b : bs) {
      Rat c = dot(v, b) / dot(b, b);
      for (std::size_t t = 0; t < v.size(); ++t) v[t] -= c * b[t];
    }
    mu = std::min(mu, std::sqrt(dot(v, v).get_d()));
    bs.push_back(v);
  }
  double se = 0.5 + std::ldexp(err, static_cast<int>(P));
  double dd = static_cast<double>(d);
  double hx = mu / std::sqrt(dd + dd * dd * se * se) * (1 - 1e-9);
  out.h_excluded = hx >= static_cast<double>(H) ? H : static_cast<long>(std::floor(hx));
  return out;
}

}  // namespace

std::vector<std::vector<Int>> lll_reduce(std::vector<std::vector<Int>> b) {
  const std::size_t n = b.size();
  if (n <= 1) return b;
  const Rat delta(3, 4);
  std::vector<std::vector<Rat>> bs(n);
  std::vector<std::vector<Rat>> mu(n, std::vector<Rat>(n, 0));
  std::vector<Rat> Bn(n);
  auto gs_from = [&](std::size_t from) {
    for (std::size_t i = from; i < n; ++i) {
      bs[i].assign(b[i].begin(), b[i].end());
      for (std::size_t j = 0; j < i; ++j) {
        Rat num = 0;
        for (std::size_t t = 0; t < b[i].size(); ++t) num += Rat(b[i][t]) * bs[j][t];
        mu[i][j] = Bn[j] == 0 ? Rat(0) : Rat(num / Bn[j]);
        for (std::size_t t = 0; t < bs[i].size(); ++t) bs[i][t] -= mu[i][j] * bs[j][t];
      }
      Bn[i] = dot(bs[i], bs[i]);
    }
  };
  gs_from(0);
  std::size_t k = 1;
  while (k < n) {
    for (std::size_t jj = k; jj-- > 0;) {
      Int q = round_rat(mu[k][jj]);
      if (q == 0) continue;
      for (std::size_t t = 0; t < b[k].size(); ++t) b[k][t] -= q * b[jj][t];
      for (std::size_t i = 0; i < jj; ++i) mu[k][i] -= q * mu[jj][i];
      mu[k][jj] -= q;
    }
    if (Bn[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * Bn[k - 1]) {
      ++k;
    } else {
      std::swap(b[k], b[k - 1]);
      gs_from(k - 1);
      k = std::max<std::size_t>(k - 1, 1);
    }
  }
  return b;
}

std::optional<bool> angle_zero_mod2(const Angle& theta) {
  if (auto q = as_rational(theta)) return mod2(*q) == 0;
  if (theta.is_symbolic()) {
    const SymbolicAngle& s = theta.sym();
    bool any = false;
    for (const auto& [k, v] : s.coef) any = any || v != 0;
    if (!any) return mod2(s.constant) == 0;
    // 1 and the labels of a declared class are independent over Q
    if (declared_class(s.indep_class)) return false;
  }
  double err = 0;
  Real v = theta.value(192, &err);
  if (dist_2z(v) > 4 * err + 1e-40) return false;
  return std::nullopt;
}

IndependenceVerdict independence(const std::vector<Angle>& angles, long H) {
  if (angles.empty()) throw InvalidInput("independence needs at least one angle");
  if (H < 1) throw InvalidInput("relation height must be positive");
  const std::size_t k = angles.size();
  IndependenceVerdict out;

  // torsion: a rational angle has finite order
  for (std::size_t j = 0; j < k; ++j) {
    if (auto q = as_rational(angles[j])) {
      out.status = IndepStatus::Dependent;
      out.relation.assign(k, 0);
      out.relation[j] = rational_order(*q);
      out.reason = "angle " + std::to_string(j + 1) + " is rational, order " + out.relation[j].get_str();
      return out;
    }
    if (angles[j].is_lacunary() && angles[j].lac().tail_coef == 0) {
      out.status = IndepStatus::Dependent;
      out.reason = "angle " + std::to_string(j + 1) + " is a finite lacunary sum (rational, order too large to write)";
      return out;
    }
  }

  bool all_sym = std::all_of(angles.begin(), angles.end(), [](const Angle& a) { return a.is_symbolic(); });
  if (all_sym) {
    std::vector<const SymbolicAngle*> s;
    for (const auto& a : angles) s.push_back(&a.sym());
    int rank = 0;
    std::vector<std::vector<Int>> ker = symbolic_kernel(s, rank);
    if (!ker.empty()) {
      if (ker.size() > 1) ker = lll_reduce(ker);
      std::vector<Int> best;
      for (auto v : ker) {
        Rat c = 0;
        for (std::size_t j = 0; j < k; ++j) c += v[j] * s[j]->constant;
        Rat half = c / 2;
        half.canonicalize();
        Int t = half.get_den();
        for (auto& x : v) x *= t;
        normalize_sign(v);
        if (best.empty() || max_abs(v) < max_abs(best)) best = v;
      }
      if (relation_holds(angles, best) != true) throw ConvergenceFailure("symbolic relation failed to verify");
      out.status = IndepStatus::Dependent;
      out.relation = best;
      out.reason = "label coefficients are linearly dependent";
      return out;
    }
    const std::string& cls = s[0]->indep_class;
    bool one_class = std::all_of(s.begin(), s.end(), [&](const SymbolicAngle* a) { return a->indep_class == cls; });
    if (one_class && declared_class(cls)) {
      out.status = IndepStatus::Independent;
      out.reason = "declared class " + cls + ": 1 and the labels are independent over Q, coefficient matrix of rank " +
                   std::to_string(rank);
      return out;
    }
  }

  // integer relation search on (1, theta_1, .., theta_k)
  const long d = static_cast<long>(k) + 1;
  long P = 4 * d * static_cast<long>(std::ceil(std::log2(static_cast<double>(H) + 1))) + 32;
  std::vector<Real> x;
  double err = 0;
  x.push_back(Real::from_int(1, P + 64));
  for (const auto& a : angles) {
    double e = 0;
    x.push_back(a.value(P + 64, &e).with_prec(P + 64));
    err = std::max(err, e);
  }
  if (err > 0) P = std::min(P, static_cast<long>(std::floor(-std::log2(err))));
  if (P < 16) {
    out.status = IndepStatus::Unknown;
    out.reason = "angles known too coarsely for a relation search";
    return out;
  }
  SearchOutcome so = relation_search(x, err, H, P);
  if (so.candidate) {
    std::vector<Int> m(so.candidate->begin() + 1, so.candidate->end());
    if ((*so.candidate)[0] % 2 != 0) {
      for (auto& v : m) v *= 2;
    }
    normalize_sign(m);
    out.relation = m;
    if (relation_holds(angles, m) == true) {
      out.status = IndepStatus::Dependent;
      out.reason = "relation found by lattice reduction, verified exactly";
    } else {
      out.status = IndepStatus::Unknown;
      out.reason = "near relation found by lattice reduction, not verifiable exactly";
    }
    return out;
  }
  if (so.h_excluded < 1) {
    out.status = IndepStatus::Unknown;
    out.reason = "lattice bound excludes no relation";
    return out;
  }
  out.status = IndepStatus::LikelyIndependent;
  out.H = so.h_excluded;
  out.reason = "no integer relation of height <= " + std::to_string(so.h_excluded) + " (" + std::to_string(P) +
               "-bit lattice)";
  return out;
}

// ---------------------------------------------------------------- spectra

ModCmp SpectralData::cmp_moduli(int i, int j) const {
  const SpectralPoint& a = points[static_cast<std::size_t>(i)];
  const SpectralPoint& b = points[static_cast<std::size_t>(j)];
  if (a.radius2 && b.radius2) {
    if (*a.radius2 == *b.radius2) return ModCmp::Equal;
    double d = std::sqrt(a.radius2->get_d()) - std::sqrt(b.radius2->get_d());
    if (std::fabs(d) <= tie) return ModCmp::Unknown;
    return d < 0 ? ModCmp::Less : ModCmp::Greater;
  }
  double d = a.radius - b.radius;
  if (std::fabs(d) <= tie + a.radius_err + b.radius_err) return ModCmp::Unknown;
  return d < 0 ? ModCmp::Less : ModCmp::Greater;
}

ModCmp SpectralData::cmp_one(int i) const {
  const SpectralPoint& a = points[static_cast<std::size_t>(i)];
  if (a.radius2) {
    if (*a.radius2 == 1) return ModCmp::Equal;
    double d = std::sqrt(a.radius2->get_d()) - 1;
    if (std::fabs(d) <= tie) return ModCmp::Unknown;
    return d < 0 ? ModCmp::Less : ModCmp::Greater;
  }
  double d = a.radius - 1;
  if (std::fabs(d) <= tie + a.radius_err) return ModCmp::Unknown;
  return d < 0 ? ModCmp::Less : ModCmp::Greater;
}

std::optional<bool> SpectralData::non_orthogonal(int i, int j) const {
  for (const auto& g : gram) {
    if ((g.i == i && g.j == j) || (g.i == j && g.j == i)) {
      if (g.exact) return g.cos != 0;
      if (g.cos > g.err) return true;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

namespace {

using MatC = Eigen::MatrixXcd;

MatC to_eigen(const DenseMatrix& D) {
  MatC A(D.n, D.n);
  for (int i = 0; i < D.n; ++i) {
    for (int j = 0; j < D.n; ++j) A(i, j) = D.at(i, j);
  }
  return A;
}

bool off_diagonal_zero(const DenseMatrix& D) {
  for (int i = 0; i < D.n; ++i) {
    for (int j = 0; j < D.n; ++j) {
      if (i == j) continue;
      if (D.exact) {
        if ((*D.exact)[static_cast<std::size_t>(i * D.n + j)].radius != 0) return false;
      } else if (D.at(i, j) != cplx(0.0)) {
        return false;
      }
    }
  }
  return true;
}

// arg(z) / pi for a double z, exact on the axes and diagonals.
Angle double_angle(cplx z, const std::string& label, bool& exact) {
  double x = z.real(), y = z.imag();
  exact = true;
  if (y == 0) return Angle(Rat(x < 0 ? 1 : 0));
  if (x == 0) return Angle(Rat(y > 0 ? 1 : 3, 2));
  if (std::fabs(x) == std::fabs(y)) {
    int q = x > 0 ? (y > 0 ? 1 : 7) : (y > 0 ? 3 : 5);
    return Angle(Rat(q, 4));
  }
  // arg of the exact double point, as a decimal label
  Real a = atan2(Real(y, 256), Real(x, 256)) / Real::pi(256);
  exact = false;
  return Angle(SymbolicAngle::parse(label, "numeric", a.str(60)));
}

std::optional<bool> entries_equal(const ExactEntry& a, const ExactEntry& b) {
  if (a.radius != b.radius) return false;
  if (a.radius == 0) return true;
  try {
    return angle_zero_mod2(a.angle - b.angle);
  } catch (const InvalidInput&) {
    double ea = 0, eb = 0;
    Real d = a.angle.value(128, &ea) - b.angle.value(128, &eb);
    if (dist_2z(d) > 4 * (ea + eb) + 1e-30) return false;
    return std::nullopt;
  }
}

// Rank-revealing SVD of T - lambda I: nullity when the gap is clear.
struct NullInfo {
  std::optional<int> nullity;
  Eigen::MatrixXcd basis;  // orthonormal columns
  double gap = 0;          // smallest singular value kept as nonzero
  double thr = 0;
};

NullInfo null_space(const MatC& A, cplx lambda, double shadow) {
  const int n = static_cast<int>(A.rows());
  MatC M = A - lambda * MatC::Identity(n, n);
  Eigen::JacobiSVD<MatC> svd(M, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  double scale = A.norm() + std::abs(lambda);
  NullInfo out;
  out.thr = 64 * n * kEps * scale + shadow;
  int cnt = 0;
  for (int i = 0; i < n; ++i) {
    if (s(i) <= out.thr) ++cnt;
  }
  out.gap = cnt < n ? s(n - cnt - 1) : 0;
  if (cnt >= 1 && (cnt == n || out.gap > 1e3 * out.thr)) {
    out.nullity = cnt;
    out.basis = svd.matrixV().rightCols(cnt);
  }
  return out;
}

void fill_dense_extras(SpectralData& sd, const DenseMatrix& D, const MatC& A, double shadow) {
  const int n = D.n;
  if (off_diagonal_zero(D)) {
    sd.normal = true;
  } else {
    MatC C = A.adjoint() * A - A * A.adjoint();
    double gamma = 8 * n * kEps * A.squaredNorm() + 4 * A.norm() * shadow;
    if (C.norm() > 10 * gamma) sd.normal = false;
  }
  const int P = static_cast<int>(sd.points.size());
  std::vector<NullInfo> ns;
  for (int i = 0; i < P; ++i) ns.push_back(null_space(A, sd.points[static_cast<std::size_t>(i)].value, shadow));
  for (int i = 0; i < P; ++i) {
    SpectralPoint& p = sd.points[static_cast<std::size_t>(i)];
    if (!p.separated) {
      p.defective.reset();
      continue;
    }
    if (p.multiplicity == 1) {
      p.geometric = 1;
      p.defective = false;
    } else if (sd.normal == true) {
      p.geometric = p.multiplicity;
      p.defective = false;
    } else if (ns[static_cast<std::size_t>(i)].nullity) {
      p.geometric = *ns[static_cast<std::size_t>(i)].nullity;
      p.defective = *p.geometric < p.multiplicity;
    }
  }
  for (int i = 0; i < P; ++i) {
    for (int j = i + 1; j < P; ++j) {
      GramEntry g;
      g.i = i;
      g.j = j;
      if (off_diagonal_zero(D)) {
        g.exact = true;
        g.cos = 0;
        sd.gram.push_back(g);
        continue;
      }
      const NullInfo& a = ns[static_cast<std::size_t>(i)];
      const NullInfo& b = ns[static_cast<std::size_t>(j)];
      if (!a.nullity || !b.nullity || a.gap <= 0 || b.gap <= 0) continue;
      MatC G = a.basis.adjoint() * b.basis;
      Eigen::JacobiSVD<MatC> svd(G);
      g.cos = svd.singularValues()(0);
      double pert = 16 * n * kEps * (A.norm() + 1) + shadow;
      g.err = 4 * (pert / a.gap + pert / b.gap) + 1e-14;
      sd.gram.push_back(g);
    }
  }
}

// Points from exact diagonal entries (of a diagonal or a triangular matrix).
void group_exact(SpectralData& sd, const std::vector<ExactEntry>& diag) {
  const std::size_t n = diag.size();
  std::vector<int> rep(n, -1);
  std::vector<bool> unsure(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (rep[i] >= 0) continue;
    rep[i] = static_cast<int>(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rep[j] >= 0) continue;
      std::optional<bool> eq = entries_equal(diag[i], diag[j]);
      if (eq == true) {
        rep[j] = static_cast<int>(i);
      } else if (!eq) {
        unsure[i] = unsure[j] = true;
      }
    }
  }
  std::map<int, std::size_t> at;
  for (std::size_t i = 0; i < n; ++i) {
    if (rep[i] != static_cast<int>(i)) {
      sd.points[at[rep[i]]].multiplicity += 1;
      if (unsure[i]) sd.points[at[rep[i]]].separated = false;
      continue;
    }
    SpectralPoint p;
    p.value = diag[i].approx();
    p.radius2 = diag[i].radius * diag[i].radius;
    p.radius = diag[i].radius.get_d();
    p.angle = diag[i].radius == 0 ? Angle() : diag[i].angle;
    p.angle_exact = true;
    p.separated = !unsure[i];
    at[static_cast<int>(i)] = sd.points.size();
    sd.points.push_back(p);
  }
}

}  // namespace

SpectralData spectral_data(const OperatorSpec& T, const ClassifyConfig& cfg) {
  validate(T);
  SpectralData sd;
  sd.tie = cfg.tie;
  if (std::holds_alternative<WeightedShift>(T)) throw InvalidInput("spectral data needs a finite-dimensional operator");
  if (const auto* E = std::get_if<ExactDiagonal>(&T)) {
    sd.dim = static_cast<int>(E->entries.size());
    sd.source = "diagonal";
    group_exact(sd, E->entries);
    for (auto& p : sd.points) {
      p.geometric = p.multiplicity;
      p.defective = false;
    }
    sd.normal = true;
    for (int i = 0; i < static_cast<int>(sd.points.size()); ++i) {
      for (int j = i + 1; j < static_cast<int>(sd.points.size()); ++j) sd.gram.push_back({i, j, 0.0, 0.0, true});
    }
    return sd;
  }
  const DenseMatrix& D = std::get<DenseMatrix>(T);
  sd.dim = D.n;
  MatC A = to_eigen(D);
  const double shadow = D.exact ? 2 * kEps * A.norm() : 0.0;
  if (D.upper_triangular()) {
    sd.source = "triangular";
    if (D.exact) {
      std::vector<ExactEntry> diag;
      for (int i = 0; i < D.n; ++i) diag.push_back((*D.exact)[static_cast<std::size_t>(i * D.n + i)]);
      group_exact(sd, diag);
    } else {
      for (int i = 0; i < D.n; ++i) {
        cplx z = D.at(i, i);
        auto it = std::find_if(sd.points.begin(), sd.points.end(), [&](const SpectralPoint& p) { return p.value == z; });
        if (it != sd.points.end()) {
          it->multiplicity += 1;
          continue;
        }
        SpectralPoint p;
        p.value = z;
        p.radius2 = Rat(z.real()) * Rat(z.real()) + Rat(z.imag()) * Rat(z.imag());
        p.radius = std::abs(z);
        bool ex = false;
        p.angle = double_angle(z, "arg" + std::to_string(i), ex);
        p.angle_exact = ex;
        sd.points.push_back(p);
      }
    }
    if (D.exact) {
      // the shadow's diagonal is exact, the double copy is what the SVD sees
      for (auto& p : sd.points) p.err = shadow;
    }
    fill_dense_extras(sd, D, A, shadow);
    return sd;
  }

  sd.source = "eigensolve";
  Eigen::ComplexEigenSolver<MatC> es(A);
  if (es.info() != Eigen::Success) throw EigensolveFailure("eigensolver did not converge");
  const MatC& V = es.eigenvectors();
  const auto& lam = es.eigenvalues();
  double nt = std::max(A.norm(), 1e-300);
  Eigen::JacobiSVD<MatC> vs(V);
  double smin = vs.singularValues()(D.n - 1);
  double kappa = smin > 0 ? vs.singularValues()(0) / smin : std::numeric_limits<double>::infinity();
  std::vector<double> errs;
  for (int j = 0; j < D.n; ++j) {
    double r = (A * V.col(j) - lam(j) * V.col(j)).norm() / V.col(j).norm();
    if (!(r <= cfg.eig_tol * nt)) throw EigensolveFailure("eigen residual above tolerance");
    sd.residual = std::max(sd.residual, r);
    errs.push_back(kappa * (r + D.n * kEps * nt + shadow));
  }
  // clusters of overlapping error disks
  std::vector<int> comp(static_cast<std::size_t>(D.n));
  std::iota(comp.begin(), comp.end(), 0);
  std::function<int(int)> find = [&](int a) { return comp[static_cast<std::size_t>(a)] == a ? a : comp[static_cast<std::size_t>(a)] = find(comp[static_cast<std::size_t>(a)]); };
  for (int i = 0; i < D.n; ++i) {
    for (int j = i + 1; j < D.n; ++j) {
      if (std::abs(lam(i) - lam(j)) <= errs[static_cast<std::size_t>(i)] + errs[static_cast<std::size_t>(j)]) comp[static_cast<std::size_t>(find(i))] = find(j);
    }
  }
  std::map<int, std::size_t> at;
  for (int i = 0; i < D.n; ++i) {
    int r = find(i);
    if (at.count(r)) {
      SpectralPoint& p = sd.points[at[r]];
      p.multiplicity += 1;
      p.separated = false;
      p.err = std::max(p.err, errs[static_cast<std::size_t>(i)]);
      p.radius_err = p.err;
      continue;
    }
    SpectralPoint p;
    p.value = lam(i);
    p.err = errs[static_cast<std::size_t>(i)];
    p.radius = std::abs(lam(i));
    p.radius_err = p.err;
    bool ex = false;
    p.angle = double_angle(lam(i), "eig" + std::to_string(i), ex);
    p.angle_exact = false;  // the computed eigenvalue is only near the true one
    at[r] = sd.points.size();
    sd.points.push_back(p);
  }
  fill_dense_extras(sd, D, A, shadow);
  for (auto& p : sd.points) {
    if (p.multiplicity > 1) p.defective.reset();
  }
  return sd;
}

// ---------------------------------------------------------------- rules

namespace {

Tri tri_and(std::initializer_list<Tri> xs) {
  bool unknown = false;
  for (Tri t : xs) {
    if (t == Tri::No) return Tri::No;
    if (t == Tri::Unknown) unknown = true;
  }
  return unknown ? Tri::Unknown : Tri::Yes;
}

Tri from_opt(const std::optional<bool>& b) {
  if (!b) return Tri::Unknown;
  return *b ? Tri::Yes : Tri::No;
}

Tri is_eq(ModCmp c) { return c == ModCmp::Equal ? Tri::Yes : (c == ModCmp::Unknown ? Tri::Unknown : Tri::No); }
Tri is_gt(ModCmp c) { return c == ModCmp::Greater ? Tri::Yes : (c == ModCmp::Unknown ? Tri::Unknown : Tri::No); }
Tri is_ge(ModCmp c) { return c == ModCmp::Unknown ? Tri::Unknown : (c == ModCmp::Less ? Tri::No : Tri::Yes); }

std::string fmt(double x) {
  std::ostringstream o;
  o.precision(6);
  o << x;
  return o.str();
}

// Shared state for one classification: cached independence calls.
struct Ctx {
  const SpectralData& sd;
  const ClassifyConfig& cfg;
  std::map<std::vector<int>, IndependenceVerdict> ind_cache;
  std::map<std::pair<int, int>, IndependenceVerdict> ord_cache;

  const SpectralPoint& pt(int i) const { return sd.points[static_cast<std::size_t>(i)]; }

  // lambda_i / |lambda_i|, .. independent in T
  Tri indep(std::vector<int> idx, std::string* why = nullptr) {
    auto it = ind_cache.find(idx);
    if (it == ind_cache.end()) {
      std::vector<Angle> a;
      for (int i : idx) a.push_back(pt(i).angle);
      IndependenceVerdict v;
      try {
        v = independence(a, cfg.H);
      } catch (const InvalidInput& e) {
        v.status = IndepStatus::Unknown;
        v.reason = e.what();
      }
      it = ind_cache.emplace(idx, v).first;
    }
    const IndependenceVerdict& v = it->second;
    if (why) *why = std::string(to_string(v.status)) + " (" + v.reason + ")";
    if (v.status == IndepStatus::Dependent) return Tri::No;
    bool exact = std::all_of(idx.begin(), idx.end(), [&](int i) { return pt(i).angle_exact; });
    if (v.status == IndepStatus::Independent && exact) return Tri::Yes;
    return Tri::Unknown;
  }

  // lambda_i / lambda_j has infinite order
  Tri infinite_order(int i, int j) {
    auto key = std::make_pair(i, j);
    auto it = ord_cache.find(key);
    if (it == ord_cache.end()) {
      IndependenceVerdict v;
      try {
        v = independence({pt(i).angle - pt(j).angle}, cfg.H);
      } catch (const InvalidInput& e) {
        v.status = IndepStatus::Unknown;
        v.reason = e.what();
      }
      it = ord_cache.emplace(key, v).first;
    }
    const IndependenceVerdict& v = it->second;
    if (v.status == IndepStatus::Dependent) return Tri::No;
    if (v.status == IndepStatus::Independent && pt(i).angle_exact && pt(j).angle_exact) return Tri::Yes;
    return Tri::Unknown;
  }

  Tri sep(std::initializer_list<int> idx) const {
    for (int i : idx) {
      if (!pt(i).separated) return Tri::Unknown;
    }
    return Tri::Yes;
  }

  std::string name(int i) const {
    const SpectralPoint& p = pt(i);
    return "l" + std::to_string(i + 1) + "=" + fmt(p.radius) + "e^{i pi (" + p.angle.describe() + ")}";
  }
};

// Folds per-tuple outcomes into a rule status.
struct Acc {
  RuleResult r;
  bool unknown = false;
  void add(Tri t, const std::string& cert) {
    if (r.status == Firing::Fired) return;
    if (t == Tri::Yes) {
      r.status = Firing::Fired;
      r.certificate = cert;
    } else if (t == Tri::Unknown) {
      unknown = true;
      if (r.certificate.empty()) r.certificate = "undecided: " + cert;
    }
  }
  RuleResult done() {
    if (r.status != Firing::Fired && unknown) r.status = Firing::Unknown;
    if (r.status == Firing::NotFired && r.certificate.empty()) r.certificate = "no eigenvalue tuple qualifies";
    return r;
  }
};

Acc make_acc(const std::string& rule, const std::string& concl) {
  Acc a;
  a.r.rule = rule;
  a.r.conclusion = concl;
  return a;
}

// Power bounded: every |l| < 1, or |l| = 1 with l semisimple.
Tri power_bounded(const SpectralData& sd, std::string* why) {
  bool unknown = false;
  for (int i = 0; i < static_cast<int>(sd.points.size()); ++i) {
    ModCmp c = sd.cmp_one(i);
    const SpectralPoint& p = sd.points[static_cast<std::size_t>(i)];
    if (c == ModCmp::Greater) {
      *why = "|l" + std::to_string(i + 1) + "| > 1";
      return Tri::No;
    }
    if (c == ModCmp::Equal) {
      if (p.defective == true) {
        *why = "unimodular l" + std::to_string(i + 1) + " has a Jordan block";
        return Tri::No;
      }
      if (!p.defective || !p.separated) unknown = true;
    }
    if (c == ModCmp::Unknown) unknown = true;
  }
  if (unknown) {
    *why = "moduli or Jordan structure undecided";
    return Tri::Unknown;
  }
  *why = "all |l| <= 1, unimodular eigenvalues semisimple";
  return Tri::Yes;
}

bool witness_matches(const SpectralData& sd, const SteeringResult& w) {
  ExactDiagonal D = w.diagonal();
  int hit = 0;
  for (const auto& e : D.entries) {
    for (const auto& p : sd.points) {
      if (p.radius2 && *p.radius2 == e.radius * e.radius && p.angle.describe() == e.angle.describe()) {
        ++hit;
        break;
      }
    }
  }
  return hit == static_cast<int>(D.entries.size());
}

std::vector<RuleResult> rules_impl(Ctx& c, const SteeringResult* witness) {
  const SpectralData& sd = c.sd;
  const int P = static_cast<int>(sd.points.size());
  std::vector<RuleResult> out;

  {  // equal moduli > 1, independent
    Acc a = make_acc("suffwnh.1", "WNH");
    for (int i = 0; i < P; ++i) {
      for (int j = i + 1; j < P; ++j) {
        Tri t = tri_and({is_eq(sd.cmp_moduli(i, j)), is_gt(sd.cmp_one(i))});
        std::string why;
        if (t != Tri::No) t = tri_and({t, c.indep({i, j}, &why), c.sep({i, j})});
        a.add(t, c.name(i) + ", " + c.name(j) + ": equal moduli > 1, angles " + why);
      }
    }
    out.push_back(a.done());
  }
  {  // two independent unimodular eigenvalues with Jordan blocks
    Acc a = make_acc("suffwnh.2", "WNH");
    for (int i = 0; i < P; ++i) {
      for (int j = i + 1; j < P; ++j) {
        Tri t = tri_and({is_eq(sd.cmp_one(i)), is_eq(sd.cmp_one(j)), from_opt(c.pt(i).defective),
                         from_opt(c.pt(j).defective)});
        std::string why;
        if (t != Tri::No) t = tri_and({t, c.indep({i, j}, &why)});
        a.add(t, c.name(i) + ", " + c.name(j) + ": unimodular, defective, " + why);
      }
    }
    out.push_back(a.done());
  }
  {  // |l1| = |l2| > |l3| > 1, l1/l2 infinite order, l1 and l3 independent
    Acc a = make_acc("suffwnh.3", "WNH");
    for (int i = 0; i < P; ++i) {
      for (int j = i + 1; j < P; ++j) {
        for (int l = 0; l < P; ++l) {
          if (l == i || l == j) continue;
          Tri t = tri_and({is_eq(sd.cmp_moduli(i, j)), is_gt(sd.cmp_moduli(i, l)), is_gt(sd.cmp_one(l))});
          std::string why;
          if (t != Tri::No) t = tri_and({t, c.infinite_order(i, j), c.indep({i, l}, &why), c.sep({i, j, l})});
          a.add(t, c.name(i) + ", " + c.name(j) + ", " + c.name(l) + ": " + why);
        }
      }
    }
    out.push_back(a.done());
  }
  {  // |l1| = |l2| > 1, l3 unimodular defective, l1/l2 infinite order, l1 and l3 independent
    Acc a = make_acc("suffwnh.4", "WNH");
    for (int i = 0; i < P; ++i) {
      for (int j = i + 1; j < P; ++j) {
        for (int l = 0; l < P; ++l) {
          if (l == i || l == j) continue;
          Tri t = tri_and({is_eq(sd.cmp_moduli(i, j)), is_gt(sd.cmp_one(i)), is_eq(sd.cmp_one(l)),
                           from_opt(c.pt(l).defective)});
          std::string why;
          if (t != Tri::No) t = tri_and({t, c.infinite_order(i, j), c.indep({i, l}, &why), c.sep({i, j, l})});
          a.add(t, c.name(i) + ", " + c.name(j) + ", " + c.name(l) + ": " + why);
        }
      }
    }
    out.push_back(a.done());
  }
  {
    RuleResult r;
    r.rule = "suffsnh.1";
    r.conclusion = "SNH";
    if (witness && witness_matches(sd, *witness)) {
      r.status = Firing::FiredWithFiniteCertificate;
      std::ostringstream o;
      o << "steering certificate with " << witness->hits.size() << " replayed targets, R=" << witness->R;
      r.certificate = o.str();
    } else {
      r.status = Firing::NotFired;
      r.certificate = witness ? "witness does not match the spectrum" : "no witness supplied";
    }
    out.push_back(r);
  }
  {  // three equal moduli > 1, independent
    Acc a = make_acc("suffsnh.2", "SNH");
    for (int i = 0; i < P; ++i) {
      for (int j = i + 1; j < P; ++j) {
        for (int l = j + 1; l < P; ++l) {
          Tri t = tri_and({is_eq(sd.cmp_moduli(i, j)), is_eq(sd.cmp_moduli(i, l)), is_gt(sd.cmp_one(i))});
          std::string why;
          if (t != Tri::No) t = tri_and({t, c.indep({i, j, l}, &why), c.sep({i, j, l})});
          a.add(t, c.name(i) + ", " + c.name(j) + ", " + c.name(l) + ": equal moduli > 1, angles " + why);
        }
      }
    }
    out.push_back(a.done());
  }
  {  // Hilbert space: non-orthogonal eigenspaces
    Acc a = make_acc("suffnh", "NH");
    for (int i = 0; i < P; ++i) {
      for (int j = i + 1; j < P; ++j) {
        Tri t = tri_and({is_eq(sd.cmp_moduli(i, j)), is_gt(sd.cmp_one(i)), from_opt(sd.non_orthogonal(i, j))});
        std::string why;
        if (t != Tri::No) t = tri_and({t, c.indep({i, j}, &why), c.sep({i, j})});
        a.add(t, c.name(i) + ", " + c.name(j) + ": equal moduli > 1, non-orthogonal eigenspaces, angles " + why);
      }
    }
    out.push_back(a.done());
  }
  {  // Hilbert space: Jordan blocks at equal moduli >= 1
    Acc a = make_acc("suffnh1", "NH");
    for (int i = 0; i < P; ++i) {
      for (int j = i + 1; j < P; ++j) {
        Tri t = tri_and({from_opt(c.pt(i).defective), from_opt(c.pt(j).defective), is_eq(sd.cmp_moduli(i, j)),
                         is_ge(sd.cmp_one(i))});
        std::string why;
        if (t != Tri::No) t = tri_and({t, c.indep({i, j}, &why)});
        a.add(t, c.name(i) + ", " + c.name(j) + ": defective, equal moduli >= 1, angles " + why);
      }
    }
    out.push_back(a.done());
  }
  for (const char* r : {"suffsnhid.1", "suffsnhid.2", "normaLLL.1", "normaLLL.2"}) {
    RuleResult x;
    x.rule = r;
    x.conclusion = std::string(r).rfind("suffsnhid", 0) == 0 ? "SNH" : (std::string(r) == "normaLLL.1" ? "WNH" : "NH");
    x.status = Firing::NotFired;
    x.certificate = "finite spectrum: needs an infinite eigenvalue sequence";
    out.push_back(x);
  }

  // necessary conditions
  {
    RuleResult r;
    r.rule = "ele.1";
    r.conclusion = "not-WNH";
    std::string why;
    Tri pb = power_bounded(sd, &why);
    r.status = pb == Tri::Yes ? Firing::Fired : (pb == Tri::No ? Firing::NotFired : Firing::Unknown);
    r.certificate = "power bounded: " + why;
    if (pb == Tri::No) r.certificate = "not power bounded: " + why;
    out.push_back(r);
  }
  {  // split off the power bounded part; the rest must have distinct moduli
    RuleResult r;
    r.rule = "abcde";
    r.conclusion = "not-WNH";
    std::vector<int> Z;
    bool unknown = false;
    for (int i = 0; i < P; ++i) {
      ModCmp o = sd.cmp_one(i);
      const SpectralPoint& p = c.pt(i);
      if (o == ModCmp::Greater) {
        Z.push_back(i);
      } else if (o == ModCmp::Equal) {
        if (p.defective == true) {
          Z.push_back(i);
        } else if (!p.defective) {
          unknown = true;
        }
      } else if (o == ModCmp::Unknown) {
        unknown = true;
      }
      if (!p.separated) unknown = true;
    }
    bool clash = false, tie = false;
    for (std::size_t a = 0; a < Z.size(); ++a) {
      for (std::size_t b = a + 1; b < Z.size(); ++b) {
        ModCmp m = sd.cmp_moduli(Z[a], Z[b]);
        if (m == ModCmp::Equal) clash = true;
        if (m == ModCmp::Unknown) tie = true;
      }
    }
    if (clash) {
      r.status = Firing::NotFired;
      r.certificate = "two eigenvalues outside the power bounded part share a modulus";
    } else if (unknown || tie) {
      r.status = Firing::Unknown;
      r.certificate = "moduli or Jordan structure undecided";
    } else {
      r.status = Firing::Fired;
      r.certificate = std::to_string(Z.size()) + " eigenvalues outside the power bounded part, pairwise distinct moduli";
    }
    out.push_back(r);
  }
  {  // T^k self-adjoint in finite dimension: the set of moduli > 1 is finite, hence well ordered
    RuleResult r;
    r.rule = "normaLLL.3";
    r.conclusion = "not-WNH";
    bool rational = true;
    for (int i = 0; i < P; ++i) {
      if (!c.pt(i).angle_exact || !as_rational(c.pt(i).angle)) rational = false;
    }
    if (sd.normal == true && rational) {
      r.status = Firing::Fired;
      r.certificate = "normal with rational eigen angles, so some power is self-adjoint; finite spectrum";
    } else {
      r.status = sd.normal.has_value() || !rational ? Firing::NotFired : Firing::Unknown;
      r.certificate = "no power of T is certified self-adjoint";
    }
    out.push_back(r);
  }
  return out;
}

Verdict closure_from(const SpectralData& sd) {
  Verdict v;
  v.rule = "clos.4";
  const int P = static_cast<int>(sd.points.size());
  std::vector<int> big;
  bool unknown = false;
  for (int i = 0; i < P; ++i) {
    ModCmp o = sd.cmp_one(i);
    if (o == ModCmp::Unknown) {
      unknown = true;
      continue;
    }
    if (o == ModCmp::Less) continue;
    const SpectralPoint& p = sd.points[static_cast<std::size_t>(i)];
    if (p.multiplicity >= 2 && p.separated) {
      v.value = Tri::Yes;
      v.detail = "eigenvalue of modulus >= 1 with multiplicity " + std::to_string(p.multiplicity);
      return v;
    }
    if (!p.separated) unknown = true;
    big.push_back(i);
  }
  for (std::size_t a = 0; a < big.size(); ++a) {
    for (std::size_t b = a + 1; b < big.size(); ++b) {
      ModCmp m = sd.cmp_moduli(big[a], big[b]);
      if (m == ModCmp::Equal) {
        v.value = Tri::Yes;
        v.detail = "two eigenvalues of modulus >= 1 share a modulus";
        return v;
      }
      if (m == ModCmp::Unknown) unknown = true;
    }
  }
  if (unknown) {
    v.value = Tri::Unknown;
    v.detail = "tie or unresolved multiplicity among moduli >= 1";
    return v;
  }
  v.value = Tri::No;
  v.detail = big.empty() ? "no eigenvalue of modulus >= 1"
                         : std::to_string(big.size()) + " simple eigenvalues of modulus >= 1 with distinct moduli";
  return v;
}

C2Result c2_from(Ctx& c) {
  const SpectralData& sd = c.sd;
  C2Result r;
  r.wnh.rule = r.nh.rule = r.snh.rule = "2dim";
  std::string why;
  if (power_bounded(sd, &why) == Tri::Yes) {
    r.wnh = {Tri::No, "ele.1", "power bounded: " + why};
  } else if (sd.points.size() == 1) {
    if (sd.points[0].separated) {
      r.wnh = {Tri::No, "2dim", "single eigenvalue, not independent of itself"};
    } else {
      r.wnh = {Tri::Unknown, "2dim", "eigenvalue cluster not resolved"};
    }
  } else {
    ModCmp m = sd.cmp_moduli(0, 1);
    ModCmp o0 = sd.cmp_one(0), o1 = sd.cmp_one(1);
    if (m == ModCmp::Less || m == ModCmp::Greater) {
      r.wnh = {Tri::No, "2dim", "distinct moduli " + fmt(sd.points[0].radius) + ", " + fmt(sd.points[1].radius)};
    } else if ((o0 == ModCmp::Less || o0 == ModCmp::Equal) && (o1 == ModCmp::Less || o1 == ModCmp::Equal)) {
      r.wnh = {Tri::No, "2dim", "spectral radius <= 1"};
    } else if (m == ModCmp::Unknown) {
      r.wnh = {Tri::Unknown, "2dim", "moduli tie within " + fmt(sd.tie)};
    } else if (o0 == ModCmp::Unknown) {
      r.wnh = {Tri::Unknown, "2dim", "common modulus within tie of 1"};
    } else {
      Tri ind = c.indep({0, 1}, &why);
      if (ind == Tri::Yes && c.sep({0, 1}) == Tri::Yes) {
        r.wnh = {Tri::Yes, "2dim", "|l1| = |l2| = " + fmt(sd.points[0].radius) + " > 1, angles " + why};
      } else if (ind == Tri::No) {
        r.wnh = {Tri::No, "2dim", "angles " + why};
      } else {
        r.wnh = {Tri::Unknown, "2dim", "angles " + why};
      }
    }
  }
  if (r.wnh.value == Tri::No) {
    r.nh = {Tri::No, r.wnh.rule, "NH within WNH"};
    r.snh = {Tri::No, r.wnh.rule, "SNH within WNH"};
    return r;
  }
  r.snh = {Tri::Unknown, "2dim", "needs density of {l1^k + l2^k}, not decidable from finite data"};
  if (r.wnh.value == Tri::Yes && sd.normal == false) {
    r.nh = {Tri::Yes, "2dim", "WNH and not unitarily equivalent to a diagonal operator (non-normal)"};
  } else if (r.wnh.value == Tri::Yes && sd.normal == true) {
    r.nh = {Tri::Unknown, "2dim", "normal: NH iff SNH"};
  } else {
    r.nh = {Tri::Unknown, "2dim", "WNH undecided"};
  }
  return r;
}

Verdict c3_from(Ctx& c) {
  const SpectralData& sd = c.sd;
  std::string why;
  if (power_bounded(sd, &why) == Tri::Yes) return {Tri::No, "ele.1", "power bounded: " + why};
  const int P = static_cast<int>(sd.points.size());
  bool unknown = false;
  std::string unk;
  // first disjunct
  for (int i = 0; i < P; ++i) {
    for (int j = i + 1; j < P; ++j) {
      Tri t = tri_and({is_eq(sd.cmp_moduli(i, j)), is_gt(sd.cmp_one(i))});
      if (t != Tri::No) t = tri_and({t, c.indep({i, j}, &why), c.sep({i, j})});
      if (t == Tri::Yes) return {Tri::Yes, "3dim", "first disjunct: " + c.name(i) + ", " + c.name(j) + ", angles " + why};
      if (t == Tri::Unknown) {
        unknown = true;
        unk = c.name(i) + ", " + c.name(j);
      }
    }
  }
  // second disjunct: three distinct eigenvalues
  bool three = P == 3 && c.sep({0, 1, 2}) == Tri::Yes;
  if (P == 3 && !three) unknown = true;
  if (three) {
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        int l = 3 - i - j;
        Tri t = tri_and({is_eq(sd.cmp_moduli(i, j)), is_gt(sd.cmp_moduli(i, l)), is_gt(sd.cmp_one(l))});
        if (t != Tri::No) t = tri_and({t, c.infinite_order(i, j), c.indep({i, l}, &why)});
        if (t == Tri::Yes) {
          return {Tri::Yes, "3dim", "second disjunct: " + c.name(i) + ", " + c.name(j) + ", " + c.name(l)};
        }
        if (t == Tri::Unknown) {
          unknown = true;
          unk = c.name(i) + ", " + c.name(j) + ", " + c.name(l);
        }
      }
    }
  }
  if (unknown) return {Tri::Unknown, "3dim", "undecided subclause at " + unk};
  return {Tri::No, "3dim", "neither disjunct holds"};
}

}  // namespace

std::vector<RuleResult> sufficient_conditions(const SpectralData& data, const ClassifyConfig& cfg,
                                              const SteeringResult* witness) {
  Ctx c{data, cfg, {}, {}};
  return rules_impl(c, witness);
}

C2Result classify_c2(const OperatorSpec& T, const ClassifyConfig& cfg) {
  if (dimension(T) != 2) throw DimensionMismatch("classify_c2 needs a 2x2 operator");
  SpectralData sd = spectral_data(T, cfg);
  Ctx c{sd, cfg, {}, {}};
  return c2_from(c);
}

Verdict classify_c3_wnh(const OperatorSpec& T, const ClassifyConfig& cfg) {
  if (dimension(T) != 3) throw DimensionMismatch("classify_c3_wnh needs a 3x3 operator");
  SpectralData sd = spectral_data(T, cfg);
  Ctx c{sd, cfg, {}, {}};
  return c3_from(c);
}

Verdict closure_membership(const OperatorSpec& T, const ClassifyConfig& cfg) {
  if (std::holds_alternative<WeightedShift>(T)) {
    return {Tri::Unknown, "clos.4", "infinite-dimensional shift: spectral condition not evaluated"};
  }
  return closure_from(spectral_data(T, cfg));
}

// ---------------------------------------------------------------- shifts

Verdict shift_classify(const WeightedShift& T, long horizon, double tie) {
  if (horizon < 1) throw InvalidInput("horizon must be at least 1");
  validate(OperatorSpec(T));
  const WeightSpec& w = T.weights;
  const bool bilateral = T.kind == ShiftKind::Bilateral;
  // closed form: unbounded, or bounded by the product over the finitely many weights above 1
  Tri unbounded = Tri::Unknown;
  std::string why;
  long J = 0;  // |w_k| <= 1 for every |k| >= J
  if (w.type == "constant") {
    double c = std::abs(w.value);
    unbounded = c > 1 ? Tri::Yes : Tri::No;
    why = "constant weights of modulus " + fmt(c);
  } else if (w.type == "harmonic") {
    double a = std::fabs(w.a);
    if (a > 1) {
      unbounded = Tri::Yes;
      why = "weights a + b/k with |a| > 1";
    } else if (a < 1) {
      unbounded = Tri::No;
      J = static_cast<long>(std::ceil(std::fabs(w.b) / (1 - a))) + 1;
      why = "weights a + b/k with |a| < 1";
    } else {
      double s = w.b / w.a;
      if (s > 0) {
        unbounded = Tri::Yes;
        why = "weights 1 + s/k with s = " + fmt(s) + " > 0: window products grow like ((k+n)/k)^s";
      } else {
        unbounded = Tri::No;
        J = static_cast<long>(std::ceil(-s / 2)) + 1;
        why = "weights 1 + s/k with s <= 0: |w_k| <= 1 for k >= " + std::to_string(J);
      }
    }
  } else if (w.type == "list") {
    double t = std::abs(w.value);
    unbounded = t > 1 ? Tri::Yes : Tri::No;
    J = static_cast<long>(w.values.size()) + 1;
    why = "finite list then constant modulus " + fmt(t);
  }
  // boundary quantity: a nonzero value within tie of the threshold is a tie
  double g = 0;
  if (w.type == "constant") g = std::abs(w.value) - 1;
  if (w.type == "list") g = std::abs(w.value) - 1;
  if (w.type == "harmonic") g = std::fabs(w.a) == 1 ? w.b / w.a : std::fabs(w.a) - 1;
  if (g != 0 && std::fabs(g) <= tie) {
    return {Tri::Unknown, "KPS2", "tie: " + why + " within " + fmt(tie) + " of the power-bounded threshold"};
  }
  double bound = 1;
  if (unbounded == Tri::No) {
    for (long k = bilateral ? -J : 1; k <= J; ++k) bound *= std::max(1.0, std::abs(w(k)));
  }

  // scan for the witness window
  double best = 0;
  long bn = 0, bk = 0;
  for (long n = 1; n <= horizon; n *= 2) {
    NormInterval ni = shift_norm(T, n, horizon);
    if (ni.lower > best) {
      best = ni.lower;
      bn = n;
      bk = ni.argmax;
    }
  }
  Verdict v;
  v.rule = "KPS2";
  if (unbounded == Tri::Yes) {
    v.value = Tri::Yes;
    v.detail = "not power bounded: " + why + "; ||T^" + std::to_string(bn) + "|| >= " + fmt(best) + " (window at k=" +
               std::to_string(bk) + ")";
  } else if (unbounded == Tri::No) {
    if (best > bound * (1 + 1e-9)) throw ConvergenceFailure("scanned shift norm exceeds its closed-form bound");
    v.value = Tri::No;
    v.detail = "power bounded: " + why + "; sup ||T^n|| <= " + fmt(bound);
  } else {
    v.value = Tri::Unknown;
    v.detail = "no closed form; max ||T^n|| >= " + fmt(best) + " over n <= " + std::to_string(horizon);
  }
  return v;
}

// ---------------------------------------------------------------- classify

Classification classify(const OperatorSpec& T, const ClassifyConfig& cfg, const SteeringResult* witness) {
  Classification out;
  if (const auto* S = std::get_if<WeightedShift>(&T)) {
    Verdict nh = shift_classify(*S, cfg.shift_horizon, cfg.tie);
    out.nh = nh;
    out.wnh = {nh.value, nh.rule, nh.value == Tri::No ? "power bounded, similarity invariant" : nh.detail};
    if (nh.value == Tri::No) {
      out.snh = {Tri::No, nh.rule, "SNH within NH"};
    } else if (nh.value == Tri::Yes && S->kind == ShiftKind::Backward) {
      out.snh = {Tri::Yes, "kpsrem+ele.2",
                 "unilateral backward shift with unbounded initial products: hypercyclic, so every similar operator is NH"};
    } else {
      out.snh = {Tri::Unknown, nh.rule, "strong numeric hypercyclicity not decided for this shift"};
    }
    out.closure = closure_membership(T, cfg);
    return out;
  }
  SpectralData sd = spectral_data(T, cfg);
  Ctx c{sd, cfg, {}, {}};
  out.rules = rules_impl(c, witness);
  out.closure = closure_from(sd);
  out.spectrum = sd;

  auto fired = [&](const std::string& r) -> const RuleResult* {
    for (const auto& x : out.rules) {
      if (x.rule == r && x.status == Firing::Fired) return &x;
    }
    return nullptr;
  };
  std::optional<Verdict> wnh_yes, nh_yes, snh_yes, wnh_no;
  std::optional<C2Result> c2;
  std::optional<Verdict> c3;
  if (sd.dim == 2) c2 = c2_from(c);
  if (sd.dim == 3) c3 = c3_from(c);

  if (c2 && c2->wnh.value == Tri::Yes) wnh_yes = c2->wnh;
  if (c2 && c2->nh.value == Tri::Yes) nh_yes = c2->nh;
  if (c3 && c3->value == Tri::Yes) wnh_yes = *c3;
  if (const auto* r = fired("suffsnh.2")) {
    snh_yes = Verdict{Tri::Yes, r->rule, r->certificate};
    if (!nh_yes) nh_yes = Verdict{Tri::Yes, r->rule, "SNH within NH: " + r->certificate};
  }
  for (const char* n : {"suffnh", "suffnh1"}) {
    if (const auto* r = fired(n); r && !nh_yes) nh_yes = Verdict{Tri::Yes, r->rule, r->certificate};
  }
  for (const char* n : {"suffwnh.1", "suffwnh.2", "suffwnh.3", "suffwnh.4"}) {
    if (const auto* r = fired(n); r && !wnh_yes) wnh_yes = Verdict{Tri::Yes, r->rule, r->certificate};
  }
  if (nh_yes && !wnh_yes) wnh_yes = Verdict{Tri::Yes, nh_yes->rule, "NH within WNH: " + nh_yes->detail};

  if (c2 && c2->wnh.value == Tri::No) wnh_no = c2->wnh;
  if (c3 && c3->value == Tri::No) wnh_no = *c3;
  for (const char* n : {"ele.1", "abcde", "normaLLL.3"}) {
    if (const auto* r = fired(n); r && !wnh_no) wnh_no = Verdict{Tri::No, r->rule, r->certificate};
  }
  if (out.closure.value == Tri::No && !wnh_no) {
    wnh_no = Verdict{Tri::No, "clos", "outside the closure of WNH: " + out.closure.detail};
  }

  if (wnh_yes && wnh_no) {
    Verdict u{Tri::Unknown, "conflict", wnh_yes->rule + " vs " + wnh_no->rule};
    out.wnh = out.nh = out.snh = u;
    return out;
  }
  if (wnh_no) {
    out.wnh = *wnh_no;
    out.nh = {Tri::No, wnh_no->rule, "NH within WNH"};
    out.snh = {Tri::No, wnh_no->rule, "SNH within WNH"};
    return out;
  }
  out.wnh = wnh_yes ? *wnh_yes : Verdict{Tri::Unknown, c3 ? "3dim" : (c2 ? "2dim" : "none"), "no rule decides WNH"};
  if (c2 && c2->wnh.value == Tri::Unknown && !wnh_yes) out.wnh = c2->wnh;
  if (c3 && c3->value == Tri::Unknown && !wnh_yes) out.wnh = *c3;
  if (nh_yes) {
    out.nh = *nh_yes;
  } else if (c2) {
    out.nh = c2->nh;
  } else {
    out.nh = {Tri::Unknown, "none", "no rule decides NH"};
  }
  if (snh_yes) {
    out.snh = *snh_yes;
  } else {
    std::string d = "no rule decides SNH";
    for (const auto& r : out.rules) {
      if (r.rule == "suffsnh.1" && r.status == Firing::FiredWithFiniteCertificate) {
        d = "suffsnh.1 fired with a finite certificate only: " + r.certificate;
      }
    }
    out.snh = {Tri::Unknown, c2 ? "2dim" : "suffsnh", d};
  }
  return out;
}

std::vector<Classification> classify_batch(const std::vector<OperatorSpec>& specs, const ClassifyConfig& cfg) {
  std::vector<Classification> out(specs.size());
  std::size_t workers = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < specs.size(); i += workers) out[i] = classify(specs[i], cfg);
    }));
  }
  for (auto& j : jobs) j.get();
  return out;
}

// ---------------------------------------------------------------- perturbation

SnhPerturbation approx_snh_perturbation(const OperatorSpec& T, const std::vector<Target>& targets, double delta,
                                        const SteeringResult* prior) {
  std::vector<ExactEntry> d;
  if (const auto* E = std::get_if<ExactDiagonal>(&T)) {
    d = E->entries;
  } else if (const auto* D = std::get_if<DenseMatrix>(&T); D && D->exact && D->n == 2 && off_diagonal_zero(*D)) {
    d = {(*D->exact)[0], (*D->exact)[3]};
  } else {
    throw InvalidInput("perturbation needs an exact 2x2 diagonal operator");
  }
  if (d.size() != 2) throw DimensionMismatch("perturbation needs a 2x2 operator");
  if (d[0].radius != d[1].radius) throw InvalidInput("eigenvalues must have equal moduli");
  const Rat& r = d[0].radius;
  if (r.get_den() != 1 || r < 1) throw InvalidInput("common modulus must be an integer >= 1");
  if (!(delta > 0)) throw InvalidInput("delta must be positive");
  if (targets.empty()) throw InvalidInput("empty target list");

  if (prior) {
    ExactDiagonal pd = prior->diagonal();
    bool same = pd.entries.size() == 2;
    for (std::size_t i = 0; same && i < 2; ++i) {
      same = pd.entries[i].radius == d[i].radius && pd.entries[i].angle.describe() == d[i].angle.describe();
    }
    bool covers = same && prior->hits.size() >= targets.size();
    for (std::size_t j = 0; covers && j < targets.size(); ++j) {
      covers = prior->hits[j].target == targets[j].y && prior->hits[j].eps <= targets[j].eps;
    }
    if (covers) {
      SnhPerturbation out;
      out.T.entries = d;
      out.cert = *prior;
      out.unchanged = true;
      out.residuals = replay(*prior);
      return out;
    }
  }

  std::optional<Rat> a = as_rational(d[0].angle), b = as_rational(d[1].angle);
  if (!a || !b) throw InvalidInput("perturbation needs rational eigen angles");
  const long R = r.get_num().get_si();
  RadiusSchedule rs;
  rs.R = R;
  SteerOptions opt;
  // R pi |alpha| <= delta keeps both entries within delta
  opt.min_first_exponent = std::max(0L, static_cast<long>(std::ceil(std::log(R * M_PI / delta) / std::log(R))));
  if (opt.min_first_exponent > opt.max_first_exponent) throw Unreachable("delta too small for the angle moves");

  for (;;) {
    SteeringResult s0 = torus_steer(rs, "znwn", targets, opt);
    // rotate target j by e^{-i pi n_j a}; the schedule depends on |y| only
    std::vector<Target> rot = targets;
    bool ok = true;
    for (std::size_t j = 0; j < targets.size(); ++j) {
      const Index& n = s0.hits[j].n;
      ReduceResult ra = reduce_mod2(Angle(*a), n, 1e-30);
      ReduceResult rb = reduce_mod2(Angle(*b), n, 1e-30);
      if (!ra.exact || !rb.exact || *ra.exact != *rb.exact) {
        ok = false;
        break;
      }
      double ph = ra.exact->get_d();
      rot[j].y = targets[j].y * std::polar(1.0, -M_PI * ph);
    }
    if (!ok) throw InvalidInput("angle difference of the eigenvalues is not killed by the hit indices");
    SteeringResult s = torus_steer(rs, "znwn", rot, opt);
    SnhPerturbation out;
    ExactEntry e0(r, Angle(*a) + s.alpha);
    ExactEntry e1(r, Angle(*b) + s.beta);
    e1.rel_to = 0;
    e1.rel_delta = Angle(Rat(*b - *a)) + s.rel;
    out.T.entries = {e0, e1};
    double err = 0;
    double amax = 0;
    for (const Angle* x : {&s.alpha, &s.beta}) {
      Real v = x->value(128, &err);
      amax = std::max(amax, std::fabs(v.to_double()) + err);
    }
    out.distance = static_cast<double>(R) * 2 * std::sin(std::min(M_PI / 2, M_PI * amax / 2)) * (1 + 1e-12);
    if (out.distance > delta) {
      if (++opt.min_first_exponent > opt.max_first_exponent) throw Unreachable("delta too small for the angle moves");
      continue;
    }
    // replay the perturbed operator against the original targets
    std::vector<Rat> c{1, 1};
    for (std::size_t j = 0; j < targets.size(); ++j) {
      double t = std::min(1e-20, targets[j].eps / (8 * (1 + std::abs(targets[j].y))));
      long prec = 64 + static_cast<long>(-std::log2(t));
      PrecisionPolicy pol;
      pol.start_bits = std::max(pol.start_bits, prec);
      pol.max_bits = std::max(pol.max_bits, 8 * prec);
      ScaledComplex v = diagonal_value(out.T, c, s.hits[j].n, t, pol);
      ComplexInterval iv = v.to_interval(prec);
      double res = add_up(std::abs(iv.center() - targets[j].y), iv.rad);
      if (!(res <= targets[j].eps)) throw ConvergenceFailure("perturbed operator misses target " + std::to_string(j));
      out.residuals.push_back(res);
    }
    out.cert = s;
    return out;
  }
}

}  // namespace numcyc
