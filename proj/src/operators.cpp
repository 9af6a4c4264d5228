#include "numcyc/operators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "numcyc/errors.hpp"

namespace numcyc {

namespace {

constexpr double kU = 1.1102230246251565e-16;  // 2^-53

double norm2(const std::vector<cplx>& v) {
  double s = 0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

// Real and imaginary parts of radius * e^{i pi theta} at the given precision,
// with an absolute error bound.
void exact_entry_value(const ExactEntry& e, long prec, Real& re, Real& im, double& err) {
  if (e.radius == 0) {
    re = Real(prec);
    im = Real(prec);
    err = 0.0;
    return;
  }
  double aerr = 0.0;
  Real th = e.angle.value(prec + 16, &aerr);
  ComplexInterval u = ComplexInterval::unit(th, aerr);
  Real r = Real::from_rat(e.radius, prec + 16);
  re = (u.re * r).with_prec(prec);
  im = (u.im * r).with_prec(prec);
  double ar = std::fabs(e.radius.get_d());
  err = add_up(mul_up(u.rad, ar * (1 + 1e-15)), std::ldexp(4.0 * (1.0 + ar), static_cast<int>(-prec)));
}

ScaledReal rebase(const ScaledReal& s, int base, long prec) {
  if (s.base == base || s.is_zero()) {
    ScaledReal r = s;
    r.base = base;
    if (s.is_zero()) return ScaledReal::zero(base);
    return r;
  }
  if (!s.representable()) throw PrecisionUnreachable("cannot change the base of " + s.str());
  return ScaledReal::from_real(s.to_real(prec), base, add_up(s.err, pow2_up(4.0, -prec)));
}

}  // namespace

cplx ExactEntry::approx() const {
  if (radius == 0) return 0.0;
  double th = angle.approx();
  return std::polar(radius.get_d(), M_PI * th);
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<cplx>>& rows) {
  DenseMatrix m;
  m.n = static_cast<int>(rows.size());
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != m.n) throw DimensionMismatch("dense matrix must be square");
    m.a.insert(m.a.end(), r.begin(), r.end());
  }
  return m;
}

DenseMatrix DenseMatrix::from_exact(int n, const std::vector<ExactEntry>& entries) {
  if (static_cast<int>(entries.size()) != n * n) throw DimensionMismatch("dense matrix must be square");
  DenseMatrix m;
  m.n = n;
  for (const auto& e : entries) m.a.push_back(e.approx());
  m.exact = entries;
  return m;
}

DenseMatrix DenseMatrix::identity(int n) {
  std::vector<ExactEntry> e(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) e[static_cast<std::size_t>(i * n + i)].radius = 1;
  return from_exact(n, e);
}

double DenseMatrix::frobenius() const {
  double s = 0;
  for (const auto& z : a) s += std::norm(z);
  return std::sqrt(s);
}

bool DenseMatrix::upper_triangular() const {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      if (exact) {
        if ((*exact)[static_cast<std::size_t>(i * n + j)].radius != 0) return false;
      } else if (at(i, j) != cplx(0.0)) {
        return false;
      }
    }
  }
  return true;
}

DenseMatrix ExactDiagonal::to_dense() const {
  int n = static_cast<int>(entries.size());
  std::vector<ExactEntry> e(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) e[static_cast<std::size_t>(i * n + i)] = entries[static_cast<std::size_t>(i)];
  return DenseMatrix::from_exact(n, e);
}

cplx WeightSpec::operator()(long k) const {
  if (type == "constant") return value;
  if (type == "harmonic") {
    long kk = k == 0 ? 1 : std::labs(k);
    return a + b / static_cast<double>(kk);
  }
  if (type == "list") {
    if (k >= 1 && k <= static_cast<long>(values.size())) return values[static_cast<std::size_t>(k - 1)];
    return value;
  }
  throw InvalidInput("unknown weight type " + type);
}

double WeightSpec::bound() const {
  if (type == "constant") return std::abs(value);
  if (type == "harmonic") return std::max(std::fabs(a + b), std::fabs(a));
  double m = std::abs(value);
  for (const auto& v : values) m = std::max(m, std::abs(v));
  return m;
}

int dimension(const OperatorSpec& T) {
  if (const auto* d = std::get_if<DenseMatrix>(&T)) return d->n;
  if (const auto* e = std::get_if<ExactDiagonal>(&T)) return static_cast<int>(e->entries.size());
  return -1;
}

void validate(const OperatorSpec& T) {
  if (const auto* d = std::get_if<DenseMatrix>(&T)) {
    if (d->n <= 0 || static_cast<int>(d->a.size()) != d->n * d->n) throw DimensionMismatch("dense matrix must be square");
  } else if (const auto* e = std::get_if<ExactDiagonal>(&T)) {
    if (e->entries.empty()) throw InvalidInput("exact diagonal needs entries");
    for (const auto& x : e->entries) {
      if (x.radius <= 0) throw InvalidInput("exact diagonal radii must be positive");
    }
  } else {
    const auto& s = std::get<WeightedShift>(T);
    if (s.weights.bound() > s.bound * (1 + 1e-12)) throw InvalidInput("shift weights exceed the declared bound");
    if (s.weights.type == "constant" && std::abs(s.weights.value) == 0) throw InvalidInput("shift weights must be nonzero");
    if (s.weights.type == "harmonic") {
      for (long k = 1; k <= 1000; ++k) {
        if (std::abs(s.weights(k)) == 0) throw InvalidInput("shift weights must be nonzero");
      }
    }
    for (const auto& v : s.weights.values) {
      if (std::abs(v) == 0) throw InvalidInput("shift weights must be nonzero");
    }
  }
}

std::vector<cplx> DualPair::products() const {
  if (c_exact) {
    std::vector<cplx> out;
    for (const auto& c : *c_exact) out.emplace_back(c.get_d(), 0.0);
    return out;
  }
  std::vector<cplx> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] * f[j];
  return out;
}

cplx DualPair::apply(const std::vector<cplx>& v) const {
  if (v.size() != f.size()) throw DimensionMismatch("functional and vector sizes differ");
  cplx s = 0;
  for (std::size_t j = 0; j < v.size(); ++j) s += f[j] * v[j];
  return s;
}

DualPair hilbert_pair(const std::vector<cplx>& x, double tol) {
  double nx = norm2(x);
  if (nx == 0 || x.empty()) throw ZeroVector("hilbert_pair needs a nonzero vector");
  DualPair p;
  for (const auto& z : x) p.x.push_back(z / nx);
  for (const auto& z : p.x) p.f.push_back(std::conj(z));
  p.norm_x = norm2(p.x);
  p.norm_f = norm2(p.f);
  cplx fx = p.apply(p.x);
  p.pi_certified = std::fabs(p.norm_x - 1) <= tol && std::fabs(p.norm_f - 1) <= tol && std::abs(fx - 1.0) <= tol;
  return p;
}

DualPair pair_from_weights(const std::vector<Rat>& c) {
  Rat sum = 0;
  for (const auto& v : c) {
    if (v < 0) throw InvalidInput("weights must be nonnegative");
    sum += v;
  }
  if (sum != 1) throw InvalidInput("weights must sum to 1");
  DualPair p;
  for (const auto& v : c) {
    double s = std::sqrt(v.get_d());
    p.x.emplace_back(s, 0.0);
    p.f.emplace_back(s, 0.0);
  }
  p.norm_x = norm2(p.x);
  p.norm_f = norm2(p.f);
  p.c_exact = c;
  p.pi_certified = std::fabs(p.norm_x - 1) <= 1e-12 && std::fabs(p.norm_f - 1) <= 1e-12;
  return p;
}

DualPair pair_from_weights(const std::vector<double>& c) {
  double sum = 0;
  for (double v : c) {
    if (v < 0) throw InvalidInput("weights must be nonnegative");
    sum += v;
  }
  if (std::fabs(sum - 1) > 1e-12) throw InvalidInput("weights must sum to 1");
  DualPair p;
  for (double v : c) {
    p.x.emplace_back(std::sqrt(v), 0.0);
    p.f.emplace_back(std::sqrt(v), 0.0);
  }
  p.norm_x = norm2(p.x);
  p.norm_f = norm2(p.f);
  p.pi_certified = std::fabs(p.norm_x - 1) <= 1e-12 && std::fabs(p.norm_f - 1) <= 1e-12 &&
                   std::abs(p.apply(p.x) - 1.0) <= 1e-12;
  return p;
}

DualPair pair_from_weights_basis(const std::vector<double>& c, const DenseMatrix& V, double tol, int max_iter) {
  int n = V.n;
  if (static_cast<int>(c.size()) != n) throw DimensionMismatch("one weight per basis vector");
  double sum = 0;
  for (double v : c) {
    if (v < 0) throw InvalidInput("weights must be nonnegative");
    sum += v;
  }
  if (std::fabs(sum - 1) > 1e-12) throw InvalidInput("weights must sum to 1");
  Eigen::MatrixXcd M(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) M(i, j) = V.at(i, j);
  }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(M);
  if (!lu.isInvertible()) throw InvalidInput("basis matrix is singular");
  Eigen::MatrixXcd Rows = lu.inverse();  // row j is the coordinate functional e*_j
  auto F = [&](const Eigen::VectorXcd& w) {
    double s = 0;
    for (int j = 0; j < n; ++j) {
      if (c[static_cast<std::size_t>(j)] > 0) s += c[static_cast<std::size_t>(j)] * std::log(std::abs((Rows.row(j) * w)(0)));
    }
    return s;
  };
  // f as coefficient vector: f = sum_j c_j / e*_j(w) * row_j
  auto fvec = [&](const Eigen::VectorXcd& w) {
    Eigen::RowVectorXcd f = Eigen::RowVectorXcd::Zero(n);
    for (int j = 0; j < n; ++j) {
      if (c[static_cast<std::size_t>(j)] > 0) f += (c[static_cast<std::size_t>(j)] / (Rows.row(j) * w)(0)) * Rows.row(j);
    }
    return f;
  };
  Eigen::VectorXcd w = Eigen::VectorXcd::Zero(n);
  for (int j = 0; j < n; ++j) w += std::sqrt(c[static_cast<std::size_t>(j)]) * M.col(j);
  w.normalize();
  double eta = 0.5;
  double fw = F(w);
  bool ok = false;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXcd g = fvec(w).conjugate().transpose();
    Eigen::VectorXcd t = g - w * (w.adjoint() * g)(0);
    if (t.norm() < tol * 0.1) {
      ok = true;
      break;
    }
    while (eta > 1e-16) {
      Eigen::VectorXcd cand = (w + eta * t).normalized();
      double fc = F(cand);
      if (fc > fw) {
        w = cand;
        fw = fc;
        eta = std::min(1.0, eta * 1.5);
        break;
      }
      eta *= 0.5;
    }
    if (eta <= 1e-16) {
      ok = true;  // no ascent direction left at double precision
      break;
    }
  }
  Eigen::RowVectorXcd f = fvec(w);
  DualPair p;
  for (int i = 0; i < n; ++i) {
    p.x.push_back(w(i));
    p.f.push_back(f(i));
  }
  p.norm_x = w.norm();
  p.norm_f = f.norm();
  p.approximate = true;
  cplx fx = (f * w)(0);
  p.pi_certified = std::fabs(p.norm_x - 1) <= tol * 10 && std::fabs(p.norm_f - 1) <= tol * 10 && std::abs(fx - 1.0) <= tol * 10;
  if (!ok || !p.pi_certified) throw ConvergenceFailure("weight ascent did not converge to a certified pair");
  return p;
}

namespace {

// A part too small to hold next to the largest one; only reachable for absurd radius ratios.
[[noreturn]] void incomparable_scales(const ScaledReal& r, const Index& n) {
  throw PrecisionUnreachable("orbit components of incomparable scales at n=" + n.str() + " (ratio " + r.str() + ")");
}

}  // namespace

ScaledComplex diagonal_value(const ExactDiagonal& D, const std::vector<Rat>& c, const Index& n, double tol,
                             const PrecisionPolicy& pol) {
  if (c.size() != D.entries.size()) throw DimensionMismatch("one weight per diagonal entry");
  long prec = std::max<long>(pol.start_bits, 64 + static_cast<long>(-std::log2(tol)));
  std::map<Rat, std::vector<std::size_t>> groups;
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (c[j] != 0) groups[D.entries[j].radius].push_back(j);
  }
  std::vector<ScaledComplex> parts;
  for (const auto& [R, idx] : groups) {
    // linked entries with equal weights go through 1 + e^{i pi n delta}; the rest are summed
    std::vector<ScaledComplex> terms;
    std::vector<std::size_t> singles;
    std::vector<bool> used(c.size(), false);
    for (std::size_t i1 : idx) {
      int r = D.entries[i1].rel_to;
      if (r < 0 || used[i1]) continue;
      std::size_t i0 = static_cast<std::size_t>(r);
      if (i0 >= c.size() || used[i0] || c[i0] != c[i1] || D.entries[i0].radius != R) continue;
      used[i0] = used[i1] = true;
      ScaledComplex one = one_plus_pow_complex(D.entries[i1].rel_delta, n, tol / 4, pol);
      ComplexInterval u0 = unimodular_pow(D.entries[i0].angle, n, tol / 4, pol);
      ScaledComplex t;
      t.mag = scaled_mul(one.mag, ScaledReal::from_real(Real::from_rat(c[i0], prec), one.mag.base,
                                                        pow2_up(2.0, -prec)));
      t.phase = one.phase * u0;
      terms.push_back(std::move(t));
    }
    for (std::size_t j : idx) {
      if (!used[j]) singles.push_back(j);
    }
    if (terms.empty() && singles.size() == 2 && c[singles[0]] == c[singles[1]]) {
      // unlinked equal pair: the angle difference still avoids cancellation in the sum
      std::size_t i0 = singles[0], i1 = singles[1];
      const Angle& t0 = D.entries[i0].angle;
      ScaledComplex one = one_plus_pow_complex(D.entries[i1].angle - t0, n, tol / 4, pol);
      ComplexInterval u0 = unimodular_pow(t0, n, tol / 4, pol);
      ScaledComplex t;
      t.mag = scaled_mul(one.mag, ScaledReal::from_real(Real::from_rat(c[i0], prec), one.mag.base,
                                                        pow2_up(2.0, -prec)));
      t.phase = one.phase * u0;
      terms.push_back(std::move(t));
      singles.clear();
    }
    if (!singles.empty()) {
      ComplexInterval s(prec);
      for (std::size_t j : singles) {
        ComplexInterval u =
            unimodular_pow(D.entries[j].angle, n, tol / (4.0 * static_cast<double>(singles.size())), pol);
        s = s + scale(u, Real::from_rat(c[j], prec), pow2_up(2.0, -prec));
      }
      int base = 2;
      for (std::size_t j : singles) {
        if (D.entries[j].angle.is_lacunary()) base = D.entries[j].angle.lac().p;
      }
      ScaledComplex t;
      t.mag = ScaledReal::from_real(Real(1.0, prec), base);
      t.phase = s;
      terms.push_back(std::move(t));
    }
    for (auto& part : terms) {
      if (part.mag.is_zero()) continue;
      // times R^n
      if (R != 1) {
        ScaledReal Rn;
        if (R.get_den() == 1 && R > 1 && R.get_num().fits_slong_p()) {
          long r = R.get_num().get_si();
          Rn = ScaledReal::power(static_cast<int>(r), n.as_exponent(), prec);
          part.mag = scaled_mul(rebase(part.mag, static_cast<int>(r), prec), Rn);
        } else {
          Int N = n.literal();
          Real rr = Real::from_rat(R, prec + 32);
          Real v(prec + 32);
          mpfr_pow_z(v.get(), rr.get(), N.get_mpz_t(), MPFR_RNDN);
          double rel = std::ldexp(4.0 + std::fabs(N.get_d()), static_cast<int>(-prec));
          Rn = ScaledReal::from_real(v, part.mag.base, rel);
          part.mag = scaled_mul(part.mag, Rn);
        }
      }
      parts.push_back(std::move(part));
    }
  }
  if (parts.empty()) {
    ScaledComplex z;
    z.mag = ScaledReal::zero(2);
    z.phase = ComplexInterval(prec);
    return z;
  }
  if (parts.size() == 1) return parts[0];
  // sum relative to the largest part, so the phase stays inside double range
  bool literal = true;
  std::size_t big = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const ScaledReal& m = parts[i].mag;
    if (!m.expo.is_literal()) {
      literal = false;
      break;
    }
    double l = m.log_base() * std::log(static_cast<double>(m.base));
    if (l > best) {
      best = l;
      big = i;
    }
  }
  if (literal) {
    ScaledReal M = parts[big].mag;
    ScaledReal unit = M;
    unit.err = 0;
    ComplexInterval rel(prec);
    for (std::size_t i = 0; i < parts.size(); ++i) {
      ScaledComplex q;
      q.phase = parts[i].phase;
      if (i == big) {
        q.mag = ScaledReal::from_real(Real(1.0, prec), M.base);
      } else {
        q.mag = scaled_div(rebase(parts[i].mag, M.base, prec), unit);
        if (!q.mag.representable()) incomparable_scales(q.mag, n);
      }
      rel = rel + q.to_interval(prec);
    }
    ScaledComplex out;
    out.mag = M;
    out.phase = rel;
    return out;
  }
  ComplexInterval total(prec);
  for (const auto& p : parts) {
    if (!p.representable()) throw PrecisionUnreachable("cannot add orbit components of different scales at n=" + n.str());
    total = total + p.to_interval(prec);
  }
  ScaledComplex out;
  out.mag = ScaledReal::from_real(Real(1.0, prec), 2);
  out.phase = total;
  return out;
}

namespace {

std::vector<Index> sorted_unique(std::vector<Index> idx) {
  for (std::size_t i = 1; i < idx.size(); ++i) {
    Exponent a = idx[i - 1].as_exponent(), b = idx[i].as_exponent();
    if (compare(a, b) >= 0) throw InvalidInput("orbit indices must be strictly increasing");
  }
  return idx;
}

// Dense orbit in MPFR at precision prec; returns false if the bound exceeds tol.
constexpr long kDenseMaxBits = 1024;

bool dense_exact(const DenseMatrix& T, const DualPair& pair, const std::vector<long>& idx, double tol, long prec,
                 std::vector<OrbitPoint>& out) {
  int n = T.n;
  std::vector<Real> are(static_cast<std::size_t>(n * n), Real(prec)), aim(static_cast<std::size_t>(n * n), Real(prec));
  double entry_err = 0.0;
  for (int k = 0; k < n * n; ++k) {
    double e = 0.0;
    if (T.exact) {
      exact_entry_value((*T.exact)[static_cast<std::size_t>(k)], prec, are[static_cast<std::size_t>(k)],
                        aim[static_cast<std::size_t>(k)], e);
    } else {
      are[static_cast<std::size_t>(k)] = Real(T.a[static_cast<std::size_t>(k)].real(), prec);
      aim[static_cast<std::size_t>(k)] = Real(T.a[static_cast<std::size_t>(k)].imag(), prec);
    }
    entry_err = std::max(entry_err, e);
  }
  double normT = T.frobenius() * (1 + 1e-12) + 1e-300;
  double dT = entry_err * n;  // Frobenius bound on the entry perturbation
  double u = pow2_up(1.0, -prec);
  std::vector<Real> vre(static_cast<std::size_t>(n), Real(prec)), vim(static_cast<std::size_t>(n), Real(prec));
  for (int i = 0; i < n; ++i) {
    vre[static_cast<std::size_t>(i)] = Real(pair.x[static_cast<std::size_t>(i)].real(), prec);
    vim[static_cast<std::size_t>(i)] = Real(pair.x[static_cast<std::size_t>(i)].imag(), prec);
  }
  double e = 0.0;
  double nf = norm2(pair.f) * (1 + 1e-12);
  long step = 0;
  long shift = 0;  // v holds T^step x / 2^shift
  std::size_t next = 0;
  while (next < idx.size()) {
    if (step == idx[next]) {
      Real sre(prec), sim(prec);
      double vnorm = 0;
      for (int i = 0; i < n; ++i) {
        Real fr(pair.f[static_cast<std::size_t>(i)].real(), prec), fi(pair.f[static_cast<std::size_t>(i)].imag(), prec);
        sre += fr * vre[static_cast<std::size_t>(i)] - fi * vim[static_cast<std::size_t>(i)];
        sim += fr * vim[static_cast<std::size_t>(i)] + fi * vre[static_cast<std::size_t>(i)];
        vnorm += std::norm(cplx(vre[static_cast<std::size_t>(i)].to_double(), vim[static_cast<std::size_t>(i)].to_double()));
      }
      vnorm = std::sqrt(vnorm) * (1 + 1e-12);
      double rad = add_up(mul_up(nf, e), mul_up(4.0 * (n + 2) * u, mul_up(nf, vnorm)));
      double abs_s = std::hypot(sre.to_double(), sim.to_double());
      double scale_ref = shift == 0 ? std::max(1.0, abs_s) : abs_s;
      if (!(rad <= tol * scale_ref)) return false;
      OrbitPoint pt;
      pt.n = Index(step);
      if (shift == 0) {
        pt.value = ComplexInterval(sre, sim, rad);
      } else {
        // value = 2^shift (s + delta), |delta| <= rad, written as |s| 2^shift times a phase
        Real as = hypot(sre, sim);
        ScaledComplex sc;
        sc.mag = ScaledReal::from_real(as, 2, 4 * u, Exponent(shift));
        sc.phase = ComplexInterval(sre / as, sim / as, round_up(rad / abs_s * (1 + 1e-12) + 4 * u));
        pt.value = sc.to_interval(prec);
        if (!std::isfinite(pt.value.rad) || !std::isfinite(std::abs(pt.value.center()))) pt.scaled = sc;
      }
      out.push_back(std::move(pt));
      ++next;
      continue;
    }
    double vnorm = 0;
    std::vector<Real> nre(static_cast<std::size_t>(n), Real(prec)), nim(static_cast<std::size_t>(n), Real(prec));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const Real& ar = are[static_cast<std::size_t>(i * n + j)];
        const Real& ai = aim[static_cast<std::size_t>(i * n + j)];
        nre[static_cast<std::size_t>(i)] += ar * vre[static_cast<std::size_t>(j)] - ai * vim[static_cast<std::size_t>(j)];
        nim[static_cast<std::size_t>(i)] += ar * vim[static_cast<std::size_t>(j)] + ai * vre[static_cast<std::size_t>(j)];
      }
      vnorm += std::norm(cplx(vre[static_cast<std::size_t>(i)].to_double(), vim[static_cast<std::size_t>(i)].to_double()));
    }
    vnorm = std::sqrt(vnorm) * (1 + 1e-12);
    // e_{k+1} <= |T| e_k + |dT| |v_k| + rounding
    e = add_up(add_up(mul_up(normT, e), mul_up(dT, vnorm)), mul_up(4.0 * (n + 2) * u, mul_up(normT, vnorm)));
    vre.swap(nre);
    vim.swap(nim);
    ++step;
    // Keep |v| near 1 by exact power-of-two rescaling; the error scales with it.
    long top = std::numeric_limits<long>::min();
    for (int i = 0; i < n; ++i) {
      if (!vre[static_cast<std::size_t>(i)].is_zero()) top = std::max(top, vre[static_cast<std::size_t>(i)].exponent2());
      if (!vim[static_cast<std::size_t>(i)].is_zero()) top = std::max(top, vim[static_cast<std::size_t>(i)].exponent2());
    }
    if (top > 64) {
      for (int i = 0; i < n; ++i) {
        mpfr_mul_2si(vre[static_cast<std::size_t>(i)].get(), vre[static_cast<std::size_t>(i)].get(), -top, MPFR_RNDN);
        mpfr_mul_2si(vim[static_cast<std::size_t>(i)].get(), vim[static_cast<std::size_t>(i)].get(), -top, MPFR_RNDN);
      }
      if (e > 0) e = std::nextafter(std::max(std::ldexp(e, static_cast<int>(-top)), std::numeric_limits<double>::denorm_min()), INFINITY);
      shift += top;
    }
  }
  return true;
}

}  // namespace

OrbitSeries orbit(const OperatorSpec& T, const DualPair& pair, const std::vector<Index>& indices, const OrbitOptions& opt) {
  validate(T);
  OrbitSeries out;
  std::vector<Index> idx = sorted_unique(indices);
  if (const auto* D = std::get_if<ExactDiagonal>(&T)) {
    if (pair.x.size() != D->entries.size()) throw DimensionMismatch("pair and operator dimensions differ");
    std::vector<Rat> c;
    if (pair.c_exact) {
      c = *pair.c_exact;
    } else {
      for (const auto& z : pair.products()) {
        if (std::fabs(z.imag()) > 0) throw InvalidInput("exact diagonal orbits need real products c_j");
        c.emplace_back(z.real());
      }
    }
    out.mode = "exact";
    for (const auto& n : idx) {
      ScaledComplex v = diagonal_value(*D, c, n, opt.tol, opt.policy);
      OrbitPoint pt;
      pt.n = n;
      if (v.representable()) {
        pt.value = v.to_interval(std::max<long>(opt.policy.start_bits, 128));
        // past double range the radius overflows; keep the relative form too
        if (!std::isfinite(pt.value.rad) || !std::isfinite(std::abs(pt.value.center()))) pt.scaled = v;
      } else {
        pt.value = ComplexInterval::from_double(0, 0, std::numeric_limits<double>::infinity());
        pt.scaled = v;
      }
      out.entries.push_back(std::move(pt));
    }
    return out;
  }
  if (const auto* M = std::get_if<DenseMatrix>(&T)) {
    if (static_cast<int>(pair.x.size()) != M->n || static_cast<int>(pair.f.size()) != M->n) {
      throw DimensionMismatch("pair and operator dimensions differ");
    }
    std::vector<long> lit;
    for (const auto& n : idx) {
      Int v = n.literal();
      if (!v.fits_slong_p() || v < 0) throw InvalidInput("dense orbit indices must be small nonnegative integers");
      lit.push_back(v.get_si());
    }
    int n = M->n;
    if (!opt.force_exact) {
      // float path with a running bound
      std::vector<cplx> v = pair.x;
      double normT = M->frobenius() * (1 + 1e-12);
      double nf = norm2(pair.f) * (1 + 1e-12);
      double e = 0.0;
      long step = 0;
      bool ok = true;
      std::vector<OrbitPoint> pts;
      for (std::size_t k = 0; k < lit.size() && ok;) {
        if (step == lit[k]) {
          cplx val = pair.apply(v);
          double rad = nf * e + 2.0 * (n + 2) * kU * nf * norm2(v);
          rad = round_up(rad * (1 + 1e-12));
          if (!(rad <= opt.tol * std::max(1.0, std::abs(val))) || !std::isfinite(std::abs(val))) {
            ok = false;
            break;
          }
          OrbitPoint pt;
          pt.n = Index(step);
          pt.value = ComplexInterval::from_complex(val, rad);
          pts.push_back(std::move(pt));
          ++k;
          continue;
        }
        std::vector<cplx> w(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) w[static_cast<std::size_t>(i)] += M->at(i, j) * v[static_cast<std::size_t>(j)];
        }
        e = normT * e + 2.0 * (n + 2) * kU * normT * norm2(v);
        v.swap(w);
        ++step;
      }
      if (ok) {
        out.mode = "float";
        out.entries = std::move(pts);
        return out;
      }
    }
    // Error bookkeeping is in doubles, which cannot hold 2^-prec past this.
    long cap = std::min<long>(opt.policy.max_bits, kDenseMaxBits);
    for (long prec = std::min(opt.policy.start_bits, cap); prec <= cap; prec = prec == cap ? cap + 1 : std::min(2 * prec, cap)) {
      std::vector<OrbitPoint> pts;
      if (dense_exact(*M, pair, lit, opt.tol, prec, pts)) {
        out.mode = "exact";
        out.entries = std::move(pts);
        return out;
      }
    }
    throw PrecisionUnreachable("dense orbit could not meet the tolerance within the precision cap");
  }
  // weighted shift on finitely supported vectors
  const auto& S = std::get<WeightedShift>(T);
  std::map<long, cplx> v;
  for (std::size_t i = 0; i < pair.x.size(); ++i) {
    if (pair.x[i] != cplx(0.0)) v[pair.shift_offset + static_cast<long>(i)] = pair.x[i];
  }
  auto fval = [&](const std::map<long, cplx>& vec) {
    cplx s = 0;
    for (std::size_t i = 0; i < pair.f.size(); ++i) {
      auto it = vec.find(pair.shift_offset + static_cast<long>(i));
      if (it != vec.end()) s += pair.f[i] * it->second;
    }
    return s;
  };
  out.mode = "float";
  long step = 0;
  for (const auto& nI : idx) {
    Int nv = nI.literal();
    long target = nv.get_si();
    while (step < target) {
      std::map<long, cplx> w;
      for (const auto& [k, val] : v) {
        if (S.kind == ShiftKind::Backward) {
          if (k >= 1) w[k - 1] += S.weight(k) * val;  // B e_k = w_k e_{k-1}, B e_0 = 0
        } else if (S.kind == ShiftKind::Forward) {
          w[k + 1] += S.weight(k + 1) * val;  // F e_k = w_{k+1} e_{k+1}
        } else {
          w[k - 1] += S.weight(k) * val;
        }
      }
      v.swap(w);
      ++step;
    }
    OrbitPoint pt;
    pt.n = nI;
    cplx val = fval(v);
    pt.value = ComplexInterval::from_complex(val, 64 * kU * (1 + static_cast<double>(step)) * std::max(1.0, std::abs(val)));
    out.entries.push_back(std::move(pt));
  }
  return out;
}

OrbitSeries orbit_range(const OperatorSpec& T, const DualPair& pair, long first, long last, const OrbitOptions& opt) {
  std::vector<Index> idx;
  for (long n = first; n <= last; ++n) idx.emplace_back(n);
  return orbit(T, pair, idx, opt);
}

NormInterval shift_norm(const WeightedShift& T, long n, long window, double tol) {
  if (n < 1 || window < 1) throw InvalidInput("shift_norm needs n >= 1 and window >= 1");
  long k0 = T.kind == ShiftKind::Bilateral ? -window : 1;
  long k1 = T.kind == ShiftKind::Bilateral ? window : window;
  // sliding sum of log|w_k| over [k, k+n-1]
  double best = -std::numeric_limits<double>::infinity();
  long arg = k0;
  double s = 0;
  for (long j = k0; j < k0 + n; ++j) s += std::log(std::abs(T.weight(j)));
  for (long k = k0;; ++k) {
    if (s > best) {
      best = s;
      arg = k;
    }
    if (k == k1) break;
    s += std::log(std::abs(T.weight(k + n))) - std::log(std::abs(T.weight(k)));
  }
  NormInterval r;
  r.lower = std::exp(best) * (1 - 1e-12 * static_cast<double>(n));
  r.upper = std::pow(T.bound, static_cast<double>(n)) * (1 + 1e-12 * static_cast<double>(n));
  r.argmax = arg;
  r.truncated = r.upper > r.lower * (1 + tol);
  return r;
}

}  // namespace numcyc
