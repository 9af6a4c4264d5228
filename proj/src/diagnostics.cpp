#include "numcyc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <set>
#include <sstream>

#include "numcyc/errors.hpp"

namespace numcyc {

const char* to_string(EscapeKind k) {
  switch (k) {
    case EscapeKind::Escaping: return "escaping";
    case EscapeKind::Bounded: return "bounded";
    case EscapeKind::Mixed: break;
  }
  return "mixed";
}

std::vector<Sample> samples_of(const OrbitSeries& s) {
  std::vector<Sample> out;
  for (const auto& p : s.entries) {
    if (!p.n.is_literal()) continue;
    Int n = p.n.literal();
    if (!n.fits_slong_p()) continue;
    Sample q;
    q.n = n.get_si();
    q.rad = p.value.rad;
    if (p.scaled) {
      const ScaledReal& m = p.scaled->mag;
      bool big = m.expo.sign() > 0;
      double lb = std::numeric_limits<double>::quiet_NaN();
      if (m.is_zero()) {
        lb = -std::numeric_limits<double>::infinity();
      } else if (m.expo.is_literal()) {
        lb = m.log_base() * std::log(static_cast<double>(m.base)) + std::log(std::abs(p.scaled->phase.center()));
      }
      if (std::isnan(lb)) lb = big ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      q.log_abs = lb;
      q.z = big ? cplx(std::numeric_limits<double>::infinity(), 0) : cplx(0, 0);
      q.rad = 0;
    } else {
      q.z = p.value.center();
      double a = std::abs(q.z);
      q.log_abs = a > 0 ? std::log(a) : -std::numeric_limits<double>::infinity();
    }
    out.push_back(q);
  }
  return out;
}

std::vector<Sample> samples_of(const std::vector<cplx>& z, long first_n) {
  std::vector<Sample> out;
  for (std::size_t i = 0; i < z.size(); ++i) {
    Sample q;
    q.n = first_n + static_cast<long>(i);
    q.z = z[i];
    double a = std::abs(z[i]);
    q.log_abs = a > 0 ? std::log(a) : -std::numeric_limits<double>::infinity();
    out.push_back(q);
  }
  return out;
}

namespace {

struct Grid {
  double rho, eps;
  int M;
  Grid(double r, double e) : rho(r), eps(e) {
    if (!(rho > 0) || !(eps > 0)) throw InvalidInput("coverage needs rho > 0 and eps > 0");
    double m = std::ceil(2 * rho / eps);
    if (m > 20000) throw CapExceeded("coverage grid too fine");
    M = static_cast<int>(m);
  }
  double center(int i) const { return -rho + (i + 0.5) * eps; }
  bool in_disk(int i, int j) const {
    double x = center(i), y = center(j);
    return x * x + y * y <= rho * rho;
  }
  // cell index of a point, or -1 when it lies in no disk cell
  long cell(cplx z) const {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return -1;
    double fx = std::floor((z.real() + rho) / eps), fy = std::floor((z.imag() + rho) / eps);
    if (fx < 0 || fy < 0 || fx >= M || fy >= M) return -1;
    int i = static_cast<int>(fx), j = static_cast<int>(fy);
    if (!in_disk(i, j)) return -1;
    return static_cast<long>(j) * M + i;
  }
  long disk_cells() const {
    long c = 0;
    for (int j = 0; j < M; ++j) {
      for (int i = 0; i < M; ++i) c += in_disk(i, j);
    }
    return c;
  }
};

std::string num(double x, int digits = 17) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

}  // namespace

CoverageReport coverage(const std::vector<Sample>& pts, double rho, double eps, std::size_t cap) {
  Grid g(rho, eps);
  CoverageReport r;
  r.rho = rho;
  r.eps = eps;
  r.prefix = static_cast<long>(pts.size());
  r.cells = g.disk_cells();
  std::set<long> hit;
  for (const auto& p : pts) {
    long c = g.cell(p.z);
    if (c >= 0) hit.insert(c);
  }
  r.hit = static_cast<long>(hit.size());
  r.hit_fraction = r.cells > 0 ? static_cast<double>(r.hit) / static_cast<double>(r.cells) : 0.0;
  for (int j = 0; j < g.M && r.uncovered.size() < cap; ++j) {
    for (int i = 0; i < g.M && r.uncovered.size() < cap; ++i) {
      if (g.in_disk(i, j) && !hit.count(static_cast<long>(j) * g.M + i)) r.uncovered.emplace_back(i, j);
    }
  }
  return r;
}

std::vector<double> coverage_curve(const std::vector<Sample>& pts, const std::vector<long>& lens, double rho,
                                   double eps) {
  Grid g(rho, eps);
  const double cells = static_cast<double>(g.disk_cells());
  std::vector<long> sorted = lens;
  std::sort(sorted.begin(), sorted.end());
  std::set<long> hit;
  std::size_t at = 0;
  std::vector<std::pair<long, double>> got;
  for (long L : sorted) {
    if (L < 0) throw InvalidInput("prefix length must be non-negative");
    while (at < pts.size() && static_cast<long>(at) < L) {
      long c = g.cell(pts[at].z);
      if (c >= 0) hit.insert(c);
      ++at;
    }
    got.emplace_back(L, cells > 0 ? static_cast<double>(hit.size()) / cells : 0.0);
  }
  std::vector<double> out;
  for (long L : lens) {
    for (const auto& [k, v] : got) {
      if (k == L) {
        out.push_back(v);
        break;
      }
    }
  }
  return out;
}

EscapeReport escape_profile(const std::vector<Sample>& pts) {
  if (pts.size() < 16) throw InvalidInput("escape profile needs at least 16 points");
  EscapeReport r;
  // least squares on the finite points
  double sn = 0, sl = 0, snn = 0, snl = 0, cnt = 0;
  for (const auto& p : pts) {
    if (!std::isfinite(p.log_abs)) continue;
    double n = static_cast<double>(p.n);
    sn += n;
    sl += p.log_abs;
    snn += n * n;
    snl += n * p.log_abs;
    cnt += 1;
  }
  if (cnt >= 2) {
    double den = cnt * snn - sn * sn;
    r.rate = den != 0 ? (cnt * snl - sn * sl) / den : 0.0;
    r.intercept = (sl - r.rate * sn) / cnt;
  }
  const double dip = std::log(4.0);
  for (const auto& p : pts) {
    double fit = r.intercept + r.rate * static_cast<double>(p.n);
    if (!(p.log_abs >= fit - dip)) r.outliers.push_back(p.n);
  }
  // lower envelope: suffix minimum
  std::vector<double> env(pts.size());
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = pts.size(); i-- > 0;) {
    m = std::min(m, pts[i].log_abs);
    env[i] = m;
  }
  {
    double a = 0, b = 0, c = 0, d = 0, k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!std::isfinite(env[i])) continue;
      double n = static_cast<double>(pts[i].n);
      a += n;
      b += env[i];
      c += n * n;
      d += n * env[i];
      k += 1;
    }
    double den = k * c - a * a;
    r.envelope_rate = k >= 2 && den != 0 ? (k * d - a * b) / den : 0.0;
  }
  const std::size_t q = pts.size() / 4;
  double first_max = -std::numeric_limits<double>::infinity(), all_max = first_max;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i < q) first_max = std::max(first_max, pts[i].log_abs);
    all_max = std::max(all_max, pts[i].log_abs);
  }
  if (all_max <= first_max + std::log(2.0)) {
    r.verdict = EscapeKind::Bounded;
  } else if (r.outliers.empty() && env[pts.size() - q] > env[q] + std::log(2.0) && r.envelope_rate > 0) {
    r.verdict = EscapeKind::Escaping;
  } else {
    r.verdict = EscapeKind::Mixed;
  }
  return r;
}

GapReport return_times(const std::vector<Sample>& pts, double C) {
  if (!(C > 0)) throw InvalidInput("return threshold must be positive");
  GapReport g;
  g.C = C;
  if (pts.empty()) return g;
  g.first = pts.front().n;
  g.last = pts.back().n;
  const double lc = std::log(C);
  for (const auto& p : pts) {
    if (p.log_abs <= lc) g.A.push_back(p.n);
  }
  long prev = g.first - 1;
  long mid = g.first + (g.last - g.first) / 2;
  long first_half = 0, second_half = 0;
  for (long a : g.A) {
    long gap = a - prev;
    g.max_gap = std::max(g.max_gap, gap);
    if (prev >= g.first) g.interior_max_gap = std::max(g.interior_max_gap, gap);
    (a <= mid ? first_half : second_half) = std::max(a <= mid ? first_half : second_half, gap);
    prev = a;
  }
  long tail = g.last + 1 - prev;
  g.max_gap = std::max(g.max_gap, tail);
  second_half = std::max(second_half, tail);
  g.gaps_bounded = !g.A.empty() && second_half <= 2 * std::max(first_half, 1L) &&
                   tail <= 2 * std::max(g.interior_max_gap, 1L);
  g.syndetic_bound = g.max_gap;
  return g;
}

LineReport line_confinement(const std::vector<Sample>& pts, int L_max, double tol) {
  if (L_max < 1 || !(tol > 0)) throw InvalidInput("line confinement needs L_max >= 1 and tol > 0");
  if (static_cast<long>(pts.size()) < 2L * L_max) throw InvalidInput("prefix shorter than 2 L_max");
  LineReport r;
  std::vector<double> phi;
  for (const auto& p : pts) {
    if (p.z == cplx(0, 0) || p.log_abs == -std::numeric_limits<double>::infinity()) {
      ++r.zeros;
      continue;
    }
    if (!std::isfinite(p.z.real()) || !std::isfinite(p.z.imag())) continue;
    double a = std::atan2(p.z.imag(), p.z.real());
    a = std::fmod(a + 2 * M_PI, M_PI);
    phi.push_back(a);
  }
  if (phi.empty()) {
    r.confined = true;
    return r;
  }
  std::sort(phi.begin(), phi.end());
  // cut the circle of directions at its largest gap, then cover greedily by arcs of width 2 tol
  std::size_t cut = 0;
  double big = -1;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    double nx = i + 1 < phi.size() ? phi[i + 1] : phi[0] + M_PI;
    if (nx - phi[i] > big) {
      big = nx - phi[i];
      cut = (i + 1) % phi.size();
    }
  }
  std::vector<double> line;
  for (std::size_t k = 0; k < phi.size(); ++k) {
    std::size_t i = (cut + k) % phi.size();
    line.push_back(phi[i] + (i < cut ? M_PI : 0.0));
  }
  std::size_t i = 0;
  while (i < line.size()) {
    double start = line[i];
    std::size_t j = i;
    while (j < line.size() && line[j] - start <= 2 * tol) ++j;
    r.lines.push_back(std::fmod(start + (line[j - 1] - start) / 2, M_PI));
    i = j;
  }
  r.confined = static_cast<int>(r.lines.size()) <= L_max;
  return r;
}

std::vector<RScanRow> r_scan(const Angle& z, const Angle& w, const std::vector<double>& r_grid, long N, double rho,
                             double eps) {
  if (r_grid.empty()) throw InvalidInput("empty r grid");
  if (N < 0) throw InvalidInput("N must be non-negative");
  // z^n + w^n once, shared by every row
  std::vector<cplx> s(static_cast<std::size_t>(N + 1));
  for (long n = 0; n <= N; ++n) {
    cplx a = unimodular_pow(z, Index(n), 1e-15).center();
    cplx b = unimodular_pow(w, Index(n), 1e-15).center();
    s[static_cast<std::size_t>(n)] = a + b;
  }
  std::vector<std::future<RScanRow>> jobs;
  for (double r : r_grid) {
    if (!(r > 0)) throw InvalidInput("r must be positive");
    jobs.push_back(std::async(std::launch::async, [&, r] {
      std::vector<cplx> pts;
      for (long n = 0; n <= N; ++n) pts.push_back(std::pow(r, static_cast<double>(n)) * s[static_cast<std::size_t>(n)]);
      RScanRow row;
      row.r = r;
      row.cov = coverage(samples_of(pts), rho, eps);
      return row;
    }));
  }
  std::vector<RScanRow> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

std::string orbit_csv(const OrbitSeries& s) {
  std::ostringstream o;
  o << "n,re,im,rad,log_abs\n";
  for (const auto& p : s.entries) {
    double la = std::numeric_limits<double>::quiet_NaN();
    if (p.scaled) {
      const ScaledReal& m = p.scaled->mag;
      if (m.is_zero()) {
        la = -std::numeric_limits<double>::infinity();
      } else if (m.expo.is_literal()) {
        la = m.log_base() * std::log(static_cast<double>(m.base)) + std::log(std::abs(p.scaled->phase.center()));
      } else {
        la = m.expo.sign() > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      }
      // outside double range only the logarithm is printed
      o << p.n.str() << ",,,," << num(la) << '\n';
      continue;
    }
    cplx c = p.value.center();
    la = std::log(std::abs(c));
    o << p.n.str() << ',' << num(c.real()) << ',' << num(c.imag()) << ',' << num(p.value.rad, 6) << ',' << num(la) << '\n';
  }
  return o.str();
}

std::string coverage_csv(const std::vector<long>& lens, const std::vector<double>& fractions) {
  std::ostringstream o;
  o << "prefix,hit_fraction\n";
  for (std::size_t i = 0; i < lens.size() && i < fractions.size(); ++i) o << lens[i] << ',' << num(fractions[i], 10) << '\n';
  return o.str();
}

std::string r_scan_csv(const std::vector<RScanRow>& rows) {
  std::ostringstream o;
  o << "r,cells,hit,hit_fraction\n";
  for (const auto& r : rows) o << num(r.r, 10) << ',' << r.cov.cells << ',' << r.cov.hit << ',' << num(r.cov.hit_fraction, 10) << '\n';
  return o.str();
}

std::string gaps_csv(const GapReport& g) {
  std::ostringstream o;
  o << "n,gap\n";
  long prev = g.first - 1;
  for (long a : g.A) {
    o << a << ',' << a - prev << '\n';
    prev = a;
  }
  return o.str();
}

std::string scatter_svg(const std::vector<Sample>& pts, double rho, double eps, int size) {
  if (!(rho > 0) || !(eps > 0) || size < 16) throw InvalidInput("bad scatter geometry");
  auto X = [&](double x) { return (x + rho) / (2 * rho) * size; };
  auto Y = [&](double y) { return (rho - y) / (2 * rho) * size; };
  char buf[160];
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
    << size << ' ' << size << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  int lines = static_cast<int>(std::ceil(2 * rho / eps));
  if (lines <= 200) {
    o << "<g stroke=\"#e4e4e4\" stroke-width=\"0.5\">\n";
    for (int i = 0; i <= lines; ++i) {
      double v = -rho + i * eps;
      std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"0\" x2=\"%.2f\" y2=\"%d\"/>\n", X(v), X(v), size);
      o << buf;
      std::snprintf(buf, sizeof buf, "<line x1=\"0\" y1=\"%.2f\" x2=\"%d\" y2=\"%.2f\"/>\n", Y(v), size, Y(v));
      o << buf;
    }
    o << "</g>\n";
  }
  std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" fill=\"none\" stroke=\"#444\"/>\n", X(0), Y(0),
                size / 2.0);
  o << buf;
  o << "<g fill=\"#c0392b\">\n";
  for (const auto& p : pts) {
    if (!std::isfinite(p.z.real()) || !std::isfinite(p.z.imag())) continue;
    if (std::fabs(p.z.real()) > rho || std::fabs(p.z.imag()) > rho) continue;
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"1.5\"/>\n", X(p.z.real()), Y(p.z.imag()));
    o << buf;
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

}  // namespace numcyc
