#pragma once

#include <string>
#include <utility>
#include <vector>

#include "numcyc/angle.hpp"
#include "numcyc/operators.hpp"

namespace numcyc {

// A point of an orbit prefix reduced to what the diagnostics need.
struct Sample {
  long n = 0;
  cplx z;                // midpoint, meaningful when finite
  double log_abs = 0.0;  // natural log of |z|, also for values beyond double range
  double rad = 0.0;
};

std::vector<Sample> samples_of(const OrbitSeries& s);
std::vector<Sample> samples_of(const std::vector<cplx>& z, long first_n = 0);

struct CoverageReport {
  double rho = 4.0;
  double eps = 0.25;
  long cells = 0;  // cells of the eps grid whose center lies in the closed disk of radius rho
  long hit = 0;
  double hit_fraction = 0.0;
  std::vector<std::pair<int, int>> uncovered;  // grid indices, first few only
  long prefix = 0;
};

// Points count by their midpoint: a point hits the grid cell that contains it.
CoverageReport coverage(const std::vector<Sample>& pts, double rho = 4.0, double eps = 0.25,
                        std::size_t uncovered_cap = 64);
// hit_fraction for each prefix length in lens (nondecreasing in the length).
std::vector<double> coverage_curve(const std::vector<Sample>& pts, const std::vector<long>& lens, double rho = 4.0,
                                   double eps = 0.25);

enum class EscapeKind { Escaping, Bounded, Mixed };
const char* to_string(EscapeKind k);

struct EscapeReport {
  EscapeKind verdict = EscapeKind::Mixed;
  double rate = 0.0;       // least squares slope of log|z_n| in n
  double intercept = 0.0;
  double envelope_rate = 0.0;  // slope of the suffix minimum of log|z_n|
  std::vector<long> outliers;  // n with log|z_n| far below the fit
};

EscapeReport escape_profile(const std::vector<Sample>& pts);

struct GapReport {
  double C = 0.0;
  long first = 0, last = 0;  // scanned range
  std::vector<long> A;       // n with |z_n| <= C
  long max_gap = 0;          // counting the range ends as returns
  long interior_max_gap = 0; // between elements of A only
  bool gaps_bounded = false; // max gap of the second half no larger than twice that of the first
  long syndetic_bound = 0;
};

GapReport return_times(const std::vector<Sample>& pts, double C);

struct LineReport {
  bool confined = false;
  std::vector<double> lines;  // directions in [0, pi)
  long zeros = 0;             // points at the origin lie on every line
};

LineReport line_confinement(const std::vector<Sample>& pts, int L_max, double tol);

struct RScanRow {
  double r = 0.0;
  CoverageReport cov;
};

// Orbit r^n (z^n + w^n), n = 0..N, for each r of the grid.
std::vector<RScanRow> r_scan(const Angle& z, const Angle& w, const std::vector<double>& r_grid, long N, double rho = 4.0,
                             double eps = 0.25);

// ---- tables and pictures ----

std::string orbit_csv(const OrbitSeries& s);  // n,re,im,rad
std::string coverage_csv(const std::vector<long>& lens, const std::vector<double>& fractions);
std::string r_scan_csv(const std::vector<RScanRow>& rows);
std::string gaps_csv(const GapReport& g);
// Scatter of the points inside the square [-rho, rho]^2 with the disk and eps grid drawn.
std::string scatter_svg(const std::vector<Sample>& pts, double rho = 4.0, double eps = 0.25, int size = 600);

}  // namespace numcyc
