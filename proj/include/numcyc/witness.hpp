#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "numcyc/angle.hpp"
#include "numcyc/operators.hpp"

namespace numcyc {

struct Target {
  cplx y;
  double eps = 1e-6;
};

// n -> R^n. Only the plain power form is built; other forms are rejected.
struct RadiusSchedule {
  std::string form = "pow";
  long R = 2;
  void check() const;
};

// ---- torus steering: R^n (z^n + w^n) = y_j at n_j ----

struct SteeringHit {
  Index n;
  cplx target;
  double eps = 0;
  cplx value;
  double residual = 0;  // |value - target| including the enclosure radius
};

struct ScheduleEntry {
  int j = 0;
  Exponent E;                // n_j = R^{E_j}
  Int c;                     // modulus coefficient of the rho term
  Int d;                     // phase coefficient of the sigma term
  double degradation = 0.0;  // bound on how much later terms move hit j
};

// z = e^{i pi alpha}, w = e^{i pi beta}, alpha = sigma + rho, beta = sigma - rho.
// Both angles are finite lacunary sums (so rational), kept symbolically since
// their denominators are towers of R.
struct SteeringResult {
  long R = 2;
  std::shared_ptr<const Ladder> ladder;
  std::vector<int> atom;  // n_j is atom[j] of the ladder
  Angle alpha;
  Angle beta;
  Angle rel;  // beta - alpha, exactly
  std::vector<SteeringHit> hits;
  std::vector<ScheduleEntry> schedule_log;
  int guard_bits = 0;  // B: digits kept per target
  int gap = 0;         // G: extra separation between targets

  ExactDiagonal diagonal() const;
};

struct SteerOptions {
  int gap = 2;
  long min_first_exponent = 0;   // n_1 >= R^this, e.g. to keep the angles small
  long max_first_exponent = 64;  // cap on E_1
  std::size_t max_targets = 256;
};

SteeringResult torus_steer(const RadiusSchedule& R, const std::string& pattern, const std::vector<Target>& targets,
                           const SteerOptions& opt = SteerOptions());
// Re-evaluates every hit from the stored angles; returns residuals in order.
std::vector<double> replay(const SteeringResult& s, double tol = 1e-20);
// 5x4 grid of targets in the disk of radius 5 (the acceptance grid).
std::vector<Target> grid_targets(int cols, int rows, double radius, double eps);

// ---- pentagon solver ----

struct PentaCalibration {
  double epsilon = 0;
  double d = 0;
  double det_center = 0;
  double det_rad = 0;  // |det S - det_center| <= det_rad
  long samples = 0;
  std::uint64_t seed = 0;
};

using Penta10 = std::array<cplx, 10>;

// u(alpha, beta) = (alpha xi, .., alpha xi^4, alpha, beta xi^2, beta xi^4, beta xi, beta xi^3, beta)
Penta10 perfect_pentagon(cplx alpha, cplx beta);
bool in_pentagon_region(const Penta10& u, double eps);
// Determinant of the 4x4 real matrix of the perfect pentagon, certified in MPFR.
void penta_det(double& center, double& rad);
PentaCalibration penta_calibrate(long samples, std::uint64_t seed = 1);
std::array<double, 5> penta_solve(const Penta10& u, cplx z, cplx w, const PentaCalibration& cal);
// Random point of the calibrated region: u perturbed within eps, |z|, |w| < d * shrink.
void penta_sample(std::uint64_t& state, double eps, double d, Penta10& u, cplx& z, cplx& w);

// ---- configuration search ----

// A countable subset of the circle, enumerated lazily by index.
struct AngleSet {
  std::function<Angle(long)> element;
  std::string description;
  bool declared_accumulation = false;  // the caller vouches for an accumulation point

  static AngleSet multiples(const Angle& theta);  // {j theta : j >= 0}
  static AngleSet rationals();                   // every rational in [0, 2), by height
};

struct IndexFilter {
  long modulus = 1;
  long residue = 0;
  std::vector<long> list;  // when non-empty, membership is explicit
  bool contains(long n) const;
};

struct SicoResult {
  long n = 0;
  long m = 0;
  long z = 0;               // index into M
  std::vector<long> zj;     // indices into M
  double residual_n = 0.0;  // max_j |z^{-n} z_j^n - u_j|
  double residual_m = 0.0;  // max_j |z^{-m} z_j^m - u_j^2|
  bool heuristic_accumulation = false;
};

struct SicoOptions {
  long pool = 64;        // elements of M enumerated
  long centers = 8;      // candidates tried for z
  long n_cap = 200000;   // largest n scanned
  long m_window = 20000;
};

SicoResult sico_search(const AngleSet& M, const IndexFilter& A, const std::vector<cplx>& u, double eps, long n0,
                       const SicoOptions& opt = SicoOptions());

// ---- l1-weight greedy ----

struct DdiaaCertificate {
  Int n;
  Int m;            // zero-sum exponent set after this step
  cplx y;
  double delta = 0;
  double residual = 0;     // at creation, from the state of that moment
  double omega_added = 0;  // sum of omega over the new weights
};

// Weights on M = e^{i pi Q}; points are added in linked pairs (z, z e^{i pi / m}) with
// equal weight, which cancel exactly at every odd multiple of m.
struct DdiaaState {
  std::string M = "exp(i pi Q)";
  std::string omega = "sqrt";
  long R = 2;
  std::vector<Rat> angle;
  std::vector<Rat> weight;
  std::vector<int> rel_to;
  std::vector<Rat> rel_delta;
  std::vector<int> step;  // which extension added the entry
  std::vector<DdiaaCertificate> certificates;
  Int last_m = 0;  // 0 before the first step
  Int last_n = 0;

  double omega_of(const Rat& a) const;
  double omega_mass() const;
  ExactDiagonal diagonal() const;
};

DdiaaCertificate ddiaa_extend(DdiaaState& state, cplx y, double delta, const RadiusSchedule& R,
                              double tol = 1e-8);
DdiaaState ddiaa_build(const std::vector<cplx>& targets, const std::vector<double>& deltas, const RadiusSchedule& R,
                       double tol = 1e-8);
// R^{n} sum_z a_z z^{n} for every certificate exponent, from the final state.
std::vector<ComplexInterval> ddiaa_replay(const DdiaaState& state);
// sum_z a_z z^{m} for the state restricted to the first k+1 steps' support
ScaledComplex ddiaa_zero_check(const DdiaaState& state, std::size_t k);

// ---- three points ----

// Solves x1 xi1 + x2 xi2 + (1 - x1 - x2) xi3 = y by Newton from x0.
std::array<double, 2> three_point_solve(const std::array<cplx, 3>& xi, cplx y, std::array<double, 2> x0,
                                        double tol = 1e-10);

// ---- arcsin law ----

struct ArcsinReport {
  long n = 1;
  double c = 0;
  long samples = 0;
  double empirical = 0;
  double expected = 0;
  double sigma = 0;  // standard error of the empirical value
  bool ok = false;   // within 3 sigma (or exact when expected is 0 or 1)
};

// Measure of {(z, w) in T^2 : |z^n + w^n| <= c} by Monte Carlo against (2/pi) asin(c/2).
ArcsinReport arcsin_mc(long n, double c, long samples, std::uint64_t seed = 1);

}  // namespace numcyc
