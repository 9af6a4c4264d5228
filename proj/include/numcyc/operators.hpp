#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "numcyc/angle.hpp"
#include "numcyc/interval.hpp"

namespace numcyc {

using cplx = std::complex<double>;

// radius * e^{i pi angle}; radius 0 is the zero entry.
struct ExactEntry {
  Rat radius = 0;
  Angle angle;
  // When set, angle equals the angle of entry rel_to plus rel_delta exactly. Lets
  // 1 + e^{i pi n delta} be evaluated without the tails of both angles adding up.
  int rel_to = -1;
  Angle rel_delta;

  ExactEntry() = default;
  ExactEntry(Rat r, Angle a) : radius(std::move(r)), angle(std::move(a)) {}
  cplx approx() const;
};

struct DenseMatrix {
  int n = 0;
  std::vector<cplx> a;  // row major
  std::optional<std::vector<ExactEntry>> exact;  // high-precision shadow

  cplx at(int i, int j) const { return a[static_cast<std::size_t>(i * n + j)]; }
  static DenseMatrix from_rows(const std::vector<std::vector<cplx>>& rows);
  static DenseMatrix from_exact(int n, const std::vector<ExactEntry>& entries);
  static DenseMatrix identity(int n);
  double frobenius() const;
  bool upper_triangular() const;
};

struct ExactDiagonal {
  std::vector<ExactEntry> entries;
  DenseMatrix to_dense() const;
};

enum class ShiftKind { Forward, Backward, Bilateral };

// Weights w_k for k >= 1 (all k for bilateral), described by a closed form so
// that specs can be serialized.
struct WeightSpec {
  std::string type = "constant";  // constant | harmonic | list
  cplx value = 1.0;               // constant value, or the list tail
  double a = 1.0, b = 0.0;        // harmonic: a + b / k
  std::vector<cplx> values;       // list: w_1 .. w_L, then value
  cplx operator()(long k) const;
  double bound() const;
};

struct WeightedShift {
  ShiftKind kind = ShiftKind::Backward;
  WeightSpec weights;
  double bound = 1.0;
  cplx weight(long k) const { return weights(k); }
};

using OperatorSpec = std::variant<DenseMatrix, ExactDiagonal, WeightedShift>;

int dimension(const OperatorSpec& T);  // -1 for shifts
void validate(const OperatorSpec& T);

// x and f with f(x) = sum f_j x_j. For diagonal/shift bases the coefficients are
// indexed by basis vectors; c holds the products e*_j(x) f(e_j) when exact.
struct DualPair {
  std::vector<cplx> x;
  std::vector<cplx> f;
  double norm_x = 0.0;
  double norm_f = 0.0;
  bool pi_certified = false;
  bool approximate = false;
  std::optional<std::vector<Rat>> c_exact;
  long shift_offset = 0;  // index of x[0] for shifts; shift bases start at e_0

  std::vector<cplx> products() const;  // e*_j(x) f(e_j)
  cplx apply(const std::vector<cplx>& v) const;
};

DualPair hilbert_pair(const std::vector<cplx>& x, double tol = 1e-12);
// Euclidean pair from weights c_j, exact when c is rational.
DualPair pair_from_weights(const std::vector<Rat>& c);
DualPair pair_from_weights(const std::vector<double>& c);
// Pair with e*_j(x) f(e_j) = c_j for the basis given by the columns of V (general,
// non-orthogonal). Runs the log-concave ascent; flagged approximate.
DualPair pair_from_weights_basis(const std::vector<double>& c, const DenseMatrix& V, double tol = 1e-10,
                                 int max_iter = 20000);

struct OrbitPoint {
  Index n;
  ComplexInterval value;
  std::optional<ScaledComplex> scaled;  // set when value leaves double range
};

struct OrbitSeries {
  std::vector<OrbitPoint> entries;
  std::string mode;  // float | exact
};

struct OrbitOptions {
  double tol = 1e-10;
  PrecisionPolicy policy;
  bool force_exact = false;
};

OrbitSeries orbit(const OperatorSpec& T, const DualPair& pair, const std::vector<Index>& indices,
                  const OrbitOptions& opt = OrbitOptions());
OrbitSeries orbit_range(const OperatorSpec& T, const DualPair& pair, long first, long last,
                        const OrbitOptions& opt = OrbitOptions());
// Single exact-diagonal value, possibly far outside floating range.
ScaledComplex diagonal_value(const ExactDiagonal& D, const std::vector<Rat>& c, const Index& n, double tol,
                             const PrecisionPolicy& pol = PrecisionPolicy());

struct NormInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool truncated = false;
  long argmax = 0;
};

NormInterval shift_norm(const WeightedShift& T, long n, long window, double tol = 1e-9);

}  // namespace numcyc
