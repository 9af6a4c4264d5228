#pragma once

#include <optional>
#include <string>
#include <vector>

#include "numcyc/angle.hpp"
#include "numcyc/operators.hpp"
#include "numcyc/witness.hpp"

namespace numcyc {

// ---- independence of unimodular numbers e^{i pi theta_j} ----

enum class IndepStatus { Dependent, Independent, LikelyIndependent, Unknown };

struct IndependenceVerdict {
  IndepStatus status = IndepStatus::Unknown;
  std::vector<Int> relation;  // z_1^{m_1} .. z_k^{m_k} = 1 when Dependent
  long H = 0;                 // height searched (LikelyIndependent)
  std::string reason;
};

const char* to_string(IndepStatus s);

// Exact when every angle is rational or symbolic; otherwise an integer relation
// search on (1, theta_1, .., theta_k) by lattice reduction.
IndependenceVerdict independence(const std::vector<Angle>& angles, long H = 1000000);
// theta == 0 mod 2; nullopt when that cannot be decided from the data.
std::optional<bool> angle_zero_mod2(const Angle& theta);

// Integer relation search on x (x[0] is usually 1): short m with |sum m_i x_i| small.
// Exact LLL on the scaled lattice; returns the reduced basis rows.
std::vector<std::vector<Int>> lll_reduce(std::vector<std::vector<Int>> basis);

// ---- verdicts ----

enum class Tri { Yes, No, Unknown };
const char* to_string(Tri t);

struct Verdict {
  Tri value = Tri::Unknown;
  std::string rule;    // theorem label the verdict rests on
  std::string detail;  // parameters of the certificate
};

struct ClassifyConfig {
  long H = 1000000;         // relation height
  double tie = 1e-9;        // moduli closer than this but not equal are ties
  double eig_tol = 1e-10;   // eigen residual tolerance, relative to ||T||
  long shift_horizon = 4096;
};

// ---- spectral data ----

enum class ModCmp { Less, Equal, Greater, Unknown };

struct SpectralPoint {
  cplx value;
  double err = 0.0;               // |true eigenvalue - value| <= err
  std::optional<Rat> radius2;     // |lambda|^2 exactly
  double radius = 0.0;
  double radius_err = 0.0;
  Angle angle;                    // arg / pi
  bool angle_exact = false;       // angle is the true one, not a decimal stand-in
  int multiplicity = 1;           // algebraic
  std::optional<int> geometric;
  std::optional<bool> defective;  // ker (T - l)^2 != ker (T - l)
  bool separated = true;          // certified distinct from every other point
};

struct GramEntry {
  int i = 0, j = 0;
  double cos = 0.0;  // largest cosine between the two eigenspaces
  double err = 0.0;
  bool exact = false;
};

struct SpectralData {
  int dim = 0;
  std::string source;  // diagonal | triangular | eigensolve
  std::vector<SpectralPoint> points;  // distinct eigenvalues
  std::optional<bool> normal;
  std::vector<GramEntry> gram;
  double residual = 0.0;  // largest certified eigen residual
  double tie = 1e-9;

  ModCmp cmp_moduli(int i, int j) const;
  ModCmp cmp_one(int i) const;
  // eigenspaces of points i and j non-orthogonal
  std::optional<bool> non_orthogonal(int i, int j) const;
};

SpectralData spectral_data(const OperatorSpec& T, const ClassifyConfig& cfg = ClassifyConfig());

// ---- rules ----

enum class Firing { Fired, NotFired, Unknown, FiredWithFiniteCertificate };
const char* to_string(Firing f);

struct RuleResult {
  std::string rule;       // e.g. "suffwnh.1"
  std::string conclusion; // WNH | NH | SNH | not-WNH | not-NH
  Firing status = Firing::NotFired;
  std::string certificate;
};

// Every finite-dimensional sufficient condition, with the certificate used. A
// steering witness lets suffsnh.1 report a finite certificate.
std::vector<RuleResult> sufficient_conditions(const SpectralData& data, const ClassifyConfig& cfg = ClassifyConfig(),
                                              const SteeringResult* witness = nullptr);

struct C2Result {
  Verdict wnh, snh, nh;
};

C2Result classify_c2(const OperatorSpec& T, const ClassifyConfig& cfg = ClassifyConfig());
Verdict classify_c3_wnh(const OperatorSpec& T, const ClassifyConfig& cfg = ClassifyConfig());
// A weight modulus within tie of 1 but not equal to it gives UNKNOWN.
Verdict shift_classify(const WeightedShift& T, long horizon, double tie = 1e-9);
// YES: inside the norm closure of NH; NO: outside.
Verdict closure_membership(const OperatorSpec& T, const ClassifyConfig& cfg = ClassifyConfig());

struct Classification {
  Verdict wnh, nh, snh, closure;
  std::vector<RuleResult> rules;
  std::optional<SpectralData> spectrum;
};

Classification classify(const OperatorSpec& T, const ClassifyConfig& cfg = ClassifyConfig(),
                        const SteeringResult* witness = nullptr);
std::vector<Classification> classify_batch(const std::vector<OperatorSpec>& specs,
                                           const ClassifyConfig& cfg = ClassifyConfig());

// ---- perturbation into SNH along a steering certificate ----

struct SnhPerturbation {
  ExactDiagonal T;
  SteeringResult cert;
  double distance = 0.0;  // ||T' - T||, upper bound
  bool unchanged = false;
  std::vector<double> residuals;
};

// T is diag(s, t) with |s| = |t| = R, R an even integer, and the angle difference of s
// and t killed by every hit index. prior: a certificate T may already carry.
SnhPerturbation approx_snh_perturbation(const OperatorSpec& T, const std::vector<Target>& targets, double delta,
                                        const SteeringResult* prior = nullptr);

}  // namespace numcyc
