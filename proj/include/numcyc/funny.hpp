#pragma once

#include <optional>
#include <string>
#include <vector>

#include "numcyc/angle.hpp"
#include "numcyc/operators.hpp"

namespace numcyc {

// An exact Gaussian rational a + bi.
struct QComplex {
  Rat re = 0;
  Rat im = 0;
  cplx approx() const { return {re.get_d(), im.get_d()}; }
  Rat norm2() const { return re * re + im * im; }
  Real abs(long prec) const;
};

// Target sequence k -> w_k (k >= 1).
//  constant: w_k = value
//  spiral: Gaussian rationals on refining grids, walked ring by ring, then
//          radially rescaled by an integer factor into 1/k <= |w_k| <= k
//  spiral_right / spiral_left: the spiral restricted to Re > 0 / Re < 0
//  list: explicit values (targets), falling back to the spiral past the end
struct WSequence {
  std::string kind = "constant";
  QComplex value{1, 0};
  std::vector<QComplex> values;
  QComplex at(int k) const;
  std::string describe() const;
};

// The k-th point of the raw spiral (k >= 1), before band clamping.
QComplex spiral_point(long k, int half_plane = 0);
// Integer rescaling of w into the band 1/k <= |w| <= k.
QComplex clamp_to_band(const QComplex& w, int k);

struct FunnyParams {
  int p = 3;
  WSequence w;
  int K = 4;
  long q_cap = 10000000;  // largest p^k for the q_k search
  PrecisionPolicy policy;
};

struct FunnyArtifacts {
  FunnyParams params;
  std::shared_ptr<const Ladder> ladder;
  std::vector<int> atom;           // atom[k] names nu_k, k = 1..K+2
  std::vector<Exponent> e;         // e[k], k = 1..K+2
  std::vector<Int> m;              // m[k], k = 1..K+1
  std::vector<QComplex> w;         // w[k], k = 1..K+1
  std::vector<Int> q;              // q[k], k = 1..K
  // N_k = sum_{s<=k} m_s nu_k / nu_s, held literally when nu_k is materialized
  std::vector<std::optional<Int>> N;
  std::vector<int> N_mod2;
  std::vector<Int> N_modp;
  Angle tau;    // z = e^{i pi tau}, K+1 terms
  Angle theta;  // u = e^{i pi theta}, i.e. twice the usual theta, K terms

  Index nu(int k) const { return Index::atom(ladder, atom[static_cast<std::size_t>(k)]); }
  // 1 + z^n and u^n, passing through to exact_arith
  ScaledComplex one_plus_z(const Index& n, double tol) const;
  ComplexInterval u_pow(const Index& n, double tol) const;
};

FunnyArtifacts build(const FunnyParams& params);

// Smallest m > x (x given as an enclosure) with 2 | m and p not dividing m.
Int next_admissible(const Real& lo, const Real& hi, int p);

struct LinukReport {
  int k = 0;
  Real delta{128};       // p^{nu_k} |1 + z^{nu_k}| - |w_k|
  double delta_err = 0;  // absolute
  Real leading{128};     // pi m_{k+1} / p^k
  double tail = 0;       // |p^{nu_k}|1+z^{nu_k}| - leading| <= tail (analytic)
  double bound = 0;      // 4 pi p^{-k} + tail
  bool ok = false;       // |delta| <= bound, certified
};

LinukReport verify_linuk(const FunnyArtifacts& art, int k, double tol = 1e-20);

struct Linuk11Report {
  int k = 0;
  ComplexInterval value;  // u^{nu_k} p^{nu_k} (1 + z^{nu_k}) - w_k
  double bound = 0;
  bool ok = false;
};

// With use_root set, u^{nu_k} is replaced by exp(2 pi i q_k / p^k).
Linuk11Report verify_linuk11(const FunnyArtifacts& art, int k, double tol = 1e-20, bool use_root = false);

struct LinnukReport {
  long N = 0;
  long checked = 0;
  long excluded_nu = 0;
  long in_lambda = 0;
  std::vector<long> violations;         // outside {nu_k} u Lambda with |1+z^n| < 1/(2n^2)
  std::vector<long> lambda_violations;  // in Lambda, n >= n0, with |1+z^n|^{1/n} < p^{-1/3}(1 - tol)
  double min_ratio = 0;                 // min over checked n of |1+z^n| * 2 n^2
  long argmin = 0;
  double lambda_min_root = 0;           // min |1+z^n|^{1/n} over Lambda, n >= n0
};

// n in Lambda = {nu_k m : m odd, m < sqrt(nu_{k+1} / nu_k)}.
bool in_lambda(const FunnyArtifacts& art, long n);
bool is_nu(const FunnyArtifacts& art, long n);
LinnukReport scan_linnuk(const FunnyArtifacts& art, long N, long n0 = 1, double tol = 1e-9);

// q_k by brute force over all q < p^k, for cross-checking build().
Int brute_force_q(const FunnyArtifacts& art, int k);

struct FunnyOperator {
  ExactDiagonal T;
  DualPair x0;
  std::vector<FunnyArtifacts> art;  // one per prime
  std::vector<int> target_index;    // make_pno: k at which target j returns
};

// diag(p u, p u z) with x0 = (1/sqrt2, 1/sqrt2)
FunnyOperator make_aq1(const FunnyParams& params);
// diag(p u, p u z, q u', q u' z'); pairs x = (1/sqrt2, 1/sqrt2, 0, 0), y = (0, 0, 1/sqrt2, 1/sqrt2)
struct Aq2Operator {
  ExactDiagonal T;
  DualPair x;
  DualPair y;
  FunnyArtifacts art_p;
  FunnyArtifacts art_q;
};
Aq2Operator make_aq2(int p = 7, int q = 3, int K = 2, const WSequence& w = WSequence{"spiral_right", {1, 0}, {}},
                     const WSequence& w2 = WSequence{"spiral_left", {1, 0}, {}});
// Same operator shape as aq1, with the target list feeding w (each target is doubled,
// since the returns land near w_k / 2).
FunnyOperator make_pno(const std::vector<QComplex>& targets, int p = 3);

bool is_prime(long n);

}  // namespace numcyc
