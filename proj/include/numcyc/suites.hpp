#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "numcyc/io.hpp"

namespace numcyc {

// One certified assertion of a suite; failures keep a short reason.
struct Check {
  std::string name;
  bool ok = false;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  bool ok = true;
  double seconds = 0.0;
  std::vector<Check> checks;
  json data = json::object();

  void add(const std::string& name, bool ok, const std::string& detail = "");
  long failures() const;
};

json to_json(const SuiteReport& r);

// log|v| enclosure of an orbit value, valid far outside double range.
void log_abs_bounds(const OrbitPoint& p, double& lo, double& hi);

SuiteReport suite_funny(const std::vector<int>& primes = {3, 5}, int K = 5);
SuiteReport suite_linuk(int p = 3, int k_max = 4);
SuiteReport suite_linuk11(int p = 3, int k_max = 4);
SuiteReport suite_linnuk(int p = 3, long N = 10000);
SuiteReport suite_aq1(int k_max = 3, long n_lo = 10, long n_hi = 2000);
SuiteReport suite_aq2(int p = 7, int q = 3, int k_max = 2, long N = 1000);
SuiteReport suite_arcsin(long samples = 1000000, std::uint64_t seed = 1);
SuiteReport suite_penta(long trials = 10000, long calibration_samples = 2000, std::uint64_t seed = 1);
SuiteReport suite_steer(long R = 2, double eps = 1e-6);
SuiteReport suite_ddiaa(int targets = 10, double tol = 1e-8, std::uint64_t seed = 4);

// Named example operators (Remark examples and the classifier battery).
std::vector<std::string> example_names();
OperatorSpec named_example(const std::string& name);

// Classifies every battery operator; data holds one verdict object per name.
SuiteReport suite_battery(const ClassifyConfig& cfg = ClassifyConfig());
// Compares battery output against a golden document: every field the golden
// names must match exactly.
SuiteReport compare_golden(const json& produced, const json& golden);

// Random specs: SNH => NH => WNH, verdicts stable under perturbations below the
// tie tolerance, and WNH consistent with closure membership.
SuiteReport suite_consistency(long count = 1000, std::uint64_t seed = 7, const ClassifyConfig& cfg = ClassifyConfig());
OperatorSpec random_spec(std::uint64_t& state);

}  // namespace numcyc
