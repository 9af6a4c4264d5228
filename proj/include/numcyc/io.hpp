#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "numcyc/classify.hpp"
#include "numcyc/diagnostics.hpp"
#include "numcyc/funny.hpp"
#include "numcyc/operators.hpp"
#include "numcyc/witness.hpp"

namespace numcyc {

using json = nlohmann::json;

constexpr int kSchemaVersion = 1;

// Ladders used by lacunary angles of one document, numbered by first use.
class LadderTable {
 public:
  int index_of(const std::shared_ptr<const Ladder>& l);
  std::shared_ptr<const Ladder> at(int i) const;
  bool empty() const { return ladders_.empty(); }
  json to_json() const;
  static LadderTable from_json(const json& j);

 private:
  std::vector<std::shared_ptr<const Ladder>> ladders_;
};

json angle_to_json(const Angle& a, LadderTable& lt);
Angle angle_from_json(const json& j, const LadderTable& lt);

// Operator documents carry schema_version; unknown fields are rejected with InvalidInput.
json spec_to_json(const OperatorSpec& T);
OperatorSpec spec_from_json(const json& j);
// Structural equality, exact on every stored number.
bool same_spec(const OperatorSpec& a, const OperatorSpec& b);

struct NamedSpec {
  std::string name;
  OperatorSpec spec;
};

json ops_to_json(const std::vector<NamedSpec>& ops);
// Accepts a single operator document or {"schema_version", "operators": [{"name", "operator"}]}.
std::vector<NamedSpec> ops_from_json(const json& j);

json pair_to_json(const DualPair& p);
DualPair pair_from_json(const json& j);

json verdict_to_json(const Verdict& v, bool closure = false);
json classification_to_json(const Classification& c);
json steering_to_json(const SteeringResult& s, const std::vector<double>& residuals);
json funny_to_json(const FunnyArtifacts& a);
json ddiaa_to_json(const DdiaaState& s, const std::vector<ComplexInterval>& replayed);
json penta_to_json(const PentaCalibration& c);

json complex_to_json(cplx z);
cplx complex_from_json(const json& j);

// Writes to a sibling temporary and renames over path.
void write_atomic(const std::string& path, const std::string& content);
json read_json_file(const std::string& path);

}  // namespace numcyc
