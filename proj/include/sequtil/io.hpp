#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sequtil/cmp.hpp"
#include "sequtil/ordinal.hpp"
#include "sequtil/planning.hpp"
#include "sequtil/policy.hpp"
#include "sequtil/report.hpp"
#include "sequtil/returns.hpp"

namespace sequtil::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Parse or schema failure, located by source path and JSON location.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string source, std::string location, const std::string& problem);

  std::string source;
  std::string location;
};

Json read_json_file(const std::string& path);
/// Two-space indented dump followed by a newline.
void write_json(std::ostream& out, const Json& doc);

// Documents may wrap their payload as {"spec": ...}; readers unwrap it.

Cmp cmp_from_json(const Json& doc, const std::string& source);
Json to_json(const Cmp& cmp);

/// AR-MDP document: a CMP document plus `rewards` and optional `multipliers`
/// arrays of {from, action, to, value}. Absent multipliers mean m ≡ 1.
Armdp armdp_from_json(const Json& doc, const std::string& source);
Json to_json(const Armdp& model);
/// Same layout from loose parts; used for extraction output that may not be a valid Armdp.
Json armdp_document(const Cmp& cmp, const RewardSpec& rewards, const MultiplierSpec* multipliers);

Transition transition_from_json(const Json& j, const Cmp& cmp, const std::string& location,
                                const std::string& source);
Json to_json(const Cmp& cmp, const Transition& t);

/// {start, steps: [{action, to}, ...]}; every step must be a transition of cmp.
Trajectory trajectory_from_json(const Json& j, const Cmp& cmp, const std::string& location,
                                const std::string& source);
Json to_json(const Cmp& cmp, const Trajectory& tau);

/// {horizon, entries: [{start, steps, utility}]}; empty-trajectory entries must be 0.
UtilityTable table_from_json(const Json& doc, const Cmp& cmp, const std::string& source);
Json to_json(const Cmp& cmp, const UtilityTable& table);

/// {root, potential: {state: value}}.
Potential potential_from_json(const Json& doc, const Cmp& cmp, const std::string& source);
Json to_json(const Cmp& cmp, const Potential& phi);

/// {policy: {state: action | {action: probability}}}; omitted states are dead ends.
MemorylessPolicy policy_from_json(const Json& doc, const Cmp& cmp, const std::string& source);

/// Top-level array (or {comparisons: [...]}) of {left, relation: ">" | "~", right}.
std::vector<Comparison> comparisons_from_json(const Json& doc, const Cmp& cmp,
                                              const std::string& source);

Json to_json(const Cmp& cmp, const ConsistencyReport& report);
Json to_json(const Cmp& cmp, const ValidationReport& report);
Json to_json(const Cmp& cmp, const Solution& solution, double tolerance);
Json values_to_json(const Cmp& cmp, const ValueFunction& v);

}  // namespace sequtil::io
