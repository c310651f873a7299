#include "sequtil/io.hpp"

#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace sequtil::io {

SchemaError::SchemaError(std::string source, std::string location, const std::string& problem)
    : std::runtime_error(source + (location.empty() ? "" : ": " + location) + ": " + problem),
      source(std::move(source)),
      location(std::move(location)) {}

namespace {

std::string at_key(const std::string& location, const std::string& key) {
  return location.empty() ? key : location + "." + key;
}

std::string at_index(const std::string& location, std::size_t i) {
  return location + "[" + std::to_string(i) + "]";
}

const Json& payload(const Json& doc, const std::string& source) {
  const Json& body = doc.is_object() && doc.contains("spec") ? doc.at("spec") : doc;
  if (body.is_object() && body.contains("schema")) {
    const Json& v = body.at("schema");
    if (!v.is_number_integer() || v.get<int>() != kSchemaVersion) {
      throw SchemaError(source, "schema", "unsupported schema version");
    }
  }
  return body;
}

const Json& field(const Json& obj, const std::string& key, const std::string& location,
                  const std::string& source) {
  if (!obj.is_object()) throw SchemaError(source, location, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(source, at_key(location, key), "missing field");
  return *it;
}

std::string string_field(const Json& obj, const std::string& key, const std::string& location,
                         const std::string& source) {
  const Json& v = field(obj, key, location, source);
  if (!v.is_string()) throw SchemaError(source, at_key(location, key), "expected a string");
  return v.get<std::string>();
}

double number(const Json& v, const std::string& location, const std::string& source) {
  if (!v.is_number()) throw SchemaError(source, location, "expected a number");
  return v.get<double>();
}

double number_field(const Json& obj, const std::string& key, const std::string& location,
                    const std::string& source) {
  return number(field(obj, key, location, source), at_key(location, key), source);
}

const Json& array_field(const Json& obj, const std::string& key, const std::string& location,
                        const std::string& source) {
  const Json& v = field(obj, key, location, source);
  if (!v.is_array()) throw SchemaError(source, at_key(location, key), "expected an array");
  return v;
}

StateIndex state_named(const Cmp& cmp, const std::string& name, const std::string& location,
                       const std::string& source) {
  if (auto s = cmp.find_state(name)) return *s;
  throw SchemaError(source, location, "unknown state '" + name + "'");
}

ActionIndex action_named(const Cmp& cmp, const std::string& name, const std::string& location,
                         const std::string& source) {
  if (auto a = cmp.find_action(name)) return *a;
  throw SchemaError(source, location, "unknown action '" + name + "'");
}

std::vector<std::string> names(const Json& arr, const std::string& location,
                               const std::string& source) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_string()) throw SchemaError(source, at_index(location, i), "expected a string");
    auto name = arr[i].get<std::string>();
    if (!seen.insert(name).second) {
      throw SchemaError(source, at_index(location, i), "duplicate name '" + name + "'");
    }
    out.push_back(std::move(name));
  }
  return out;
}

std::map<Transition, double> keyed_values(const Json& arr, const Cmp& cmp,
                                          const std::string& location, const std::string& source) {
  std::map<Transition, double> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string loc = at_index(location, i);
    const Transition t = transition_from_json(arr[i], cmp, loc, source);
    if (!cmp.has_transition(t)) throw SchemaError(source, loc, "not a legal transition");
    if (!out.emplace(t, number_field(arr[i], "value", loc, source)).second) {
      throw SchemaError(source, loc, "duplicate transition");
    }
  }
  return out;
}

Json keyed_array(const Cmp& cmp, const std::map<Transition, double>& values) {
  Json arr = Json::array();
  for (const auto& [t, v] : values) {
    Json j = to_json(cmp, t);
    j["value"] = v;
    arr.push_back(std::move(j));
  }
  return arr;
}

Json header() {
  Json doc = Json::object();
  doc["schema"] = kSchemaVersion;
  return doc;
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path, "", "cannot open file");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path, "byte " + std::to_string(e.byte), "malformed JSON");
  }
}

void write_json(std::ostream& out, const Json& doc) { out << doc.dump(2) << '\n'; }

Cmp cmp_from_json(const Json& doc, const std::string& source) {
  const Json& body = payload(doc, source);
  Cmp cmp(names(array_field(body, "states", "", source), "states", source),
          names(array_field(body, "actions", "", source), "actions", source));
  const Json& records = array_field(body, "transitions", "", source);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string loc = at_index("transitions", i);
    const Json& rec = records[i];
    const StateIndex from = state_named(cmp, string_field(rec, "from", loc, source), at_key(loc, "from"), source);
    const ActionIndex act = action_named(cmp, string_field(rec, "action", loc, source), at_key(loc, "action"), source);
    const StateIndex to = state_named(cmp, string_field(rec, "to", loc, source), at_key(loc, "to"), source);
    const double prob = number_field(rec, "prob", loc, source);
    const double term = rec.contains("term") ? number_field(rec, "term", loc, source) : 0.0;
    try {
      cmp.add_outcome(from, act, to, prob, term);
    } catch (const std::invalid_argument& e) {
      throw SchemaError(source, loc, e.what());
    }
  }
  return cmp;
}

Json to_json(const Cmp& cmp) {
  Json doc = header();
  doc["states"] = cmp.states();
  doc["actions"] = cmp.actions();
  Json arr = Json::array();
  for (StateIndex s = 0; s < cmp.num_states(); ++s) {
    for (ActionIndex a = 0; a < cmp.num_actions(); ++a) {
      for (const auto& o : cmp.outcomes(s, a)) {
        arr.push_back({{"from", cmp.state_name(s)},
                       {"action", cmp.action_name(a)},
                       {"to", cmp.state_name(o.next)},
                       {"prob", o.probability},
                       {"term", o.termination}});
      }
    }
  }
  doc["transitions"] = std::move(arr);
  return doc;
}

Armdp armdp_from_json(const Json& doc, const std::string& source) {
  Cmp cmp = cmp_from_json(doc, source);
  const Json& body = payload(doc, source);
  RewardSpec r{keyed_values(array_field(body, "rewards", "", source), cmp, "rewards", source)};
  MultiplierSpec m;
  if (body.contains("multipliers")) {
    m.values = keyed_values(array_field(body, "multipliers", "", source), cmp, "multipliers", source);
  } else {
    m = MultiplierSpec::ones(cmp);
  }
  try {
    return Armdp(std::move(cmp), std::move(r), std::move(m));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(source, "", e.what());
  }
}

Json armdp_document(const Cmp& cmp, const RewardSpec& rewards, const MultiplierSpec* multipliers) {
  Json doc = to_json(cmp);
  doc["rewards"] = keyed_array(cmp, rewards.values);
  if (multipliers) doc["multipliers"] = keyed_array(cmp, multipliers->values);
  return doc;
}

Json to_json(const Armdp& model) {
  return armdp_document(model.cmp(), model.rewards(), &model.multipliers());
}

Transition transition_from_json(const Json& j, const Cmp& cmp, const std::string& location,
                                const std::string& source) {
  return Transition{
      state_named(cmp, string_field(j, "from", location, source), at_key(location, "from"), source),
      action_named(cmp, string_field(j, "action", location, source), at_key(location, "action"), source),
      state_named(cmp, string_field(j, "to", location, source), at_key(location, "to"), source)};
}

Json to_json(const Cmp& cmp, const Transition& t) {
  return {{"from", cmp.state_name(t.from)},
          {"action", cmp.action_name(t.action)},
          {"to", cmp.state_name(t.to)}};
}

Trajectory trajectory_from_json(const Json& j, const Cmp& cmp, const std::string& location,
                                const std::string& source) {
  const StateIndex start =
      state_named(cmp, string_field(j, "start", location, source), at_key(location, "start"), source);
  const Json& steps = j.contains("steps") ? array_field(j, "steps", location, source) : Json::array();
  Trajectory tau(start);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string loc = at_index(at_key(location, "steps"), i);
    const Transition t{
        tau.end(),
        action_named(cmp, string_field(steps[i], "action", loc, source), at_key(loc, "action"), source),
        state_named(cmp, string_field(steps[i], "to", loc, source), at_key(loc, "to"), source)};
    if (!cmp.has_transition(t)) {
      throw SchemaError(source, loc, "not a legal transition " + describe(cmp, t));
    }
    tau = tau.extended(t);
  }
  return tau;
}

Json to_json(const Cmp& cmp, const Trajectory& tau) {
  Json steps = Json::array();
  for (const auto& t : tau.steps()) {
    steps.push_back({{"action", cmp.action_name(t.action)}, {"to", cmp.state_name(t.to)}});
  }
  return {{"start", cmp.state_name(tau.start())}, {"steps", std::move(steps)}};
}

UtilityTable table_from_json(const Json& doc, const Cmp& cmp, const std::string& source) {
  const Json& body = payload(doc, source);
  const Json& h = field(body, "horizon", "", source);
  if (!h.is_number_integer() || h.get<long long>() < 0) {
    throw SchemaError(source, "horizon", "expected a nonnegative integer");
  }
  UtilityTable table(h.get<std::size_t>());
  const Json& entries = array_field(body, "entries", "", source);
  std::set<Trajectory> seen;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string loc = at_index("entries", i);
    Trajectory tau = trajectory_from_json(entries[i], cmp, loc, source);
    const double u = number_field(entries[i], "utility", loc, source);
    if (!seen.insert(tau).second) throw SchemaError(source, loc, "duplicate trajectory");
    if (tau.empty() && u != 0.0) throw SchemaError(source, loc, "empty trajectory must have utility 0");
    table.set(tau, u);
  }
  return table;
}

Json to_json(const Cmp& cmp, const UtilityTable& table) {
  Json doc = header();
  doc["horizon"] = table.horizon();
  Json arr = Json::array();
  for (const auto& [tau, u] : table.entries()) {
    Json e = to_json(cmp, tau);
    e["utility"] = u;
    arr.push_back(std::move(e));
  }
  doc["entries"] = std::move(arr);
  return doc;
}

Potential potential_from_json(const Json& doc, const Cmp& cmp, const std::string& source) {
  const Json& body = payload(doc, source);
  Potential phi;
  phi.root = state_named(cmp, string_field(body, "root", "", source), "root", source);
  phi.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cmp.num_states()));
  const Json& values = field(body, "potential", "", source);
  if (!values.is_object()) throw SchemaError(source, "potential", "expected an object");
  std::vector<bool> given(cmp.num_states(), false);
  for (auto it = values.begin(); it != values.end(); ++it) {
    const std::string loc = at_key("potential", it.key());
    const StateIndex s = state_named(cmp, it.key(), loc, source);
    phi.values(static_cast<Eigen::Index>(s)) = number(it.value(), loc, source);
    given[s] = true;
  }
  for (StateIndex s = 0; s < cmp.num_states(); ++s) {
    if (!given[s]) throw SchemaError(source, "potential", "no value for state " + cmp.state_name(s));
  }
  return phi;
}

Json to_json(const Cmp& cmp, const Potential& phi) {
  Json doc = header();
  doc["root"] = cmp.state_name(phi.root);
  Json values = Json::object();
  for (StateIndex s = 0; s < cmp.num_states(); ++s) values[cmp.state_name(s)] = phi.at(s);
  doc["potential"] = std::move(values);
  return doc;
}

MemorylessPolicy policy_from_json(const Json& doc, const Cmp& cmp, const std::string& source) {
  const Json& body = payload(doc, source);
  const Json& rows = field(body, "policy", "", source);
  if (!rows.is_object()) throw SchemaError(source, "policy", "expected an object");
  MemorylessPolicy pi;
  pi.probabilities = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cmp.num_states()),
                                           static_cast<Eigen::Index>(cmp.num_actions()));
  for (auto it = rows.begin(); it != rows.end(); ++it) {
    const std::string loc = at_key("policy", it.key());
    const auto s = static_cast<Eigen::Index>(state_named(cmp, it.key(), loc, source));
    const Json& v = it.value();
    if (v.is_null()) continue;
    if (v.is_string()) {
      pi.probabilities(s, static_cast<Eigen::Index>(action_named(cmp, v.get<std::string>(), loc, source))) = 1.0;
    } else if (v.is_object()) {
      for (auto a = v.begin(); a != v.end(); ++a) {
        const std::string aloc = at_key(loc, a.key());
        pi.probabilities(s, static_cast<Eigen::Index>(action_named(cmp, a.key(), aloc, source))) =
            number(a.value(), aloc, source);
      }
    } else {
      throw SchemaError(source, loc, "expected an action name or an action distribution");
    }
  }
  if (auto problems = validate_policy(cmp, pi); !problems.empty()) {
    throw SchemaError(source, "policy", problems.front());
  }
  return pi;
}

std::vector<Comparison> comparisons_from_json(const Json& doc, const Cmp& cmp,
                                              const std::string& source) {
  const Json& body = doc.is_array() ? doc : array_field(payload(doc, source), "comparisons", "", source);
  if (!body.is_array()) throw SchemaError(source, "", "expected an array of comparisons");
  std::vector<Comparison> out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const std::string loc = at_index(doc.is_array() ? "" : "comparisons", i);
    Comparison c;
    c.left = trajectory_from_json(field(body[i], "left", loc, source), cmp, at_key(loc, "left"), source);
    c.right = trajectory_from_json(field(body[i], "right", loc, source), cmp, at_key(loc, "right"), source);
    const std::string rel = string_field(body[i], "relation", loc, source);
    if (rel == ">") {
      c.relation = Relation::strict;
    } else if (rel == "~") {
      c.relation = Relation::indifferent;
    } else {
      throw SchemaError(source, at_key(loc, "relation"), "expected \">\" or \"~\"");
    }
    out.push_back(std::move(c));
  }
  return out;
}

Json to_json(const Cmp& cmp, const ConsistencyReport& report) {
  Json doc = header();
  doc["check"] = report.check;
  doc["status"] = std::string(to_string(report.status));
  if (!report.stage.empty()) doc["stage"] = report.stage;
  doc["horizon"] = report.horizon;
  doc["tolerance"] = report.tolerance;
  doc["scale"] = report.scale;
  Json witnesses = Json::array();
  for (const auto& w : report.witnesses) {
    Json j = Json::object();
    j["kind"] = std::string(to_string(w.kind));
    if (w.transition) j["transition"] = to_json(cmp, *w.transition);
    Json trajs = Json::array();
    for (const auto& tau : w.trajectories) trajs.push_back(to_json(cmp, tau));
    j["trajectories"] = std::move(trajs);
    j["residual"] = w.residual;
    j["value"] = w.value;
    witnesses.push_back(std::move(j));
  }
  doc["witnesses"] = std::move(witnesses);
  doc["truncated"] = report.truncated;
  Json undetermined = Json::array();
  for (const auto& t : report.undetermined) undetermined.push_back(to_json(cmp, t));
  doc["undetermined"] = std::move(undetermined);
  return doc;
}

Json to_json(const Cmp& cmp, const ValidationReport& report) {
  Json doc = header();
  doc["check"] = "validate";
  doc["status"] = report.ok() ? "consistent" : "violated";
  Json violations = Json::array();
  for (const auto& v : report.violations) {
    Json j = {{"kind", v.kind}, {"from", cmp.state_name(v.state)}, {"action", cmp.action_name(v.action)}};
    if (v.next) j["to"] = cmp.state_name(*v.next);
    j["value"] = v.value;
    violations.push_back(std::move(j));
  }
  doc["violations"] = std::move(violations);
  Json dead = Json::array();
  for (StateIndex s : report.dead_ends) dead.push_back(cmp.state_name(s));
  doc["dead_ends"] = std::move(dead);
  return doc;
}

Json values_to_json(const Cmp& cmp, const ValueFunction& v) {
  Json out = Json::object();
  for (StateIndex s = 0; s < cmp.num_states(); ++s) out[cmp.state_name(s)] = v(static_cast<Eigen::Index>(s));
  return out;
}

Json to_json(const Cmp& cmp, const Solution& solution, double tolerance) {
  Json doc = header();
  doc["values"] = values_to_json(cmp, solution.values);
  Json policy = Json::object();
  for (StateIndex s = 0; s < cmp.num_states(); ++s) {
    const auto& a = solution.actions[s];
    policy[cmp.state_name(s)] = a ? Json(cmp.action_name(*a)) : Json(nullptr);
  }
  doc["policy"] = std::move(policy);
  doc["iterations"] = solution.iterations;
  doc["beta"] = solution.beta;
  doc["certified_gap"] = solution.certified_gap;
  doc["tolerance"] = tolerance;
  doc["horizon"] = solution.horizon ? Json(*solution.horizon) : Json(nullptr);
  return doc;
}

}  // namespace sequtil::io
