#include "sequtil/cli.hpp"

#include <fstream>
#include <ostream>

#include "sequtil/io.hpp"
#include "sequtil/ordinal.hpp"
#include "sequtil/planning.hpp"
#include "sequtil/representation.hpp"

namespace sequtil::cli {

namespace {

using io::Json;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Outcome {
  Json doc;
  int code = kExitOk;
};

const std::string& require(const std::string& value, const char* flag, const std::string& command) {
  if (value.empty()) throw UsageError(command + " requires " + flag);
  return value;
}

StateIndex resolve_root(const Cmp& cmp, const RunConfig& config) {
  if (config.root.empty()) {
    if (cmp.num_states() == 0) throw UsageError("the CMP declares no states");
    return 0;
  }
  if (auto s = cmp.find_state(config.root)) return *s;
  throw UsageError("--root names unknown state '" + config.root + "'");
}

/// Folds --gamma into the termination probabilities.
Armdp load_model(const RunConfig& config) {
  Armdp model = io::armdp_from_json(
      io::read_json_file(require(config.input, "--input", config.command)), config.input);
  if (config.gamma) model = model.with_cmp(discount_to_termination(model.cmp(), *config.gamma));
  return model;
}

double tolerance_of(const RunConfig& config) {
  const double tol = config.tolerance.value_or(kResidualTolerance);
  if (!(tol > 0.0)) throw UsageError("--tol must be positive");
  return tol;
}

Json report_doc(const Cmp& cmp, const ConsistencyReport& report) {
  Json doc = io::to_json(cmp, report);
  doc["verdict"] = std::string(report.consistent() ? "consistent" : "violated") + " up to horizon " +
                   std::to_string(report.horizon);
  return doc;
}

int code_for(const ConsistencyReport& report) {
  return report.consistent() ? kExitOk : kExitViolation;
}

/// Runs the axiom checks weakest first and stops at the first failing stage.
ConsistencyReport staged_check(const Cmp& cmp, const UtilityTable& table, const std::string& level,
                               std::optional<StateIndex> root, double tol) {
  ConsistencyReport report = check_memorylessness(cmp, table, tol);
  if (level == "memoryless" || !report.consistent()) {
    if (level != "memoryless") report.stage = "memoryless";
    report.check = level;
    return report;
  }
  if (level == "additive") return check_additivity(cmp, table, tol);
  return check_path_obliviousness(cmp, table, *root, tol);
}

Outcome do_validate(const RunConfig& config) {
  const Json raw = io::read_json_file(require(config.input, "--input", config.command));
  const Cmp cmp = io::cmp_from_json(raw, config.input);
  const ValidationReport report = validate_cmp(cmp);
  Json doc = io::to_json(cmp, report);
  doc["tolerance"] = kSimplexTolerance;
  bool ok = report.ok();

  const Json& body = raw.is_object() && raw.contains("spec") ? raw.at("spec") : raw;
  if (body.is_object() && body.contains("rewards")) {
    const Armdp model = io::armdp_from_json(raw, config.input);
    doc["beta"] = contraction_factor(model);
  }

  doc["horizon"] = nullptr;
  if (!config.table.empty()) {
    const UtilityTable table = io::table_from_json(io::read_json_file(config.table), cmp, config.table);
    doc["horizon"] = table.horizon();
    Json missing = Json::array();
    std::size_t missing_count = 0;
    for (StateIndex s = 0; s < cmp.num_states(); ++s) {
      for (const auto& tau : enumerate_trajectories(cmp, s, table.horizon())) {
        if (table.contains(tau)) continue;
        if (missing_count++ < kMaxWitnesses) missing.push_back(io::to_json(cmp, tau));
      }
    }
    Json large = Json::array();
    for (const auto& [tau, u] : table.entries()) {
      if (std::abs(u) > 1e12) large.push_back(io::to_json(cmp, tau));
    }
    doc["missing_entries"] = missing_count;
    doc["missing"] = std::move(missing);
    doc["large_magnitude"] = std::move(large);
    ok = ok && missing_count == 0;
  }
  doc["status"] = ok ? "consistent" : "violated";
  return {std::move(doc), ok ? kExitOk : kExitViolation};
}

Outcome do_check(const RunConfig& config) {
  const std::string& level = require(config.level, "--level", config.command);
  const Cmp cmp = io::cmp_from_json(io::read_json_file(require(config.input, "--input", config.command)),
                                    config.input);
  if (level == "ordinal") {
    const std::string& path = config.pairs.empty() ? config.table : config.pairs;
    const auto comparisons = io::comparisons_from_json(io::read_json_file(require(path, "--pairs", config.command)), cmp, path);
    ConsistencyReport report = check_pairwise(comparisons);
    Json doc = io::to_json(cmp, report);
    doc["note"] = "necessary conditions only: totality, strict asymmetry, transitivity";
    return {std::move(doc), code_for(report)};
  }
  if (level != "memoryless" && level != "additive" && level != "path-oblivious") {
    throw UsageError("--level must be memoryless, additive, path-oblivious or ordinal");
  }
  const double tol = tolerance_of(config);
  const UtilityTable table = io::table_from_json(
      io::read_json_file(require(config.table, "--table", config.command)), cmp, config.table);
  std::optional<StateIndex> root;
  if (level == "path-oblivious") root = resolve_root(cmp, config);
  ConsistencyReport report = staged_check(cmp, table, level, root, tol);
  return {report_doc(cmp, report), code_for(report)};
}

Outcome do_extract(const RunConfig& config) {
  const std::string& target = require(config.target, "--target", config.command);
  if (target != "affine" && target != "reward" && target != "potential") {
    throw UsageError("--target must be affine, reward or potential");
  }
  const double tol = tolerance_of(config);
  const Json raw = io::read_json_file(require(config.input, "--input", config.command));
  const Cmp cmp = io::cmp_from_json(raw, config.input);
  Json doc = Json::object();
  doc["schema"] = io::kSchemaVersion;
  doc["target"] = target;

  if (target == "potential" && config.table.empty()) {
    const Armdp model = io::armdp_from_json(raw, config.input);
    const StateIndex root = resolve_root(cmp, config);
    auto extraction = extract_potential(cmp, model.rewards(), root, tol);
    const auto canon = canonicalize<double>(model.rewards(), nullptr, &extraction.potential);
    Json spec = io::to_json(cmp, extraction.potential);
    spec["scale"] = canon.factor;
    doc["spec"] = extraction.report.consistent() ? std::move(spec) : Json(nullptr);
    doc["report"] = io::to_json(cmp, extraction.report);
    return {std::move(doc), code_for(extraction.report)};
  }

  const UtilityTable table = io::table_from_json(
      io::read_json_file(require(config.table, "--table", config.command)), cmp, config.table);
  auto extraction = extract_affine(cmp, table, tol);

  if (target == "affine") {
    const auto canon = canonicalize(extraction.rewards, &extraction.multipliers);
    Json spec = io::armdp_document(cmp, canon.rewards, &*canon.multipliers);
    Json undetermined = Json::array();
    for (const auto& t : extraction.multipliers.undetermined) undetermined.push_back(io::to_json(cmp, t));
    spec["undetermined"] = std::move(undetermined);
    spec["scale"] = canon.factor;
    doc["spec"] = std::move(spec);
    doc["report"] = report_doc(cmp, extraction.report);
    return {std::move(doc), code_for(extraction.report)};
  }

  ConsistencyReport report = staged_check(cmp, table, "additive", std::nullopt, tol);
  if (!report.consistent()) {
    doc["spec"] = nullptr;
    doc["report"] = report_doc(cmp, report);
    return {std::move(doc), kExitViolation};
  }
  if (target == "reward") {
    const auto canon = canonicalize(extraction.rewards);
    Json spec = io::armdp_document(cmp, canon.rewards, nullptr);
    spec["scale"] = canon.factor;
    doc["spec"] = std::move(spec);
    doc["report"] = report_doc(cmp, report);
    return {std::move(doc), kExitOk};
  }

  const StateIndex root = resolve_root(cmp, config);
  auto potential = extract_potential(cmp, extraction.rewards, root, tol);
  potential.report.horizon = table.horizon();
  const auto canon = canonicalize<double>(extraction.rewards, nullptr, &potential.potential);
  Json spec = io::to_json(cmp, potential.potential);
  spec["scale"] = canon.factor;
  doc["spec"] = potential.report.consistent() ? std::move(spec) : Json(nullptr);
  doc["report"] = report_doc(cmp, potential.report);
  return {std::move(doc), code_for(potential.report)};
}

Outcome do_complete(const RunConfig& config) {
  const Cmp cmp = io::cmp_from_json(io::read_json_file(require(config.input, "--input", config.command)),
                                    config.input);
  const UtilityTable partial = io::table_from_json(
      io::read_json_file(require(config.table, "--table", config.command)), cmp, config.table);
  const StateIndex root = resolve_root(cmp, config);
  auto result = complete_partial(cmp, partial, root, tolerance_of(config));
  if (auto* report = std::get_if<ConsistencyReport>(&result)) {
    return {report_doc(cmp, *report), kExitViolation};
  }
  Json doc = io::to_json(cmp, std::get<UtilityTable>(result));
  doc["root"] = cmp.state_name(root);
  doc["status"] = "consistent";
  doc["tolerance"] = tolerance_of(config);
  return {std::move(doc), kExitOk};
}

Outcome do_solve(const RunConfig& config) {
  const Armdp model = load_model(config);
  const double tol = tolerance_of(config);
  const Solution solution = value_iteration(model, tol, config.max_iterations, config.horizon);
  return {io::to_json(model.cmp(), solution, tol), kExitOk};
}

Outcome do_eval(const RunConfig& config) {
  const Armdp model = load_model(config);
  const MemorylessPolicy pi = io::policy_from_json(
      io::read_json_file(require(config.policy, "--policy", config.command)), model.cmp(), config.policy);
  const double tol = tolerance_of(config);
  Json doc = Json::object();
  doc["schema"] = io::kSchemaVersion;
  doc["values"] = io::values_to_json(model.cmp(), policy_value(model, pi, tol));
  doc["beta"] = contraction_factor(model, pi);
  doc["tolerance"] = tol;
  return {std::move(doc), kExitOk};
}

Outcome do_simulate(const RunConfig& config) {
  const Json raw = io::read_json_file(require(config.input, "--input", config.command));
  const Cmp cmp = io::cmp_from_json(raw, config.input);
  const MemorylessPolicy pi = config.policy.empty()
                                  ? MemorylessPolicy::uniform(cmp)
                                  : io::policy_from_json(io::read_json_file(config.policy), cmp, config.policy);
  const StateIndex start = resolve_root(cmp, config);
  const std::size_t max_len = config.horizon.value_or(100);
  const auto samples = sample_trajectories(cmp, start, pi, config.seed, max_len, config.count);

  std::optional<Armdp> model;
  const Json& body = raw.is_object() && raw.contains("spec") ? raw.at("spec") : raw;
  if (body.is_object() && body.contains("rewards")) model = io::armdp_from_json(raw, config.input);

  Json doc = Json::object();
  doc["schema"] = io::kSchemaVersion;
  doc["seed"] = config.seed;
  doc["horizon"] = max_len;
  Json trajectories = Json::array();
  Json utilities = Json::array();
  for (const auto& tau : samples) {
    trajectories.push_back(io::to_json(cmp, tau));
    if (model) utilities.push_back(ar_return(model->rewards(), model->multipliers(), tau));
  }
  doc["trajectories"] = std::move(trajectories);
  if (model) doc["utilities"] = std::move(utilities);
  return {std::move(doc), kExitOk};
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    Outcome outcome;
    if (config.command == "validate") {
      outcome = do_validate(config);
    } else if (config.command == "check-axioms") {
      outcome = do_check(config);
    } else if (config.command == "extract") {
      outcome = do_extract(config);
    } else if (config.command == "complete") {
      outcome = do_complete(config);
    } else if (config.command == "solve") {
      outcome = do_solve(config);
    } else if (config.command == "eval") {
      outcome = do_eval(config);
    } else if (config.command == "simulate") {
      outcome = do_simulate(config);
    } else {
      throw UsageError("unknown command '" + config.command + "'");
    }

    if (config.out.empty()) {
      io::write_json(out, outcome.doc);
    } else {
      std::ofstream file(config.out);
      if (!file) throw std::runtime_error(config.out + ": cannot open for writing");
      io::write_json(file, outcome.doc);
    }
    return outcome.code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace sequtil::cli
