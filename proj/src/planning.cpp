#include "sequtil/planning.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Sparse>

namespace sequtil {

namespace {

constexpr double kMinusInf = -std::numeric_limits<double>::infinity();

void require_total(const Cmp& cmp, const std::map<Transition, double>& values, const char* what) {
  const auto legal = cmp.legal_transitions();
  for (const auto& t : legal) {
    if (!values.count(t)) {
      throw std::invalid_argument(std::string(what) + " missing for transition " + describe(cmp, t));
    }
  }
  if (values.size() != legal.size()) {
    for (const auto& [t, v] : values) {
      if (!cmp.has_transition(t)) {
        throw std::invalid_argument(std::string(what) + " given for non-transition #" +
                                    std::to_string(t.from) + "/" + std::to_string(t.action) +
                                    "/" + std::to_string(t.to));
      }
    }
  }
}

/// Per-action expected reward and discounted transition weights.
struct Backup {
  std::vector<Eigen::VectorXd> reward;                   // R_a(s) = Σ ℙ r
  std::vector<Eigen::SparseMatrix<double, Eigen::RowMajor>> weight;  // W_a(s, s') = ℙ m (1 − 𝕋)
  std::vector<std::vector<bool>> legal;                  // [a][s]

  explicit Backup(const Armdp& model) {
    const Cmp& cmp = model.cmp();
    const auto n = static_cast<Eigen::Index>(cmp.num_states());
    for (ActionIndex a = 0; a < cmp.num_actions(); ++a) {
      Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
      std::vector<Eigen::Triplet<double>> w;
      std::vector<bool> ok(cmp.num_states(), false);
      for (StateIndex s = 0; s < cmp.num_states(); ++s) {
        ok[s] = cmp.is_legal(s, a);
        for (const auto& o : cmp.outcomes(s, a)) {
          if (o.probability <= 0.0) continue;
          const Transition t{s, a, o.next};
          r(static_cast<Eigen::Index>(s)) += o.probability * model.rewards().at(t);
          w.emplace_back(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(o.next),
                         o.probability * model.multipliers().at(t) * (1.0 - o.termination));
        }
      }
      Eigen::SparseMatrix<double, Eigen::RowMajor> mat(n, n);
      mat.setFromTriplets(w.begin(), w.end());
      reward.push_back(std::move(r));
      weight.push_back(std::move(mat));
      legal.push_back(std::move(ok));
    }
  }

  Eigen::MatrixXd q(const ValueFunction& v) const {
    const auto n = v.size();
    Eigen::MatrixXd out(n, static_cast<Eigen::Index>(reward.size()));
    for (std::size_t a = 0; a < reward.size(); ++a) {
      const auto col = static_cast<Eigen::Index>(a);
      out.col(col) = reward[a] + weight[a] * v;
      for (Eigen::Index s = 0; s < n; ++s) {
        if (!legal[a][static_cast<std::size_t>(s)]) out(s, col) = kMinusInf;
      }
    }
    return out;
  }
};

ValueFunction row_max(const Eigen::MatrixXd& q) {
  ValueFunction v = ValueFunction::Zero(q.rows());
  for (Eigen::Index s = 0; s < q.rows(); ++s) {
    const double best = q.cols() ? q.row(s).maxCoeff() : kMinusInf;
    v(s) = best == kMinusInf ? 0.0 : best;
  }
  return v;
}

}  // namespace

Armdp::Armdp(Cmp cmp, RewardSpec rewards, MultiplierSpec multipliers)
    : cmp_(std::move(cmp)), rewards_(std::move(rewards)), multipliers_(std::move(multipliers)) {
  require_total(cmp_, rewards_.values, "reward");
  require_total(cmp_, multipliers_.values, "multiplier");
  for (const auto& [t, m] : multipliers_.values) {
    if (!(m > 0.0)) {
      throw std::invalid_argument("multiplier of " + describe(cmp_, t) + " is not positive");
    }
  }
}

Armdp Armdp::mdp(Cmp cmp, RewardSpec rewards) {
  auto ones = MultiplierSpec::ones(cmp);
  return Armdp(std::move(cmp), std::move(rewards), std::move(ones));
}

IterationLimit::IterationLimit(ValueFunction last, std::size_t iterations)
    : std::runtime_error("value iteration did not reach the tolerance within " +
                         std::to_string(iterations) + " iterations"),
      last(std::move(last)),
      iterations(iterations) {}

double contraction_factor(const Armdp& a) {
  double beta = 0.0;
  for (const auto& t : a.cmp().legal_transitions()) {
    beta = std::max(beta, a.multipliers().at(t) * (1.0 - a.cmp().termination(t)));
  }
  return beta;
}

double contraction_factor(const Armdp& a, const MemorylessPolicy& pi) {
  double beta = 0.0;
  for (const auto& t : a.cmp().legal_transitions()) {
    if (pi.probabilities(static_cast<Eigen::Index>(t.from), static_cast<Eigen::Index>(t.action)) <= 0.0) {
      continue;
    }
    beta = std::max(beta, a.multipliers().at(t) * (1.0 - a.cmp().termination(t)));
  }
  return beta;
}

Eigen::MatrixXd action_values(const Armdp& a, const ValueFunction& v) { return Backup(a).q(v); }

std::vector<std::optional<ActionIndex>> greedy_actions(const Eigen::MatrixXd& q) {
  std::vector<std::optional<ActionIndex>> out(static_cast<std::size_t>(q.rows()));
  for (Eigen::Index s = 0; s < q.rows(); ++s) {
    double best = kMinusInf;
    for (Eigen::Index a = 0; a < q.cols(); ++a) {
      if (q(s, a) > best) {
        best = q(s, a);
        out[static_cast<std::size_t>(s)] = static_cast<ActionIndex>(a);
      }
    }
  }
  return out;
}

std::vector<std::vector<ActionIndex>> greedy_sets(const Eigen::MatrixXd& q, double tolerance) {
  std::vector<std::vector<ActionIndex>> out(static_cast<std::size_t>(q.rows()));
  for (Eigen::Index s = 0; s < q.rows(); ++s) {
    const double best = q.cols() ? q.row(s).maxCoeff() : kMinusInf;
    if (best == kMinusInf) continue;
    const double slack = tolerance * std::max(1.0, std::abs(best));
    for (Eigen::Index a = 0; a < q.cols(); ++a) {
      if (q(s, a) >= best - slack) out[static_cast<std::size_t>(s)].push_back(static_cast<ActionIndex>(a));
    }
  }
  return out;
}

Solution value_iteration(const Armdp& a, double tolerance, std::size_t max_iterations,
                         std::optional<std::size_t> horizon) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  Solution out;
  out.beta = contraction_factor(a);
  out.horizon = horizon;
  if (!horizon && out.beta >= 1.0) {
    throw DivergenceRisk("contraction factor " + std::to_string(out.beta) +
                         " >= 1; supply a finite horizon");
  }
  const Backup backup(a);
  ValueFunction v = ValueFunction::Zero(static_cast<Eigen::Index>(a.cmp().num_states()));
  Eigen::MatrixXd q = backup.q(v);

  if (horizon) {
    for (std::size_t k = 0; k < *horizon; ++k) {
      if (k > 0) q = backup.q(v);
      ValueFunction next = row_max(q);
      out.deltas.push_back((next - v).lpNorm<Eigen::Infinity>());
      v = std::move(next);
    }
    out.iterations = *horizon;
    out.values = std::move(v);
    out.actions = greedy_actions(q);
    return out;
  }

  while (true) {
    ValueFunction next = row_max(q);
    const double delta = (next - v).lpNorm<Eigen::Infinity>();
    out.deltas.push_back(delta);
    v = std::move(next);
    ++out.iterations;
    q = backup.q(v);
    if (out.beta * delta <= tolerance * (1.0 - out.beta)) {
      out.certified_gap = out.beta * delta / (1.0 - out.beta);
      break;
    }
    if (out.iterations >= max_iterations) throw IterationLimit(v, out.iterations);
  }
  out.values = std::move(v);
  out.actions = greedy_actions(q);
  return out;
}

ValueFunction policy_value(const Armdp& a, const MemorylessPolicy& pi, double tolerance) {
  if (auto problems = validate_policy(a.cmp(), pi); !problems.empty()) {
    throw std::invalid_argument("policy is not legal for this model: " + problems.front());
  }
  const double beta = contraction_factor(a, pi);
  if (beta >= 1.0) {
    throw DivergenceRisk("policy contraction factor " + std::to_string(beta) + " >= 1");
  }
  const Backup backup(a);
  const auto n = static_cast<Eigen::Index>(a.cmp().num_states());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
  for (std::size_t act = 0; act < backup.reward.size(); ++act) {
    const Eigen::VectorXd p = pi.probabilities.col(static_cast<Eigen::Index>(act));
    w += p.asDiagonal() * Eigen::MatrixXd(backup.weight[act]);
    r += p.cwiseProduct(backup.reward[act]);
  }
  const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - w;
  ValueFunction v = system.partialPivLu().solve(r);
  const double residual = (r + w * v - v).lpNorm<Eigen::Infinity>();
  if (!(residual <= tolerance * std::max(1.0, v.lpNorm<Eigen::Infinity>()))) {
    throw std::runtime_error("policy evaluation residual " + std::to_string(residual) +
                             " exceeds tolerance");
  }
  return v;
}

Trajectory HistoryPlan::history(std::size_t node) const {
  std::vector<Transition> steps;
  for (std::size_t i = node; nodes[i].depth > 0; i = nodes[i].parent) steps.push_back(nodes[i].last);
  std::reverse(steps.begin(), steps.end());
  return Trajectory(start, std::move(steps));
}

std::optional<ActionIndex> HistoryPlan::action(const Trajectory& h) const {
  if (nodes.empty() || h.start() != start) return std::nullopt;
  std::size_t at = 0;
  for (const auto& t : h.steps()) {
    const auto& node = nodes[at];
    std::optional<std::size_t> next;
    for (std::uint32_t c = 0; c < node.child_count; ++c) {
      if (nodes[node.first_child + c].last == t) {
        next = node.first_child + c;
        break;
      }
    }
    if (!next) return std::nullopt;
    at = *next;
  }
  return nodes[at].action;
}

HistoryPlan brute_force_optimal(const Armdp& a, StateIndex start, std::size_t horizon,
                                std::size_t budget) {
  const Cmp& cmp = a.cmp();
  if (start >= cmp.num_states()) throw std::invalid_argument("start state is not declared");
  budget = std::min<std::size_t>(budget, std::numeric_limits<std::uint32_t>::max());
  if (count_trajectories(cmp, start, horizon, budget) > budget) {
    throw HistoryBudgetExceeded("history tree of depth " + std::to_string(horizon) +
                                " exceeds the budget of " + std::to_string(budget) + " histories");
  }

  HistoryPlan plan;
  plan.start = start;
  plan.horizon = horizon;
  auto& nodes = plan.nodes;
  nodes.push_back(HistoryNode{});

  std::vector<Transition> path;
  // Breadth-first expansion keeps each node's children contiguous and grouped by action.
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].depth >= horizon) continue;
    const StateIndex s = nodes[i].state(start);
    const auto first = static_cast<std::uint32_t>(nodes.size());
    for (ActionIndex act = 0; act < cmp.num_actions(); ++act) {
      for (const auto& o : cmp.outcomes(s, act)) {
        if (o.probability <= 0.0) continue;
        HistoryNode child;
        child.parent = static_cast<std::uint32_t>(i);
        child.depth = nodes[i].depth + 1;
        child.last = {s, act, o.next};
        child.probability = o.probability;
        child.termination = o.termination;
        nodes.push_back(child);
      }
    }
    nodes[i].first_child = first;
    nodes[i].child_count = static_cast<std::uint32_t>(nodes.size()) - first;
  }

  // Utility of every history, straight from the trajectory return.
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    path.clear();
    for (std::size_t j = i; nodes[j].depth > 0; j = nodes[j].parent) path.push_back(nodes[j].last);
    double u = 0.0;
    for (const auto& t : path) u = a.rewards().at(t) + a.multipliers().at(t) * u;  // path is reversed
    nodes[i].utility = u;
  }

  for (std::size_t i = nodes.size(); i-- > 0;) {
    HistoryNode& node = nodes[i];
    if (node.child_count == 0) {
      node.value = node.utility;
      continue;
    }
    double best = kMinusInf;
    double runner_up = kMinusInf;
    std::size_t c = node.first_child;
    const std::size_t stop = node.first_child + node.child_count;
    while (c < stop) {
      const ActionIndex act = nodes[c].last.action;
      double q = 0.0;
      for (; c < stop && nodes[c].last.action == act; ++c) {
        const HistoryNode& child = nodes[c];
        q += child.probability *
             (child.termination * child.utility + (1.0 - child.termination) * child.value);
      }
      if (q > best) {
        runner_up = best;
        best = q;
        node.action = act;
      } else if (q > runner_up) {
        runner_up = q;
      }
    }
    node.value = best;
    node.gap = best - runner_up;
  }
  plan.value = nodes.front().value;
  return plan;
}

Cmp discount_to_termination(const Cmp& cmp, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("discount factor must lie in (0, 1]");
  }
  if (gamma == 1.0) return cmp;
  Cmp out(cmp.states(), cmp.actions());
  for (StateIndex s = 0; s < cmp.num_states(); ++s) {
    for (ActionIndex a = 0; a < cmp.num_actions(); ++a) {
      for (const auto& o : cmp.outcomes(s, a)) {
        out.add_outcome(s, a, o.next, o.probability, 1.0 - gamma * (1.0 - o.termination));
      }
    }
  }
  return out;
}

}  // namespace sequtil
