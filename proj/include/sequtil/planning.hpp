#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "sequtil/cmp.hpp"
#include "sequtil/policy.hpp"
#include "sequtil/returns.hpp"

namespace sequtil {

/**
 * Affine-reward MDP: a CMP with reward r and positive multiplier m on every
 * legal transition. An ordinary MDP is the m ≡ 1 case.
 */
class Armdp {
 public:
  /// Throws std::invalid_argument if r or m is not defined on exactly the legal
  /// transitions, or some m(t) ≤ 0.
  Armdp(Cmp cmp, RewardSpec rewards, MultiplierSpec multipliers);
  static Armdp mdp(Cmp cmp, RewardSpec rewards);

  const Cmp& cmp() const { return cmp_; }
  const RewardSpec& rewards() const { return rewards_; }
  const MultiplierSpec& multipliers() const { return multipliers_; }

  /// Same rewards and multipliers over a CMP with the same transitions.
  Armdp with_cmp(Cmp cmp) const { return Armdp(std::move(cmp), rewards_, multipliers_); }

  friend bool operator==(const Armdp&, const Armdp&) = default;

 private:
  Cmp cmp_;
  RewardSpec rewards_;
  MultiplierSpec multipliers_;
};

using ValueFunction = Eigen::VectorXd;

class DivergenceRisk : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class IterationLimit : public std::runtime_error {
 public:
  IterationLimit(ValueFunction last, std::size_t iterations);

  ValueFunction last;
  std::size_t iterations;
};

class HistoryBudgetExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// β = max over legal transitions of m(t)·(1 − 𝕋(t)).
double contraction_factor(const Armdp& a);
/// β restricted to transitions reachable in one step under positive-probability actions of pi.
double contraction_factor(const Armdp& a, const MemorylessPolicy& pi);

/// Q(s, a) = Σ ℙ(s'|s,a)·[r + m·(1 − 𝕋)·v(s')]; −∞ for illegal pairs.
Eigen::MatrixXd action_values(const Armdp& a, const ValueFunction& v);

/// First action attaining the row maximum of q; nullopt for all-illegal rows.
std::vector<std::optional<ActionIndex>> greedy_actions(const Eigen::MatrixXd& q);

/// Actions within tolerance·max(1, |best|) of each row's best value.
std::vector<std::vector<ActionIndex>> greedy_sets(const Eigen::MatrixXd& q, double tolerance);

struct Solution {
  ValueFunction values;
  std::vector<std::optional<ActionIndex>> actions;
  std::size_t iterations = 0;
  double beta = 0.0;
  /// Bound on ‖values − v*‖∞ (0 for finite-horizon solves).
  double certified_gap = 0.0;
  /// Sup-norm change of each sweep.
  std::vector<double> deltas;
  std::optional<std::size_t> horizon;

  MemorylessPolicy policy(const Cmp& cmp) const { return MemorylessPolicy::deterministic(cmp, actions); }
};

/**
 * Synchronous value iteration from v ≡ 0.
 *
 * Without a horizon it requires β < 1 and stops once the sweep change drops to
 * tol·(1 − β)/β, which certifies ‖v − v*‖∞ ≤ tol. With a horizon it performs
 * exactly that many backups (finite-horizon backward induction) and returns
 * the first-step greedy policy. Ties go to the lowest action index; dead ends
 * keep value 0.
 */
Solution value_iteration(const Armdp& a, double tolerance, std::size_t max_iterations,
                         std::optional<std::size_t> horizon = std::nullopt);

/// Value of a memoryless policy, solved directly from (I − W_π)v = R_π.
/// Requires the policy's contraction factor below 1; the solution's Bellman
/// residual is verified against tolerance.
ValueFunction policy_value(const Armdp& a, const MemorylessPolicy& pi, double tolerance);

/// One node of the history tree explored by brute_force_optimal.
struct HistoryNode {
  std::uint32_t parent = 0;
  std::uint32_t first_child = 0;
  std::uint32_t child_count = 0;
  std::uint32_t depth = 0;
  Transition last;          // step that led here; unused at the root
  double probability = 1.0;  // ℙ of `last`
  double termination = 0.0;  // 𝕋 of `last`
  double utility = 0.0;      // u of the whole history
  double value = 0.0;        // optimal expected utility of the completed trajectory
  double gap = std::numeric_limits<double>::infinity();  // best minus runner-up action
  std::optional<ActionIndex> action;

  StateIndex state(StateIndex start) const { return depth == 0 ? start : last.to; }
};

/// History-dependent optimum of the horizon-truncated problem.
struct HistoryPlan {
  StateIndex start = 0;
  std::size_t horizon = 0;
  double value = 0.0;
  std::vector<HistoryNode> nodes;

  Trajectory history(std::size_t node) const;
  /// Chosen action after `history`; nullopt at dead ends, at the horizon, or
  /// for histories outside the tree.
  std::optional<ActionIndex> action(const Trajectory& history) const;
};

/**
 * Exact backward induction over full histories, without merging histories
 * that share a state. At history h it maximizes the expected utility of the
 * completed trajectory h·τ′, where each step ends the episode with its
 * termination probability and the horizon ends it otherwise; completed
 * utilities come straight from the trajectory return. Throws
 * HistoryBudgetExceeded when the tree would exceed `budget` nodes.
 */
HistoryPlan brute_force_optimal(const Armdp& a, StateIndex start, std::size_t horizon,
                                std::size_t budget = 1'000'000);

/// 𝕋_new = 1 − γ(1 − 𝕋_old) on every outcome; γ must lie in (0, 1].
Cmp discount_to_termination(const Cmp& cmp, double gamma);

}  // namespace sequtil
