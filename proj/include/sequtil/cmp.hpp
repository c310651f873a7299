#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sequtil {

using StateIndex = std::size_t;
using ActionIndex = std::size_t;

/// A single step (s, a, s'). Ordered lexicographically by (from, action, to).
struct Transition {
  StateIndex from = 0;
  ActionIndex action = 0;
  StateIndex to = 0;

  friend auto operator<=>(const Transition&, const Transition&) = default;
};

class AnchorMismatch : public std::invalid_argument {
 public:
  AnchorMismatch(StateIndex prefix_end, StateIndex suffix_start);

  StateIndex prefix_end;
  StateIndex suffix_start;
};

/**
 * A finite sequence of adjacent transitions anchored at a start state.
 *
 * The empty trajectory of state s holds only its anchor. Trajectories are
 * totally ordered by length, then anchor, then the step sequence; this is the
 * canonical order used by enumeration, flattening and every report.
 */
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(StateIndex anchor) : anchor_(anchor) {}
  /// Throws std::invalid_argument when steps are not adjacent or the first
  /// step does not leave the anchor.
  Trajectory(StateIndex anchor, std::vector<Transition> steps);

  StateIndex start() const { return anchor_; }
  StateIndex end() const { return steps_.empty() ? anchor_ : steps_.back().to; }
  std::size_t size() const { return steps_.size(); }
  bool empty() const { return steps_.empty(); }
  std::span<const Transition> steps() const { return steps_; }
  const Transition& operator[](std::size_t i) const { return steps_[i]; }

  /// First n steps.
  Trajectory prefix(std::size_t n) const;
  /// Steps from index n onwards, anchored where step n starts.
  Trajectory suffix(std::size_t n) const;
  /// Copy with one more step; throws AnchorMismatch if t does not leave end().
  Trajectory extended(const Transition& t) const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
  friend std::strong_ordering operator<=>(const Trajectory& a, const Trajectory& b);

 private:
  StateIndex anchor_ = 0;
  std::vector<Transition> steps_;
};

/// Sequence append; throws AnchorMismatch unless prefix.end() == suffix.start().
Trajectory concat(const Trajectory& prefix, const Trajectory& suffix);

struct Outcome {
  StateIndex next = 0;
  double probability = 0.0;
  double termination = 0.0;

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

/**
 * Controlled Markov process over finite, declaration-ordered states and
 * actions.
 *
 * A state-action pair is legal once any outcome is declared for it. Outcomes
 * are stored as given (never renormalized); only outcomes with positive
 * probability produce transitions.
 */
class Cmp {
 public:
  Cmp() = default;
  Cmp(std::vector<std::string> states, std::vector<std::string> actions);

  /// Declares ℙ(next | s, a) and 𝕋(s, a, next). Throws std::invalid_argument on
  /// out-of-range indices or a duplicate (s, a, next).
  void add_outcome(StateIndex s, ActionIndex a, StateIndex next, double probability,
                   double termination = 0.0);

  std::size_t num_states() const { return states_.size(); }
  std::size_t num_actions() const { return actions_.size(); }
  const std::vector<std::string>& states() const { return states_; }
  const std::vector<std::string>& actions() const { return actions_; }
  const std::string& state_name(StateIndex s) const { return states_.at(s); }
  const std::string& action_name(ActionIndex a) const { return actions_.at(a); }
  std::optional<StateIndex> find_state(std::string_view name) const;
  std::optional<ActionIndex> find_action(std::string_view name) const;

  bool is_legal(StateIndex s, ActionIndex a) const { return !outcomes(s, a).empty(); }
  bool has_legal_action(StateIndex s) const;
  /// Declared outcomes of (s, a) sorted by next state, including zero-probability ones.
  std::span<const Outcome> outcomes(StateIndex s, ActionIndex a) const;

  /// Outcome record for t, or nullptr if t is not declared.
  const Outcome* find(const Transition& t) const;
  /// True when t is declared with positive probability.
  bool has_transition(const Transition& t) const;
  double termination(const Transition& t) const;

  /// Transitions with positive probability, in (from, action, to) order.
  std::vector<Transition> legal_transitions() const;
  /// Same, restricted to those leaving s.
  std::vector<Transition> transitions_from(StateIndex s) const;

  bool is_valid(const Trajectory& tau) const;

  friend bool operator==(const Cmp&, const Cmp&) = default;

 private:
  std::size_t slot(StateIndex s, ActionIndex a) const { return s * actions_.size() + a; }

  std::vector<std::string> states_;
  std::vector<std::string> actions_;
  std::vector<std::vector<Outcome>> outcomes_;
};

/// Human-readable trajectory, e.g. "s0 -go-> s1 -go-> s2", or "ε@s0".
std::string describe(const Cmp& cmp, const Trajectory& tau);
std::string describe(const Cmp& cmp, const Transition& t);

struct ValidationIssue {
  std::string kind;  // simplex, negative-probability, termination-range, no-successor
  StateIndex state = 0;
  ActionIndex action = 0;
  std::optional<StateIndex> next;
  double value = 0.0;
};

struct ValidationReport {
  std::vector<ValidationIssue> violations;
  /// States without any legal action. Permitted, listed for the caller.
  std::vector<StateIndex> dead_ends;

  bool ok() const { return violations.empty(); }
};

inline constexpr double kSimplexTolerance = 1e-12;

ValidationReport validate_cmp(const Cmp& cmp);

/// Every trajectory of length <= max_len from start whose transitions all have
/// positive probability, ε first, ordered by length and then lexicographically
/// by (action, next state) indices.
std::vector<Trajectory> enumerate_trajectories(const Cmp& cmp, StateIndex start,
                                               std::size_t max_len);

/// Number of trajectories enumerate_trajectories would return, saturating at
/// `cap` + 1 so callers can guard budgets without enumerating.
std::size_t count_trajectories(const Cmp& cmp, StateIndex start, std::size_t max_len,
                               std::size_t cap);

}  // namespace sequtil
