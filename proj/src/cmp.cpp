#include "sequtil/cmp.hpp"

#include <algorithm>
#include <cmath>

namespace sequtil {

AnchorMismatch::AnchorMismatch(StateIndex prefix_end, StateIndex suffix_start)
    : std::invalid_argument("anchor mismatch: prefix ends at state #" +
                            std::to_string(prefix_end) + " but suffix starts at state #" +
                            std::to_string(suffix_start)),
      prefix_end(prefix_end),
      suffix_start(suffix_start) {}

Trajectory::Trajectory(StateIndex anchor, std::vector<Transition> steps)
    : anchor_(anchor), steps_(std::move(steps)) {
  StateIndex at = anchor_;
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    if (steps_[i].from != at) {
      throw std::invalid_argument("trajectory step " + std::to_string(i) +
                                  " is not adjacent to its predecessor");
    }
    at = steps_[i].to;
  }
}

Trajectory Trajectory::prefix(std::size_t n) const {
  Trajectory out(anchor_);
  out.steps_.assign(steps_.begin(), steps_.begin() + static_cast<std::ptrdiff_t>(std::min(n, size())));
  return out;
}

Trajectory Trajectory::suffix(std::size_t n) const {
  if (n >= size()) return Trajectory(end());
  Trajectory out(steps_[n].from);
  out.steps_.assign(steps_.begin() + static_cast<std::ptrdiff_t>(n), steps_.end());
  return out;
}

Trajectory Trajectory::extended(const Transition& t) const {
  if (t.from != end()) throw AnchorMismatch(end(), t.from);
  Trajectory out = *this;
  out.steps_.push_back(t);
  return out;
}

std::strong_ordering operator<=>(const Trajectory& a, const Trajectory& b) {
  if (auto c = a.steps_.size() <=> b.steps_.size(); c != 0) return c;
  if (auto c = a.anchor_ <=> b.anchor_; c != 0) return c;
  return std::lexicographical_compare_three_way(a.steps_.begin(), a.steps_.end(),
                                                b.steps_.begin(), b.steps_.end());
}

Trajectory concat(const Trajectory& prefix, const Trajectory& suffix) {
  if (prefix.end() != suffix.start()) throw AnchorMismatch(prefix.end(), suffix.start());
  std::vector<Transition> steps(prefix.steps().begin(), prefix.steps().end());
  steps.insert(steps.end(), suffix.steps().begin(), suffix.steps().end());
  return Trajectory(prefix.start(), std::move(steps));
}

Cmp::Cmp(std::vector<std::string> states, std::vector<std::string> actions)
    : states_(std::move(states)),
      actions_(std::move(actions)),
      outcomes_(states_.size() * actions_.size()) {}

void Cmp::add_outcome(StateIndex s, ActionIndex a, StateIndex next, double probability,
                      double termination) {
  if (s >= num_states() || next >= num_states() || a >= num_actions()) {
    throw std::invalid_argument("outcome refers to an undeclared state or action");
  }
  auto& list = outcomes_[slot(s, a)];
  auto pos = std::lower_bound(list.begin(), list.end(), next,
                              [](const Outcome& o, StateIndex n) { return o.next < n; });
  if (pos != list.end() && pos->next == next) {
    throw std::invalid_argument("duplicate transition (" + states_[s] + ", " + actions_[a] +
                                ", " + states_[next] + ")");
  }
  list.insert(pos, Outcome{next, probability, termination});
}

std::optional<StateIndex> Cmp::find_state(std::string_view name) const {
  auto it = std::find(states_.begin(), states_.end(), name);
  if (it == states_.end()) return std::nullopt;
  return static_cast<StateIndex>(it - states_.begin());
}

std::optional<ActionIndex> Cmp::find_action(std::string_view name) const {
  auto it = std::find(actions_.begin(), actions_.end(), name);
  if (it == actions_.end()) return std::nullopt;
  return static_cast<ActionIndex>(it - actions_.begin());
}

bool Cmp::has_legal_action(StateIndex s) const {
  for (ActionIndex a = 0; a < num_actions(); ++a) {
    if (is_legal(s, a)) return true;
  }
  return false;
}

std::span<const Outcome> Cmp::outcomes(StateIndex s, ActionIndex a) const {
  if (s >= num_states() || a >= num_actions()) return {};
  return outcomes_[slot(s, a)];
}

const Outcome* Cmp::find(const Transition& t) const {
  for (const auto& o : outcomes(t.from, t.action)) {
    if (o.next == t.to) return &o;
  }
  return nullptr;
}

bool Cmp::has_transition(const Transition& t) const {
  const Outcome* o = find(t);
  return o != nullptr && o->probability > 0.0;
}

double Cmp::termination(const Transition& t) const {
  const Outcome* o = find(t);
  return o ? o->termination : 0.0;
}

std::vector<Transition> Cmp::transitions_from(StateIndex s) const {
  std::vector<Transition> out;
  for (ActionIndex a = 0; a < num_actions(); ++a) {
    for (const auto& o : outcomes(s, a)) {
      if (o.probability > 0.0) out.push_back({s, a, o.next});
    }
  }
  return out;
}

std::vector<Transition> Cmp::legal_transitions() const {
  std::vector<Transition> out;
  for (StateIndex s = 0; s < num_states(); ++s) {
    auto from_s = transitions_from(s);
    out.insert(out.end(), from_s.begin(), from_s.end());
  }
  return out;
}

bool Cmp::is_valid(const Trajectory& tau) const {
  if (tau.start() >= num_states()) return false;
  for (const auto& t : tau.steps()) {
    if (!has_transition(t)) return false;
  }
  return true;
}

std::string describe(const Cmp& cmp, const Trajectory& tau) {
  if (tau.empty()) return "ε@" + cmp.state_name(tau.start());
  std::string out = cmp.state_name(tau.start());
  for (const auto& t : tau.steps()) {
    out += " -" + cmp.action_name(t.action) + "-> " + cmp.state_name(t.to);
  }
  return out;
}

std::string describe(const Cmp& cmp, const Transition& t) {
  return "(" + cmp.state_name(t.from) + ", " + cmp.action_name(t.action) + ", " +
         cmp.state_name(t.to) + ")";
}

ValidationReport validate_cmp(const Cmp& cmp) {
  ValidationReport report;
  for (StateIndex s = 0; s < cmp.num_states(); ++s) {
    bool any_legal = false;
    for (ActionIndex a = 0; a < cmp.num_actions(); ++a) {
      auto outs = cmp.outcomes(s, a);
      if (outs.empty()) continue;
      any_legal = true;
      double total = 0.0;
      for (const auto& o : outs) {
        if (!(o.probability >= 0.0)) {
          report.violations.push_back({"negative-probability", s, a, o.next, o.probability});
        }
        if (!(o.termination >= 0.0 && o.termination <= 1.0)) {
          report.violations.push_back({"termination-range", s, a, o.next, o.termination});
        }
        total += o.probability;
      }
      if (!(std::abs(total - 1.0) <= kSimplexTolerance)) {
        report.violations.push_back({"simplex", s, a, std::nullopt, total});
      }
    }
    if (!any_legal) report.dead_ends.push_back(s);
  }
  return report;
}

std::vector<Trajectory> enumerate_trajectories(const Cmp& cmp, StateIndex start,
                                               std::size_t max_len) {
  if (start >= cmp.num_states()) {
    throw std::invalid_argument("start state #" + std::to_string(start) + " is not declared");
  }
  std::vector<Trajectory> out{Trajectory(start)};
  std::size_t level_begin = 0;
  for (std::size_t len = 1; len <= max_len; ++len) {
    const std::size_t level_end = out.size();
    for (std::size_t i = level_begin; i < level_end; ++i) {
      for (const auto& t : cmp.transitions_from(out[i].end())) {
        out.push_back(out[i].extended(t));
      }
    }
    if (out.size() == level_end) break;
    level_begin = level_end;
  }
  return out;
}

std::size_t count_trajectories(const Cmp& cmp, StateIndex start, std::size_t max_len,
                               std::size_t cap) {
  // ways[s]: number of length-`len` trajectories from start ending at s.
  std::vector<double> ways(cmp.num_states(), 0.0);
  ways.at(start) = 1.0;
  double total = 1.0;
  for (std::size_t len = 1; len <= max_len && total <= static_cast<double>(cap); ++len) {
    std::vector<double> next(cmp.num_states(), 0.0);
    for (StateIndex s = 0; s < cmp.num_states(); ++s) {
      if (ways[s] == 0.0) continue;
      for (const auto& t : cmp.transitions_from(s)) next[t.to] += ways[s];
    }
    ways = std::move(next);
    for (double w : ways) total += w;
  }
  return total > static_cast<double>(cap) ? cap + 1 : static_cast<std::size_t>(total);
}

}  // namespace sequtil
