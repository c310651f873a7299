#pragma once

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "sequtil/cmp.hpp"
#include "sequtil/lottery.hpp"

namespace sequtil {

class MissingTrajectory : public std::out_of_range {
 public:
  MissingTrajectory(Trajectory tau, const std::string& what)
      : std::out_of_range(what), trajectory(std::move(tau)) {}

  Trajectory trajectory;
};

class OutsideDomain : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/**
 * Utilities of finite trajectories, u(ε) = 0 implicitly for every anchor.
 *
 * `horizon` is the length up to which the table claims to key every
 * trajectory of its CMP.
 */
template <typename Scalar>
class BasicUtilityTable {
 public:
  BasicUtilityTable() = default;
  explicit BasicUtilityTable(std::size_t horizon) : horizon_(horizon) {}

  std::size_t horizon() const { return horizon_; }
  void set_horizon(std::size_t h) { horizon_ = h; }

  /// Throws std::invalid_argument for a nonzero utility on an empty trajectory.
  void set(const Trajectory& tau, Scalar u) {
    if (tau.empty()) {
      if (!(u == Scalar(0))) throw std::invalid_argument("empty trajectory must have utility 0");
      return;
    }
    entries_.insert_or_assign(tau, std::move(u));
  }

  bool contains(const Trajectory& tau) const { return tau.empty() || entries_.count(tau) > 0; }

  const Scalar* find(const Trajectory& tau) const {
    if (tau.empty()) return &zero_;
    auto it = entries_.find(tau);
    return it == entries_.end() ? nullptr : &it->second;
  }

  const Scalar& at(const Trajectory& tau) const {
    if (const Scalar* u = find(tau)) return *u;
    throw MissingTrajectory(tau, "utility table has no entry for a trajectory of length " +
                                     std::to_string(tau.size()) + " from state #" +
                                     std::to_string(tau.start()));
  }

  /// Non-empty entries in canonical order.
  const std::map<Trajectory, Scalar>& entries() const { return entries_; }

  /// max(1, max |u|): the comparison scale for residual tolerances.
  Scalar scale() const {
    Scalar s(1);
    for (const auto& [tau, u] : entries_) {
      Scalar a = u < Scalar(0) ? Scalar(-u) : u;
      if (a > s) s = a;
    }
    return s;
  }

  BasicUtilityTable scaled(const Scalar& alpha) const {
    BasicUtilityTable out(horizon_);
    for (const auto& [tau, u] : entries_) out.entries_.emplace_hint(out.entries_.end(), tau, alpha * u);
    return out;
  }

  friend bool operator==(const BasicUtilityTable& a, const BasicUtilityTable& b) {
    return a.horizon_ == b.horizon_ && a.entries_ == b.entries_;
  }

 private:
  std::size_t horizon_ = 0;
  std::map<Trajectory, Scalar> entries_;
  Scalar zero_ = Scalar(0);
};

/// Per-transition rewards r.
template <typename Scalar>
struct BasicRewardSpec {
  std::map<Transition, Scalar> values;

  const Scalar& at(const Transition& t) const {
    auto it = values.find(t);
    if (it == values.end()) throw OutsideDomain("transition outside the reward domain");
    return it->second;
  }

  friend bool operator==(const BasicRewardSpec&, const BasicRewardSpec&) = default;
};

/// Per-transition reward multipliers m > 0. `undetermined` lists transitions
/// whose multiplier the data could not pin down (set to 1).
template <typename Scalar>
struct BasicMultiplierSpec {
  std::map<Transition, Scalar> values;
  std::set<Transition> undetermined;

  const Scalar& at(const Transition& t) const {
    auto it = values.find(t);
    if (it == values.end()) throw OutsideDomain("transition outside the multiplier domain");
    return it->second;
  }

  /// m ≡ 1 over the legal transitions of cmp.
  static BasicMultiplierSpec ones(const Cmp& cmp) {
    BasicMultiplierSpec m;
    for (const auto& t : cmp.legal_transitions()) m.values.emplace(t, Scalar(1));
    return m;
  }

  friend bool operator==(const BasicMultiplierSpec&, const BasicMultiplierSpec&) = default;
};

/// State potential φ; trajectory utilities are φ(end) − φ(start).
template <typename Scalar>
struct BasicPotential {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;
  StateIndex root = 0;

  const Scalar& at(StateIndex s) const {
    if (s >= static_cast<std::size_t>(values.size())) {
      throw OutsideDomain("state #" + std::to_string(s) + " outside the potential domain");
    }
    return values(static_cast<Eigen::Index>(s));
  }
};

using UtilityTable = BasicUtilityTable<double>;
using RewardSpec = BasicRewardSpec<double>;
using MultiplierSpec = BasicMultiplierSpec<double>;
using Potential = BasicPotential<double>;

/// u(t·τ) = r(t) + m(t)·u(τ), u(ε) = 0, evaluated from the last step backwards.
template <typename Scalar>
Scalar ar_return(const BasicRewardSpec<Scalar>& r, const BasicMultiplierSpec<Scalar>& m,
                 const Trajectory& tau) {
  Scalar u(0);
  for (std::size_t i = tau.size(); i-- > 0;) u = r.at(tau[i]) + m.at(tau[i]) * u;
  return u;
}

template <typename Scalar>
Scalar additive_return(const BasicRewardSpec<Scalar>& r, const Trajectory& tau) {
  Scalar u(0);
  for (std::size_t i = tau.size(); i-- > 0;) u = r.at(tau[i]) + u;
  return u;
}

template <typename Scalar>
Scalar potential_return(const BasicPotential<Scalar>& phi, const Trajectory& tau) {
  if (tau.empty()) {
    phi.at(tau.start());
    return Scalar(0);
  }
  return phi.at(tau.end()) - phi.at(tau.start());
}

/// Π m(t) over the steps of tau; 1 for ε.
template <typename Scalar>
Scalar trajectory_multiplier(const BasicMultiplierSpec<Scalar>& m, const Trajectory& tau) {
  Scalar p(1);
  for (const auto& t : tau.steps()) p *= m.at(t);
  return p;
}

/// Utility table of every trajectory of cmp up to `horizon`, from every state.
template <typename Scalar>
BasicUtilityTable<Scalar> table_from_armdp(const Cmp& cmp, const BasicRewardSpec<Scalar>& r,
                                           const BasicMultiplierSpec<Scalar>& m,
                                           std::size_t horizon) {
  BasicUtilityTable<Scalar> table(horizon);
  for (StateIndex s = 0; s < cmp.num_states(); ++s) {
    for (const auto& tau : enumerate_trajectories(cmp, s, horizon)) {
      if (!tau.empty()) table.set(tau, ar_return(r, m, tau));
    }
  }
  return table;
}

/// Σ p(τ)·u(τ) over flatten(l); throws MissingTrajectory for an unkeyed outcome.
template <typename Scalar>
Scalar lottery_utility(const BasicUtilityTable<Scalar>& table, const BasicLottery<Scalar>& l) {
  return expected_utility(l, [&](const Trajectory& tau) { return table.at(tau); });
}

}  // namespace sequtil
