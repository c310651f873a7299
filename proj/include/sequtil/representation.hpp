#pragma once

#include <algorithm>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sequtil/cmp.hpp"
#include "sequtil/report.hpp"
#include "sequtil/returns.hpp"

namespace sequtil {

/// Thrown when a check needs a trajectory the table does not key.
class IncompleteTable : public MissingTrajectory {
 public:
  using MissingTrajectory::MissingTrajectory;
};

/// Thrown by potential extraction when the root does not reach every state.
class UnreachableStates : public std::invalid_argument {
 public:
  UnreachableStates(std::vector<StateIndex> states, const std::string& what)
      : std::invalid_argument(what), states(std::move(states)) {}

  std::vector<StateIndex> states;
};

template <typename Scalar>
Scalar magnitude(const Scalar& x) {
  return x < Scalar(0) ? Scalar(-x) : x;
}

/// +1 if a ≻ b, −1 if b ≻ a, 0 if indifferent under strictness threshold delta.
template <typename Scalar>
int preference_sign(const Scalar& a, const Scalar& b, const Scalar& delta) {
  const Scalar d = a - b;
  if (d > delta) return 1;
  if (d < Scalar(-delta)) return -1;
  return 0;
}

namespace detail {

template <typename Scalar>
const Scalar& lookup(const Cmp& cmp, const BasicUtilityTable<Scalar>& table,
                     const Trajectory& tau) {
  if (const Scalar* u = table.find(tau)) return *u;
  throw IncompleteTable(tau, "utility table is incomplete: no entry for " + describe(cmp, tau));
}

/// Lazily enumerated follow-up lists per state, for a fixed maximum length.
class FollowUps {
 public:
  FollowUps(const Cmp& cmp, std::size_t max_len)
      : cmp_(cmp), max_len_(max_len), cache_(cmp.num_states()) {}

  const std::vector<Trajectory>& from(StateIndex s) {
    auto& slot = cache_[s];
    if (!slot) slot = enumerate_trajectories(cmp_, s, max_len_);
    return *slot;
  }

 private:
  const Cmp& cmp_;
  std::size_t max_len_;
  std::vector<std::optional<std::vector<Trajectory>>> cache_;
};

inline Trajectory single(const Transition& t) { return Trajectory(t.from).extended(t); }

template <typename Scalar>
ConsistencyReport make_report(std::string check, const BasicUtilityTable<Scalar>& table,
                              double tolerance) {
  ConsistencyReport report;
  report.check = std::move(check);
  report.horizon = table.horizon();
  report.tolerance = tolerance;
  report.scale = static_cast<double>(table.scale());
  return report;
}

}  // namespace detail

template <typename Scalar>
struct AffineExtraction {
  BasicRewardSpec<Scalar> rewards;
  BasicMultiplierSpec<Scalar> multipliers;
  ConsistencyReport report;
};

/**
 * Recovers rewards and multipliers from a utility table.
 *
 * r(t) is the utility of the one-step trajectory ⟨t⟩. m(t) is solved from the
 * first enumerated follow-up τ of t with |u(τ)| > tolerance; every other
 * follow-up σ within the horizon becomes a residual check
 * u(t·σ) − r(t) − m(t)·u(σ). Transitions without a usable follow-up get m = 1
 * and are listed as undetermined. A nonpositive slope is reported, not clamped.
 */
template <typename Scalar>
AffineExtraction<Scalar> extract_affine(const Cmp& cmp, const BasicUtilityTable<Scalar>& table,
                                        double tolerance = kResidualTolerance) {
  if (table.horizon() < 2) {
    throw std::invalid_argument("affine extraction needs a table complete to horizon >= 2");
  }
  AffineExtraction<Scalar> out;
  out.report = detail::make_report("affine", table, tolerance);
  const Scalar pick(tolerance);
  const Scalar threshold = Scalar(tolerance) * table.scale();
  detail::FollowUps follow(cmp, table.horizon() - 1);

  for (const auto& t : cmp.legal_transitions()) {
    const Trajectory first = detail::single(t);
    const Scalar r = detail::lookup(cmp, table, first);
    out.rewards.values.emplace(t, r);

    const auto& candidates = follow.from(t.to);
    const Trajectory* basis = nullptr;
    for (const auto& tau : candidates) {
      if (!tau.empty() && magnitude(detail::lookup(cmp, table, tau)) > pick) {
        basis = &tau;
        break;
      }
    }

    Scalar m(1);
    if (basis) {
      m = (detail::lookup(cmp, table, concat(first, *basis)) - r) /
          detail::lookup(cmp, table, *basis);
      if (!(m > Scalar(0))) {
        out.report.add({WitnessKind::nonpositive_multiplier, t, {concat(first, *basis), *basis},
                        static_cast<double>(m), static_cast<double>(m)});
      }
    } else {
      out.multipliers.undetermined.insert(t);
      out.report.undetermined.push_back(t);
    }
    out.multipliers.values.emplace(t, m);

    for (const auto& sigma : candidates) {
      if (sigma.empty() || &sigma == basis) continue;
      const Trajectory composed = concat(first, sigma);
      const Scalar residual =
          detail::lookup(cmp, table, composed) - r - m * detail::lookup(cmp, table, sigma);
      if (magnitude(residual) > threshold) {
        out.report.add({WitnessKind::affine_residual, t, {composed, sigma},
                        static_cast<double>(residual), static_cast<double>(m)});
      }
    }
  }
  return out;
}

/**
 * Memorylessness up to the table horizon: consistent iff affine extraction is
 * consistent with every m > 0. On failure the witnesses also include ordinal
 * counterexamples (τ, L, M) where prefixing τ changes the order of L and M.
 */
template <typename Scalar>
ConsistencyReport check_memorylessness(const Cmp& cmp, const BasicUtilityTable<Scalar>& table,
                                       double tolerance = kResidualTolerance) {
  auto extraction = extract_affine(cmp, table, tolerance);
  ConsistencyReport report = std::move(extraction.report);
  report.check = "memoryless";
  if (report.consistent()) return report;

  const Scalar delta = Scalar(tolerance) * table.scale();
  const std::size_t horizon = table.horizon();
  std::vector<detail::FollowUps> follow;
  for (std::size_t len = 0; len < horizon; ++len) follow.emplace_back(cmp, len);

  for (const auto& [prefix, u_prefix] : table.entries()) {
    if (prefix.size() >= horizon) continue;
    const auto& futures = follow[horizon - prefix.size()].from(prefix.end());
    for (std::size_t i = 0; i < futures.size(); ++i) {
      const Scalar& u_l = detail::lookup(cmp, table, futures[i]);
      const Scalar& u_pl = detail::lookup(cmp, table, concat(prefix, futures[i]));
      for (std::size_t j = i + 1; j < futures.size(); ++j) {
        const Scalar& u_m = detail::lookup(cmp, table, futures[j]);
        const Scalar& u_pm = detail::lookup(cmp, table, concat(prefix, futures[j]));
        if (preference_sign(u_pl, u_pm, delta) != preference_sign(u_l, u_m, delta)) {
          report.add({WitnessKind::ordering_flip, std::nullopt,
                      {prefix, futures[i], futures[j]},
                      static_cast<double>((u_pl - u_pm) - (u_l - u_m)), 0.0});
          if (report.truncated) return report;
        }
      }
    }
  }
  return report;
}

namespace detail {

/// Exchange identity scan: for fixed (τ3, τ4) leaving s, the difference
/// u(τ1·τ3) − u(τ1·τ4) must not depend on the prefix τ1 ending at s.
template <typename Scalar>
void scan_exchange(const Cmp& cmp, const BasicUtilityTable<Scalar>& table, const Scalar& threshold,
                   ConsistencyReport& report) {
  const std::size_t horizon = table.horizon();
  std::vector<std::vector<Trajectory>> ending_at(cmp.num_states());
  for (StateIndex s = 0; s < cmp.num_states(); ++s) ending_at[s].emplace_back(s);
  for (const auto& [tau, u] : table.entries()) {
    if (tau.size() <= horizon && tau.end() < cmp.num_states()) ending_at[tau.end()].push_back(tau);
  }
  for (auto& list : ending_at) {
    std::stable_sort(list.begin(), list.end(),
                     [](const Trajectory& a, const Trajectory& b) { return a.size() < b.size(); });
  }

  // With ε as the only prefix the difference is constant, so suffixes longer
  // than horizon − 1 never produce a residual.
  for (StateIndex s = 0; s < cmp.num_states(); ++s) {
    const auto& prefixes = ending_at[s];
    if (prefixes.size() < 2 || horizon == 0) continue;
    const auto suffixes = enumerate_trajectories(cmp, s, horizon - 1);
    for (std::size_t i = 0; i < suffixes.size(); ++i) {
      for (std::size_t j = i + 1; j < suffixes.size(); ++j) {
        const std::size_t longest = std::max(suffixes[i].size(), suffixes[j].size());
        std::optional<Scalar> lo, hi;
        const Trajectory* lo_prefix = nullptr;
        const Trajectory* hi_prefix = nullptr;
        for (const auto& p : prefixes) {
          if (p.size() + longest > horizon) break;
          const Scalar d = lookup(cmp, table, concat(p, suffixes[i])) -
                           lookup(cmp, table, concat(p, suffixes[j]));
          if (!lo || d < *lo) { lo = d; lo_prefix = &p; }
          if (!hi || d > *hi) { hi = d; hi_prefix = &p; }
        }
        if (lo && *hi - *lo > threshold) {
          report.add({WitnessKind::exchange_residual, std::nullopt,
                      {*hi_prefix, *lo_prefix, suffixes[i], suffixes[j]},
                      static_cast<double>(*hi - *lo), 0.0});
          if (report.truncated) return;
        }
      }
    }
  }
}

template <typename Scalar>
ConsistencyReport additivity_report(const Cmp& cmp, const BasicUtilityTable<Scalar>& table,
                                    AffineExtraction<Scalar>& extraction, double tolerance) {
  ConsistencyReport report = extraction.report;
  report.check = "additive";
  for (const auto& [t, m] : extraction.multipliers.values) {
    if (extraction.multipliers.undetermined.count(t)) continue;
    if (magnitude(Scalar(m - Scalar(1))) > Scalar(tolerance)) {
      report.add({WitnessKind::multiplier_not_one, t, {}, static_cast<double>(m - Scalar(1)),
                  static_cast<double>(m)});
    }
  }
  if (!report.truncated) scan_exchange(cmp, table, Scalar(tolerance) * table.scale(), report);
  return report;
}

}  // namespace detail

/**
 * Additivity up to the table horizon: affine-consistent, every determined
 * multiplier equal to 1, and the exchange identity
 * u(τ1·τ3) + u(τ2·τ4) = u(τ1·τ4) + u(τ2·τ3) on every in-horizon quadruple
 * whose prefixes end where the suffixes start.
 */
template <typename Scalar>
ConsistencyReport check_additivity(const Cmp& cmp, const BasicUtilityTable<Scalar>& table,
                                   double tolerance = kResidualTolerance) {
  auto extraction = extract_affine(cmp, table, tolerance);
  return detail::additivity_report(cmp, table, extraction, tolerance);
}

/**
 * Pairwise dominance over composable splits: whenever τ̂1 ≿ τ1 and τ̂2 ≿ τ2,
 * τ̂1·τ̂2 ≿ τ1·τ2 must hold. Indifference slack from the two premises
 * accumulates, so a conclusion fails only beyond twice the threshold.
 * Quadratic in the number of table entries.
 */
template <typename Scalar>
ConsistencyReport check_dominance(const BasicUtilityTable<Scalar>& table,
                                  double tolerance = kResidualTolerance) {
  ConsistencyReport report = detail::make_report("dominance", table, tolerance);
  const Scalar delta = Scalar(tolerance) * table.scale();

  std::vector<Trajectory> composites;
  std::vector<StateIndex> anchors;
  for (const auto& [tau, u] : table.entries()) {
    anchors.push_back(tau.start());
    anchors.push_back(tau.end());
  }
  std::sort(anchors.begin(), anchors.end());
  anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
  for (StateIndex s : anchors) composites.emplace_back(s);
  for (const auto& [tau, u] : table.entries()) composites.push_back(tau);

  for (const auto& c : composites) {
    const Scalar& u_c = *table.find(c);
    for (const auto& hat : composites) {
      const Scalar& u_hat = *table.find(hat);
      if (!(u_c - u_hat > Scalar(2) * delta)) continue;
      for (std::size_t i = 0; i <= c.size(); ++i) {
        const Scalar* u1 = table.find(c.prefix(i));
        const Scalar* u2 = table.find(c.suffix(i));
        if (!u1 || !u2) continue;
        for (std::size_t j = 0; j <= hat.size(); ++j) {
          const Scalar* h1 = table.find(hat.prefix(j));
          const Scalar* h2 = table.find(hat.suffix(j));
          if (!h1 || !h2) continue;
          if (*u1 - *h1 <= delta && *u2 - *h2 <= delta) {
            report.add({WitnessKind::dominance, std::nullopt,
                        {hat.prefix(j), hat.suffix(j), c.prefix(i), c.suffix(i)},
                        static_cast<double>(u_c - u_hat), 0.0});
            if (report.truncated) return report;
          }
        }
      }
    }
  }
  return report;
}

template <typename Scalar>
struct PotentialExtraction {
  BasicPotential<Scalar> potential;
  ConsistencyReport report;
};

/**
 * Builds φ from additive rewards along a breadth-first spanning tree rooted at
 * `root` (neighbors in canonical transition order), then checks every legal
 * transition against φ(s') − φ(s). A failing edge t = (s, a, s') is witnessed
 * by the two root paths path(s)·t and path(s'), which share both endpoints but
 * differ in return by the residual r(t) − (φ(s') − φ(s)).
 */
template <typename Scalar>
PotentialExtraction<Scalar> extract_potential(const Cmp& cmp, const BasicRewardSpec<Scalar>& r,
                                              StateIndex root,
                                              double tolerance = kResidualTolerance) {
  if (root >= cmp.num_states()) throw std::invalid_argument("root state is not declared");
  const std::size_t n = cmp.num_states();
  std::vector<std::optional<Transition>> parent(n);
  std::vector<bool> seen(n, false);
  PotentialExtraction<Scalar> out;
  out.potential.root = root;
  out.potential.values = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(static_cast<Eigen::Index>(n));

  std::deque<StateIndex> queue{root};
  seen[root] = true;
  while (!queue.empty()) {
    const StateIndex s = queue.front();
    queue.pop_front();
    for (const auto& t : cmp.transitions_from(s)) {
      if (seen[t.to]) continue;
      seen[t.to] = true;
      parent[t.to] = t;
      out.potential.values(static_cast<Eigen::Index>(t.to)) =
          out.potential.values(static_cast<Eigen::Index>(s)) + r.at(t);
      queue.push_back(t.to);
    }
  }

  std::vector<StateIndex> unreachable;
  std::string names;
  for (StateIndex s = 0; s < n; ++s) {
    if (seen[s]) continue;
    unreachable.push_back(s);
    names += (names.empty() ? "" : ", ") + cmp.state_name(s);
  }
  if (!unreachable.empty()) {
    throw UnreachableStates(unreachable, "states unreachable from " + cmp.state_name(root) + ": " + names);
  }

  auto path_to = [&](StateIndex s) {
    std::vector<Transition> steps;
    for (StateIndex at = s; parent[at]; at = parent[at]->from) steps.push_back(*parent[at]);
    std::reverse(steps.begin(), steps.end());
    return Trajectory(root, std::move(steps));
  };

  Scalar scale(1);
  for (const auto& [t, value] : r.values) scale = std::max(scale, magnitude(value));
  out.report.check = "potential";
  out.report.tolerance = tolerance;
  out.report.scale = static_cast<double>(scale);
  const Scalar threshold = Scalar(tolerance) * scale;
  const auto& phi = out.potential;
  for (const auto& t : cmp.legal_transitions()) {
    const Scalar residual = r.at(t) - (phi.at(t.to) - phi.at(t.from));
    if (magnitude(residual) > threshold) {
      out.report.add({WitnessKind::potential_residual, t, {path_to(t.from).extended(t), path_to(t.to)},
                      static_cast<double>(residual), static_cast<double>(r.at(t))});
    }
  }
  return out;
}

/**
 * Path-obliviousness up to the table horizon: additivity first, then a
 * potential over the extracted rewards. `stage` names the failing stage.
 */
template <typename Scalar>
ConsistencyReport check_path_obliviousness(const Cmp& cmp, const BasicUtilityTable<Scalar>& table,
                                           StateIndex root,
                                           double tolerance = kResidualTolerance) {
  auto extraction = extract_affine(cmp, table, tolerance);
  ConsistencyReport report = detail::additivity_report(cmp, table, extraction, tolerance);
  report.check = "path-oblivious";
  if (!report.consistent()) {
    report.stage = "additive";
    return report;
  }
  auto potential = extract_potential(cmp, extraction.rewards, root, tolerance);
  report.witnesses = std::move(potential.report.witnesses);
  report.status = potential.report.status;
  report.truncated = potential.report.truncated;
  if (!report.consistent()) report.stage = "potential";
  return report;
}

/**
 * Extends utilities known only for trajectories from s0 to every state
 * reachable from s0, assuming additivity: u(τ) = u(τ0·τ) − u(τ0) for the first
 * enumerated connector τ0 (a trajectory from s0 to τ's start) that keeps τ0·τ
 * within the horizon. Every other such connector must agree; disagreements
 * are returned as a violation report instead of a table.
 *
 * The completed table covers reachable states only; its declared horizon is
 * the partial horizon minus the longest shortest-connector length.
 */
template <typename Scalar>
std::variant<BasicUtilityTable<Scalar>, ConsistencyReport> complete_partial(
    const Cmp& cmp, const BasicUtilityTable<Scalar>& partial, StateIndex s0,
    double tolerance = kResidualTolerance) {
  if (s0 >= cmp.num_states()) throw std::invalid_argument("root state is not declared");
  for (const auto& [tau, u] : partial.entries()) {
    if (tau.start() != s0) {
      throw std::invalid_argument("partial table keys " + describe(cmp, tau) +
                                  ", which does not start at " + cmp.state_name(s0));
    }
  }
  const std::size_t horizon = partial.horizon();
  std::vector<std::vector<Trajectory>> connectors(cmp.num_states());
  for (auto& tau : enumerate_trajectories(cmp, s0, horizon)) connectors[tau.end()].push_back(std::move(tau));

  std::vector<bool> reachable(cmp.num_states(), false);
  std::deque<StateIndex> queue{s0};
  reachable[s0] = true;
  while (!queue.empty()) {
    StateIndex s = queue.front();
    queue.pop_front();
    for (const auto& t : cmp.transitions_from(s)) {
      if (!reachable[t.to]) {
        reachable[t.to] = true;
        queue.push_back(t.to);
      }
    }
  }

  std::size_t deepest = 0;
  for (StateIndex s = 0; s < cmp.num_states(); ++s) {
    if (!reachable[s]) continue;
    if (connectors[s].empty()) {
      throw std::invalid_argument("state " + cmp.state_name(s) + " is reachable from " +
                                  cmp.state_name(s0) + " but no connector fits in horizon " +
                                  std::to_string(horizon));
    }
    deepest = std::max(deepest, connectors[s].front().size());
  }

  ConsistencyReport report = detail::make_report("complete", partial, tolerance);
  const Scalar threshold = Scalar(tolerance) * partial.scale();
  BasicUtilityTable<Scalar> completed(horizon - deepest);
  for (StateIndex s = 0; s < cmp.num_states(); ++s) {
    if (!reachable[s]) continue;
    const auto& via = connectors[s];
    for (const auto& tau : enumerate_trajectories(cmp, s, horizon - via.front().size())) {
      if (tau.empty()) continue;
      auto derived = [&](const Trajectory& connector) {
        return detail::lookup(cmp, partial, concat(connector, tau)) -
               detail::lookup(cmp, partial, connector);
      };
      const Scalar base = derived(via.front());
      completed.set(tau, base);
      for (std::size_t k = 1; k < via.size(); ++k) {
        if (via[k].size() + tau.size() > horizon) break;
        const Scalar alt = derived(via[k]);
        if (magnitude(Scalar(alt - base)) > threshold) {
          report.add({WitnessKind::connector_mismatch, std::nullopt, {tau, via.front(), via[k]},
                      static_cast<double>(alt - base), static_cast<double>(base)});
          if (report.truncated) return report;
        }
      }
    }
  }
  if (!report.consistent()) return report;
  return completed;
}

template <typename Scalar>
struct Canonical {
  BasicRewardSpec<Scalar> rewards;
  std::optional<BasicMultiplierSpec<Scalar>> multipliers;
  std::optional<BasicPotential<Scalar>> potential;
  /// The divisor applied to r (and φ): max |r|, or 1 when r ≡ 0.
  Scalar factor = Scalar(1);
};

/**
 * Representative of the positive-scaling class: r divided by max |r| (left
 * alone when r ≡ 0), m untouched, φ shifted to vanish at its root and divided
 * by the same factor as r.
 */
template <typename Scalar>
Canonical<Scalar> canonicalize(const BasicRewardSpec<Scalar>& r,
                               const BasicMultiplierSpec<Scalar>* m = nullptr,
                               const BasicPotential<Scalar>* phi = nullptr) {
  Canonical<Scalar> out;
  Scalar largest(0);
  for (const auto& [t, value] : r.values) largest = std::max(largest, magnitude(value));
  if (largest > Scalar(0)) out.factor = largest;
  out.rewards = r;
  for (auto& [t, value] : out.rewards.values) value = value / out.factor;
  if (m) out.multipliers = *m;
  if (phi) {
    BasicPotential<Scalar> shifted = *phi;
    const Scalar origin = phi->at(phi->root);
    for (Eigen::Index i = 0; i < shifted.values.size(); ++i) {
      shifted.values(i) = (shifted.values(i) - origin) / out.factor;
    }
    out.potential = std::move(shifted);
  }
  return out;
}

}  // namespace sequtil
