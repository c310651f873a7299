#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sequtil/cmp.hpp"

namespace sequtil {

inline constexpr double kResidualTolerance = 1e-9;
inline constexpr std::size_t kMaxWitnesses = 256;

enum class Status { consistent, violated };

enum class WitnessKind {
  affine_residual,         // u(t·σ) − r(t) − m(t)·u(σ) ≠ 0
  nonpositive_multiplier,  // extracted m(t) ≤ 0
  ordering_flip,           // prefix τ reverses the order of two follow-ups
  multiplier_not_one,      // determined m(t) ≠ 1 under additivity
  exchange_residual,       // u(τ1·τ3) + u(τ2·τ4) − u(τ1·τ4) − u(τ2·τ3) ≠ 0
  dominance,               // τ̂1 ≿ τ1, τ̂2 ≿ τ2 but τ1·τ2 ≻ τ̂1·τ̂2
  potential_residual,      // two root paths to the same state disagree
  connector_mismatch,      // two connectors give different completed utilities
  incomparable,            // pairwise data: no relation recorded between two outcomes
  strict_conflict,         // pairwise data: both a ≻ b and b ≿ a
  intransitive,            // pairwise data: a ≿ b ≿ c but c ≻ a
};

std::string_view to_string(WitnessKind kind);
std::string_view to_string(Status status);

/// One violation: what was checked, where, and by how much it failed.
struct Witness {
  WitnessKind kind = WitnessKind::affine_residual;
  std::optional<Transition> transition;
  std::vector<Trajectory> trajectories;
  double residual = 0.0;
  double value = 0.0;
};

/**
 * Outcome of a finite consistency check. Verdicts hold up to the table's
 * horizon only. Witness lists are capped at `max_witnesses`; `truncated`
 * marks that more were found.
 */
struct ConsistencyReport {
  std::string check;
  std::string stage;
  Status status = Status::consistent;
  std::vector<Witness> witnesses;
  std::vector<Transition> undetermined;
  std::size_t horizon = 0;
  double tolerance = kResidualTolerance;
  double scale = 1.0;
  std::size_t max_witnesses = kMaxWitnesses;
  bool truncated = false;

  bool consistent() const { return status == Status::consistent; }
  /// Marks the report violated; past the cap only sets `truncated`, so scans
  /// may stop once it is set.
  void add(Witness w);
};

}  // namespace sequtil
