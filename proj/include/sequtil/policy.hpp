#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sequtil/cmp.hpp"

namespace sequtil {

/// π: S → 𝒟(A), one row per state, one column per action. Dead-end rows are zero.
struct MemorylessPolicy {
  Eigen::MatrixXd probabilities;

  static MemorylessPolicy uniform(const Cmp& cmp);
  /// One action per state; nullopt only for dead ends.
  static MemorylessPolicy deterministic(const Cmp& cmp,
                                        const std::vector<std::optional<ActionIndex>>& actions);

  /// Most probable action (lowest index on ties), nullopt on a zero row.
  std::optional<ActionIndex> action(StateIndex s) const;
};

/// Problems with pi for cmp (shape, illegal support, rows not summing to 1);
/// empty when the policy is usable.
std::vector<std::string> validate_policy(const Cmp& cmp, const MemorylessPolicy& pi);

/**
 * Samples one trajectory by alternating π, ℙ and 𝕋 from `start`; stops on a
 * sampled termination, at a dead end, or after max_len steps. The draw uses a
 * fixed 64-bit Mersenne Twister stream so equal inputs give equal output on
 * every platform.
 */
Trajectory sample_trajectory(const Cmp& cmp, StateIndex start, const MemorylessPolicy& pi,
                             std::uint64_t seed, std::size_t max_len);

/// `count` consecutive samples from one seeded stream; the first equals
/// sample_trajectory with the same seed.
std::vector<Trajectory> sample_trajectories(const Cmp& cmp, StateIndex start,
                                            const MemorylessPolicy& pi, std::uint64_t seed,
                                            std::size_t max_len, std::size_t count);

}  // namespace sequtil
