#pragma once

#include <vector>

#include "sequtil/cmp.hpp"
#include "sequtil/report.hpp"

namespace sequtil {

enum class Relation { strict, indifferent };

/// One raw preference statement: left ≻ right or left ≈ right.
struct Comparison {
  Trajectory left;
  Relation relation = Relation::strict;
  Trajectory right;
};

/**
 * Necessary-condition checks on raw pairwise preferences: totality over the
 * mentioned outcomes, no pair stated both ways with one side strict, and no
 * a ≿ b ≿ c with c ≻ a. Passing does not establish the lottery axioms.
 */
ConsistencyReport check_pairwise(const std::vector<Comparison>& comparisons);

}  // namespace sequtil
