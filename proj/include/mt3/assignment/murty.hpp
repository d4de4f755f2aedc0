#pragma once

#include "mt3/assignment/hungarian.hpp"

#include <vector>

namespace mt3::assignment {

/// K best assignments in nondecreasing cost order (Murty's partitioning with
/// the Hungarian method as inner solver). Returns fewer than k entries when
/// fewer feasible assignments exist. Among equal-cost candidates the
/// lexicographically smaller row_to_col is emitted first.
///
/// Throws InfeasibleError when not even one assignment exists.
std::vector<Assignment> murty_kbest(const CostMatrix& c, std::size_t k);

}  // namespace mt3::assignment
