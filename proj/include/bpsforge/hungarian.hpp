#pragma once

#include <vector>

namespace bpsforge {

// Kuhn-Munkres assignment on a square cost matrix (potentials + augmenting
// paths, O(n^3)). Returns the minimal total cost; assignment[row] = column.
double hungarian(const std::vector<std::vector<double>>& cost, std::vector<int>& assignment);

}  // namespace bpsforge
