#pragma once

#include <cstdint>

#include "sbmkit/graph.hpp"
#include "sbmkit/partition.hpp"

namespace sbmkit {

// Newman-Girvan modularity with resolution gamma:
// Q = sum_c [ e_c/m - gamma*(d_c/2m)^2 ]; 0 on edgeless graphs.
double modularity(const Graph& g, const Partition& p, double resolution = 1.0);

// Two-phase Louvain: seeded-shuffle local moves, then aggregation, repeated
// until no modularity gain. Deterministic given seed.
Partition louvain(const Graph& g, std::uint64_t seed, double resolution = 1.0);

}  // namespace sbmkit
