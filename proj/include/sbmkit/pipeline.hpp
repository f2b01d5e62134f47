#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sbmkit/embedding.hpp"
#include "sbmkit/gmm.hpp"
#include "sbmkit/graph.hpp"

namespace sbmkit {

struct ClusterResult {
  Partition partition;
  GmmModel model;
  std::vector<SelectionEntry> table;
  Embedding embedding;
  int dim_used = 0;
  bool dim_estimated = false;
};

struct ClusterOptions {
  std::optional<int> dim;  // absent: Zhu-Ghodsi on the scree
  int k_max = 10;
  std::vector<CovarianceFamily> families{kAllFamilies.begin(), kAllFamilies.end()};
  EigenOrder order = EigenOrder::LargestMagnitude;
  GmmOptions gmm;
  EigenSolverOptions eig;
  int scree_cap = 100;
};

// Embedding + BIC model selection end to end (ASE when source=Adjacency,
// LAP when source=Laplacian).
ClusterResult cluster_vertices(const Graph& g, EmbeddingSource source,
                               const ClusterOptions& opts = {});

}  // namespace sbmkit
