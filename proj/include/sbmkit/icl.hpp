#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "sbmkit/graph.hpp"
#include "sbmkit/partition.hpp"

namespace sbmkit {

// Variational EM fit of an SBM with K blocks (mean-field, Daudin-style),
// scored by the integrated classification likelihood.
struct IclFit {
  int K = 0;
  Eigen::MatrixXd tau;    // n x K responsibilities, row-stochastic
  Eigen::VectorXd alpha;  // mixing estimate
  Eigen::MatrixXd eta;    // K x K connectivity estimate, symmetric
  double objective = 0.0;  // variational lower bound at the kept restart
  double icl = 0.0;
  bool converged = false;
  Partition labels;
};

struct IclOptions {
  double tol = 1e-4;  // max tau change
  int max_iter = 200;
  int restarts = 3;
  std::uint64_t seed = 1;
};

IclFit icl_fit(const Graph& g, int K, const IclOptions& opts = {});

struct IclSelection {
  IclFit best;
  std::vector<std::pair<int, double>> table;  // (K, ICL)
};

// Fits K = 1..K_max, returns the max-ICL fit; ties toward smaller K.
IclSelection icl_select(const Graph& g, int k_max, const IclOptions& opts = {});

}  // namespace sbmkit
