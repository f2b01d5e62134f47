#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sbmkit/graph.hpp"
#include "sbmkit/rng.hpp"

namespace sbmkit {

// Stochastic blockmodel parameters: K blocks, membership probabilities pi,
// symmetric block probability matrix B.
struct SbmParams {
  int K = 1;
  std::vector<double> pi;
  Eigen::MatrixXd B;

  // Throws on invalid pi (sum != 1 within 1e-12; no silent renormalization),
  // asymmetric B, or entries outside [0,1].
  void validate() const;

  static SbmParams planted(int K, double p_in, double p_out);
  static SbmParams from_json_file(const std::string& path);
  std::string to_json() const;
};

using BlockLabels = std::vector<int>;

struct SbmSample {
  Graph graph;
  BlockLabels labels;
};

// Latent position graph: positions i.i.d. from a sampler on R^D, edge
// probability link(x_i, x_j).
struct LatentPositionModel {
  int dimension = 1;
  std::function<Eigen::VectorXd(RngStream&)> position_sampler;
  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> link;
};

struct LatentPositionSample {
  Graph graph;
  Eigen::MatrixXd positions;  // n x D
};

// Draw order is fixed: all n labels first, then pairs (i,j), i<j, in
// lexicographic order, so the same seed reproduces the same graph.
SbmSample sample_sbm(int n, const SbmParams& params, std::uint64_t seed);

LatentPositionSample sample_latent_position_graph(int n, const LatentPositionModel& model,
                                                  std::uint64_t seed,
                                                  bool keep_positions = true);

// Block-density MLE for reporting a fitted B-hat; zero-pair blocks get 0.
SbmParams estimate_block_matrix(const Graph& g, const BlockLabels& labels);

}  // namespace sbmkit
