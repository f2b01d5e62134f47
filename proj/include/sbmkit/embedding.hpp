#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sbmkit/eigen_solver.hpp"
#include "sbmkit/graph.hpp"

namespace sbmkit {

enum class EmbeddingSource { Adjacency, Laplacian };

struct Embedding {
  Eigen::MatrixXd coords;     // n x D, column i = v_i * sqrt(|lambda_i|)
  EmbeddingSource source = EmbeddingSource::Adjacency;
  Eigen::VectorXd eigenvalues;
};

SymmetricOp adjacency_op(const Graph& g);
// Normalized Laplacian D^{-1/2} A D^{-1/2}; isolated vertices get zero rows.
SymmetricOp laplacian_op(const Graph& g, std::vector<double>& scale_storage);

Embedding ase_embed(const Graph& g, int d, EigenOrder order = EigenOrder::LargestMagnitude,
                    const EigenSolverOptions& opts = {});
Embedding lap_embed(const Graph& g, int d, EigenOrder order = EigenOrder::LargestMagnitude,
                    const EigenSolverOptions& opts = {});

Embedding embed(const Graph& g, EmbeddingSource source, int d,
                EigenOrder order = EigenOrder::LargestMagnitude,
                const EigenSolverOptions& opts = {});

// Zhu-Ghodsi elbow: argmax over split points q of the two-group Gaussian
// profile log-likelihood with pooled common variance; ties toward smaller q.
// Input must be sorted descending.
int estimate_dimension(const std::vector<double>& magnitudes);

// Top min(n, cap) eigenvalue magnitudes of the chosen matrix, descending.
std::vector<double> scree_magnitudes(const Graph& g, EmbeddingSource source, int cap = 100,
                                     const EigenSolverOptions& opts = {});

void save_embedding_files(const Embedding& e, const std::string& csv_path,
                          const std::string& sidecar_path);

}  // namespace sbmkit
