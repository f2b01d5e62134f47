#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sbmkit/graph.hpp"

namespace sbmkit {

// Data-parallel kernels. Every OMP variant partitions work so that each
// output element is accumulated by exactly one thread in the same order as
// the serial reference, so the two produce bit-identical results. The
// serial versions are kept as the test reference and for the benchmark.

// y = A x over the CSR adjacency.
void adjacency_matvec_serial(const Graph& g, const double* x, double* y);
void adjacency_matvec_omp(const Graph& g, const double* x, double* y);

// y = D^{-1/2} A D^{-1/2} x, with scale[i] = deg(i)^{-1/2} (0 for isolated).
void laplacian_matvec_serial(const Graph& g, const std::vector<double>& scale,
                             const double* x, double* y);
void laplacian_matvec_omp(const Graph& g, const std::vector<double>& scale,
                          const double* x, double* y);

// Per-point log-density table for a Gaussian mixture. logp is n x k,
// logp(i,k) = log w_k + log N(x_i; mu_k, Sigma_k); inputs are prepared by
// the caller (Cholesky factors etc. folded into per-component callables is
// overkill here, the concrete families are few).
struct ComponentDensity {
  double log_weight;
  Eigen::VectorXd mean;
  // family-resolved evaluation pieces:
  // spherical/diagonal: inv_var (length D), log_norm = -0.5*(D log 2pi + log|Sigma|)
  // full: chol_inv (D x D lower inverse factor L^{-1} with Sigma = L L^T)
  Eigen::VectorXd inv_var;
  Eigen::MatrixXd chol_inv;
  double log_norm;
  bool full;
};

void gmm_log_density_serial(const Eigen::MatrixXd& points,
                            const std::vector<ComponentDensity>& comps,
                            Eigen::MatrixXd& logp);
void gmm_log_density_omp(const Eigen::MatrixXd& points,
                         const std::vector<ComponentDensity>& comps,
                         Eigen::MatrixXd& logp);

}  // namespace sbmkit
