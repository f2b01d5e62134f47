#include "sbmkit/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sbmkit {

void adjacency_matvec_serial(const Graph& g, const double* x, double* y) {
  const auto& off = g.offsets();
  const auto& nbr = g.neighbors();
  const int n = g.num_vertices();
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int p = off[i]; p < off[i + 1]; ++p) acc += x[nbr[p]];
    y[i] = acc;
  }
}

void adjacency_matvec_omp(const Graph& g, const double* x, double* y) {
  const auto& off = g.offsets();
  const auto& nbr = g.neighbors();
  const int n = g.num_vertices();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int p = off[i]; p < off[i + 1]; ++p) acc += x[nbr[p]];
    y[i] = acc;
  }
}

void laplacian_matvec_serial(const Graph& g, const std::vector<double>& scale,
                             const double* x, double* y) {
  const auto& off = g.offsets();
  const auto& nbr = g.neighbors();
  const int n = g.num_vertices();
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int p = off[i]; p < off[i + 1]; ++p) acc += scale[nbr[p]] * x[nbr[p]];
    y[i] = scale[i] * acc;
  }
}

void laplacian_matvec_omp(const Graph& g, const std::vector<double>& scale,
                          const double* x, double* y) {
  const auto& off = g.offsets();
  const auto& nbr = g.neighbors();
  const int n = g.num_vertices();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int p = off[i]; p < off[i + 1]; ++p) acc += scale[nbr[p]] * x[nbr[p]];
    y[i] = scale[i] * acc;
  }
}

namespace {
inline double point_log_density(const Eigen::VectorXd& x, const ComponentDensity& c) {
  if (c.full) {
    Eigen::VectorXd z = c.chol_inv * (x - c.mean);
    return c.log_weight + c.log_norm - 0.5 * z.squaredNorm();
  }
  double q = 0.0;
  for (int d = 0; d < x.size(); ++d) {
    double diff = x[d] - c.mean[d];
    q += diff * diff * c.inv_var[d];
  }
  return c.log_weight + c.log_norm - 0.5 * q;
}
}  // namespace

void gmm_log_density_serial(const Eigen::MatrixXd& points,
                            const std::vector<ComponentDensity>& comps,
                            Eigen::MatrixXd& logp) {
  const int n = static_cast<int>(points.rows());
  const int k = static_cast<int>(comps.size());
  logp.resize(n, k);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x = points.row(i);
    for (int c = 0; c < k; ++c) logp(i, c) = point_log_density(x, comps[c]);
  }
}

void gmm_log_density_omp(const Eigen::MatrixXd& points,
                         const std::vector<ComponentDensity>& comps,
                         Eigen::MatrixXd& logp) {
  const int n = static_cast<int>(points.rows());
  const int k = static_cast<int>(comps.size());
  logp.resize(n, k);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x = points.row(i);
    for (int c = 0; c < k; ++c) logp(i, c) = point_log_density(x, comps[c]);
  }
}

}  // namespace sbmkit
