// Timing comparison of the serial reference kernels vs the OpenMP variants.

#include <chrono>
#include <iostream>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sbmkit/gmm.hpp"
#include "sbmkit/kernels.hpp"
#include "sbmkit/rng.hpp"
#include "sbmkit/sbm.hpp"

using namespace sbmkit;
using Clock = std::chrono::steady_clock;

namespace {

template <typename F>
double time_ms(F&& body, int reps) {
  // warm-up
  body();
  auto start = Clock::now();
  for (int r = 0; r < reps; ++r) body();
  auto end = Clock::now();
  return std::chrono::duration<double, std::milli>(end - start).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  int n = argc > 1 ? std::atoi(argv[1]) : 20000;
  int reps = argc > 2 ? std::atoi(argv[2]) : 20;

  auto params = SbmParams::planted(4, 0.01, 0.002);
  auto sample = sample_sbm(n, params, 42);
  const Graph& g = sample.graph;
  std::cout << "graph: n=" << n << " edges=" << g.num_edges();
#ifdef _OPENMP
  std::cout << " threads=" << omp_get_max_threads();
#endif
  std::cout << "\n";

  RngStream rng(7);
  std::vector<double> x(n), y(n);
  for (double& v : x) v = rng.normal();

  double t_serial = time_ms([&] { adjacency_matvec_serial(g, x.data(), y.data()); }, reps);
  double t_omp = time_ms([&] { adjacency_matvec_omp(g, x.data(), y.data()); }, reps);
  std::cout << "adjacency matvec   serial " << t_serial << " ms   omp " << t_omp
            << " ms   speedup " << t_serial / t_omp << "x\n";

  std::vector<double> scale(n, 1.0);
  t_serial = time_ms([&] { laplacian_matvec_serial(g, scale, x.data(), y.data()); }, reps);
  t_omp = time_ms([&] { laplacian_matvec_omp(g, scale, x.data(), y.data()); }, reps);
  std::cout << "laplacian matvec   serial " << t_serial << " ms   omp " << t_omp
            << " ms   speedup " << t_serial / t_omp << "x\n";

  // GMM log-density table, n points x 8 components in R^6
  const int d = 6, k = 8, npts = 50000;
  Eigen::MatrixXd pts(npts, d);
  for (int i = 0; i < npts; ++i)
    for (int c = 0; c < d; ++c) pts(i, c) = rng.normal();
  std::vector<ComponentDensity> comps(k);
  for (int c = 0; c < k; ++c) {
    comps[c].log_weight = -std::log(static_cast<double>(k));
    comps[c].mean = Eigen::VectorXd::Constant(d, c * 0.5);
    comps[c].inv_var = Eigen::VectorXd::Ones(d);
    comps[c].log_norm = -0.5 * d * std::log(2.0 * M_PI);
    comps[c].full = false;
  }
  Eigen::MatrixXd logp;
  t_serial = time_ms([&] { gmm_log_density_serial(pts, comps, logp); }, reps);
  t_omp = time_ms([&] { gmm_log_density_omp(pts, comps, logp); }, reps);
  std::cout << "gmm log-density    serial " << t_serial << " ms   omp " << t_omp
            << " ms   speedup " << t_serial / t_omp << "x\n";
  return 0;
}
