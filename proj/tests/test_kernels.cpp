#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "sbmkit/kernels.hpp"
#include "sbmkit/rng.hpp"
#include "sbmkit/sbm.hpp"

using namespace sbmkit;

namespace {

std::vector<double> laplacian_scale(const Graph& g) {
  std::vector<double> scale(g.num_vertices());
  for (int i = 0; i < g.num_vertices(); ++i) {
    int deg = g.offsets()[i + 1] - g.offsets()[i];
    scale[i] = deg > 0 ? 1.0 / std::sqrt(static_cast<double>(deg)) : 0.0;
  }
  return scale;
}

std::vector<ComponentDensity> random_components(int k, int d, bool full, RngStream& rng) {
  std::vector<ComponentDensity> comps(k);
  for (auto& c : comps) {
    c.log_weight = -std::log(static_cast<double>(k));
    c.mean = Eigen::VectorXd::NullaryExpr(d, [&](int) { return rng.normal(); });
    c.full = full;
    if (full) {
      Eigen::MatrixXd a =
          Eigen::MatrixXd::NullaryExpr(d, d, [&](int, int) { return rng.normal(); });
      Eigen::MatrixXd cov = a * a.transpose() + Eigen::MatrixXd::Identity(d, d);
      Eigen::LLT<Eigen::MatrixXd> llt(cov);
      c.chol_inv = Eigen::MatrixXd(llt.matrixL()).inverse();
      c.log_norm = -0.5 * (d * std::log(2.0 * M_PI) + std::log(cov.determinant()));
    } else {
      Eigen::VectorXd var =
          Eigen::VectorXd::NullaryExpr(d, [&](int) { return 0.1 + rng.uniform(); });
      c.inv_var = var.cwiseInverse();
      c.log_norm = -0.5 * (d * std::log(2.0 * M_PI) + var.array().log().sum());
    }
  }
  return comps;
}

}  // namespace

TEST_CASE("adjacency matvec: OMP is bit-identical to serial") {
  RngStream rng(81);
  for (int trial = 0; trial < 5; ++trial) {
    auto sample = sample_sbm(400, SbmParams::planted(3, 0.3, 0.05), derive_seed(600, trial));
    const Graph& g = sample.graph;
    std::vector<double> x(g.num_vertices()), ys(g.num_vertices()), yp(g.num_vertices());
    for (double& v : x) v = rng.normal();
    adjacency_matvec_serial(g, x.data(), ys.data());
    adjacency_matvec_omp(g, x.data(), yp.data());
    CHECK(ys == yp);
  }
}

TEST_CASE("laplacian matvec: OMP is bit-identical to serial, isolated vertices map to 0") {
  RngStream rng(82);
  auto sample = sample_sbm(300, SbmParams::planted(2, 0.2, 0.02), 601);
  // append an isolated vertex
  std::vector<std::pair<int, int>> edges(sample.graph.edges().begin(),
                                         sample.graph.edges().end());
  Graph g = Graph::from_edges(301, edges);
  auto scale = laplacian_scale(g);
  std::vector<double> x(301), ys(301), yp(301);
  for (double& v : x) v = rng.normal();
  laplacian_matvec_serial(g, scale, x.data(), ys.data());
  laplacian_matvec_omp(g, scale, x.data(), yp.data());
  CHECK(ys == yp);
  CHECK(ys[300] == 0.0);
}

TEST_CASE("adjacency matvec agrees with the dense product") {
  RngStream rng(83);
  auto sample = sample_sbm(120, SbmParams::planted(2, 0.4, 0.1), 602);
  const Graph& g = sample.graph;
  Eigen::MatrixXd a = g.dense_adjacency();
  Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(120, [&](int) { return rng.normal(); });
  Eigen::VectorXd expect = a * x;
  std::vector<double> y(120);
  adjacency_matvec_serial(g, x.data(), y.data());
  for (int i = 0; i < 120; ++i) CHECK(y[i] == doctest::Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("gmm log-density: OMP is bit-identical to serial for both layouts") {
  RngStream rng(84);
  for (bool full : {false, true}) {
    Eigen::MatrixXd points =
        Eigen::MatrixXd::NullaryExpr(500, 3, [&](int, int) { return rng.normal(); });
    auto comps = random_components(4, 3, full, rng);
    Eigen::MatrixXd ls(500, 4), lp(500, 4);
    gmm_log_density_serial(points, comps, ls);
    gmm_log_density_omp(points, comps, lp);
    CHECK(ls == lp);
  }
}

TEST_CASE("gmm log-density matches a direct evaluation") {
  RngStream rng(85);
  Eigen::MatrixXd points =
      Eigen::MatrixXd::NullaryExpr(50, 2, [&](int, int) { return rng.normal(); });
  auto comps = random_components(3, 2, true, rng);
  Eigen::MatrixXd logp(50, 3);
  gmm_log_density_serial(points, comps, logp);
  for (int i = 0; i < 50; ++i)
    for (int c = 0; c < 3; ++c) {
      // reconstruct Sigma from the stored L^{-1} and evaluate the density
      Eigen::MatrixXd l_inv = comps[c].chol_inv;
      Eigen::MatrixXd prec = l_inv.transpose() * l_inv;
      Eigen::VectorXd diff = points.row(i).transpose() - comps[c].mean;
      double expect = comps[c].log_weight + comps[c].log_norm -
                      0.5 * diff.dot(prec * diff);
      CHECK(logp(i, c) == doctest::Approx(expect).epsilon(1e-10));
    }
}
