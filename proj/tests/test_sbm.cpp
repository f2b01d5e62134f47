#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>

#include "sbmkit/rng.hpp"
#include "sbmkit/sbm.hpp"

using namespace sbmkit;

TEST_CASE("params validation") {
  SbmParams p = SbmParams::planted(2, 0.8, 0.1);
  CHECK_NOTHROW(p.validate());

  SbmParams bad_pi = p;
  bad_pi.pi = {0.6, 0.6};
  CHECK_THROWS(bad_pi.validate());

  SbmParams asym = p;
  asym.B(0, 1) = 0.2;
  CHECK_THROWS(asym.validate());

  SbmParams out_of_range = p;
  out_of_range.B(0, 0) = 1.5;
  CHECK_THROWS(out_of_range.validate());
}

TEST_CASE("B=[[1]] gives the complete graph") {
  SbmParams p;
  p.K = 1;
  p.pi = {1.0};
  p.B = Eigen::MatrixXd::Constant(1, 1, 1.0);
  auto sample = sample_sbm(4, p, 3);
  CHECK(sample.graph.num_edges() == 6);
}

TEST_CASE("B=0 gives the empty graph") {
  SbmParams p;
  p.K = 2;
  p.pi = {0.5, 0.5};
  p.B = Eigen::MatrixXd::Zero(2, 2);
  auto sample = sample_sbm(10, p, 3);
  CHECK(sample.graph.num_edges() == 0);
}

TEST_CASE("empirical block densities concentrate around B") {
  auto params = SbmParams::planted(2, 0.8, 0.1);
  auto sample = sample_sbm(2000, params, 99);
  auto est = estimate_block_matrix(sample.graph, sample.labels);
  // 3-sigma binomial bound is well inside +-0.03 at this n
  CHECK(std::abs(est.B(0, 0) - 0.8) < 0.03);
  CHECK(std::abs(est.B(1, 1) - 0.8) < 0.03);
  CHECK(std::abs(est.B(0, 1) - 0.1) < 0.03);
}

TEST_CASE("sampling is reproducible bit for bit") {
  auto params = SbmParams::planted(3, 0.4, 0.05);
  auto a = sample_sbm(200, params, 1234);
  auto b = sample_sbm(200, params, 1234);
  CHECK(a.labels == b.labels);
  CHECK(a.graph.edges() == b.graph.edges());
  auto c = sample_sbm(200, params, 1235);
  CHECK(a.graph.edges() != c.graph.edges());
}

TEST_CASE("expected edge count matches realized labels over many seeds") {
  auto params = SbmParams::planted(2, 0.5, 0.1);
  const int n = 60, reps = 100;
  double total_observed = 0.0, total_expected = 0.0, total_var = 0.0;
  for (int r = 0; r < reps; ++r) {
    auto sample = sample_sbm(n, params, derive_seed(77, r));
    total_observed += static_cast<double>(sample.graph.num_edges());
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double p = params.B(sample.labels[i], sample.labels[j]);
        total_expected += p;
        total_var += p * (1.0 - p);
      }
  }
  double sigma = std::sqrt(total_var);
  CHECK(std::abs(total_observed - total_expected) < 4.0 * sigma);
}

TEST_CASE("latent position point mass with unit link is complete") {
  LatentPositionModel model;
  model.dimension = 1;
  model.position_sampler = [](RngStream&) { return Eigen::VectorXd::Ones(1); };
  model.link = [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return 1.0; };
  auto sample = sample_latent_position_graph(5, model, 1);
  CHECK(sample.graph.num_edges() == 10);
}

TEST_CASE("zero link gives the empty graph") {
  LatentPositionModel model;
  model.dimension = 1;
  model.position_sampler = [](RngStream& rng) {
    return Eigen::VectorXd::Constant(1, rng.normal());
  };
  model.link = [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return 0.0; };
  auto sample = sample_latent_position_graph(8, model, 1);
  CHECK(sample.graph.num_edges() == 0);
}

TEST_CASE("invalid link output names the offending pair") {
  LatentPositionModel model;
  model.dimension = 1;
  model.position_sampler = [](RngStream&) { return Eigen::VectorXd::Ones(1); };
  model.link = [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return 1.5; };
  CHECK_THROWS_WITH_AS(sample_latent_position_graph(3, model, 1),
                       doctest::Contains("link(0,1)"), std::runtime_error);
}

// The SBM is the point-mass special case of the latent position graph: with
// F a categorical point-mass mixture and the B-lookup link, the edge
// probability matrix P must coincide exactly.
TEST_CASE("SBM as point-mass latent position graph: identical P on n <= 50") {
  auto params = SbmParams::planted(3, 0.6, 0.15);
  const int n = 50;
  auto sbm = sample_sbm(n, params, 321);

  // point-mass positions at the block index
  LatentPositionModel model;
  model.dimension = 1;
  int draw = 0;
  auto labels = sbm.labels;
  model.position_sampler = [&](RngStream&) {
    return Eigen::VectorXd::Constant(1, static_cast<double>(labels[draw++ % n]));
  };
  model.link = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return params.B(static_cast<int>(a[0]), static_cast<int>(b[0]));
  };

  // P from the SBM side vs P from the lookup link: elementwise equal
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd xi = Eigen::VectorXd::Constant(1, static_cast<double>(labels[i]));
      Eigen::VectorXd xj = Eigen::VectorXd::Constant(1, static_cast<double>(labels[j]));
      CHECK(model.link(xi, xj) == params.B(labels[i], labels[j]));
    }
}

TEST_CASE("point-mass mixture edge statistics agree with sample_sbm") {
  auto params = SbmParams::planted(2, 0.7, 0.2);
  const int n = 40, reps = 200;
  double mean_sbm = 0.0, mean_lpg = 0.0;
  for (int r = 0; r < reps; ++r) {
    mean_sbm += static_cast<double>(sample_sbm(n, params, derive_seed(5, r)).graph.num_edges());
    LatentPositionModel model;
    model.dimension = 1;
    model.position_sampler = [&](RngStream& rng) {
      return Eigen::VectorXd::Constant(1, static_cast<double>(rng.categorical(params.pi)));
    };
    model.link = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
      return params.B(static_cast<int>(a[0]), static_cast<int>(b[0]));
    };
    mean_lpg += static_cast<double>(
        sample_latent_position_graph(n, model, derive_seed(6, r), false).graph.num_edges());
  }
  mean_sbm /= reps;
  mean_lpg /= reps;
  // expected edges: C(n,2) * average pair probability; both samplers share it
  CHECK(std::abs(mean_sbm - mean_lpg) < 12.0);  // ~4 sigma of the replicate mean
}

TEST_CASE("estimate_block_matrix on two disconnected triangles") {
  Graph g = Graph::from_edges(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
  BlockLabels labels = {0, 0, 0, 1, 1, 1};
  auto est = estimate_block_matrix(g, labels);
  CHECK(est.B(0, 0) == 1.0);
  CHECK(est.B(1, 1) == 1.0);
  CHECK(est.B(0, 1) == 0.0);
  CHECK(est.pi == std::vector<double>{0.5, 0.5});
}

TEST_CASE("estimate_block_matrix on the empty graph is all zeros") {
  Graph g = Graph::from_edges(4, {});
  auto est = estimate_block_matrix(g, {0, 1, 0, 1});
  CHECK(est.B.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("estimate_block_matrix converges to B at n=2000") {
  auto params = SbmParams::planted(3, 0.5, 0.1);
  auto sample = sample_sbm(2000, params, 2024);
  auto est = estimate_block_matrix(sample.graph, sample.labels);
  CHECK((est.B - params.B).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("params JSON round trip") {
  auto params = SbmParams::planted(2, 0.8, 0.1);
  std::string path = "/tmp/sbmkit_params_test.json";
  {
    std::ofstream out(path);
    out << params.to_json();
  }
  auto back = SbmParams::from_json_file(path);
  CHECK(back.K == params.K);
  CHECK(back.pi == params.pi);
  CHECK(back.B == params.B);
}
