#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "sbmkit/gmm.hpp"
#include "sbmkit/pipeline.hpp"
#include "sbmkit/rng.hpp"
#include "sbmkit/sbm.hpp"
#include "sbmkit/stats.hpp"

using namespace sbmkit;

namespace {

Eigen::MatrixXd gaussian_blob(int n, const Eigen::VectorXd& mean, double sd, RngStream& rng) {
  Eigen::MatrixXd x(n, mean.size());
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < mean.size(); ++c) x(i, c) = mean[c] + sd * rng.normal();
  return x;
}

Eigen::MatrixXd vstack(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

}  // namespace

TEST_CASE("family parameter counts") {
  CHECK(family_param_count(CovarianceFamily::SphericalEqual, 4, 3) == 1);
  CHECK(family_param_count(CovarianceFamily::SphericalVarying, 4, 3) == 4);
  CHECK(family_param_count(CovarianceFamily::DiagonalEqual, 4, 3) == 3);
  CHECK(family_param_count(CovarianceFamily::DiagonalVarying, 4, 3) == 12);
  CHECK(family_param_count(CovarianceFamily::FullEqual, 4, 3) == 6);
  CHECK(family_param_count(CovarianceFamily::FullVarying, 4, 3) == 24);
}

TEST_CASE("k=1 spherical fit recovers the closed-form single-Gaussian MLE") {
  RngStream rng(1);
  Eigen::MatrixXd x = gaussian_blob(500, Eigen::Vector2d(1.0, -2.0), 1.5, rng);
  GmmOptions opts;
  opts.tol = 1e-10;
  auto model = fit_gmm(x, 1, CovarianceFamily::SphericalEqual, opts);
  REQUIRE(model.converged);

  Eigen::RowVectorXd mean = x.colwise().mean();
  double var = (x.rowwise() - mean).squaredNorm() / (x.rows() * x.cols());
  CHECK((model.means.row(0) - mean).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(model.covariances[0](0, 0) == doctest::Approx(var).epsilon(1e-4));

  // closed-form loglik of the fitted single spherical Gaussian
  double expect = 0.0;
  for (int i = 0; i < x.rows(); ++i) {
    double q = (x.row(i) - mean).squaredNorm() / var;
    expect += -0.5 * (x.cols() * std::log(2.0 * M_PI * var) + q);
  }
  CHECK(model.loglik == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("well-separated clouds are recovered") {
  RngStream rng(2);
  Eigen::MatrixXd x = vstack(gaussian_blob(100, Eigen::Vector2d(10.0, 0.0), 0.05, rng),
                             gaussian_blob(100, Eigen::Vector2d(-10.0, 0.0), 0.05, rng));
  auto model = fit_gmm(x, 2, CovarianceFamily::SphericalVarying, {});
  REQUIRE(model.converged);
  double m0 = model.means(0, 0), m1 = model.means(1, 0);
  if (m0 < m1) std::swap(m0, m1);
  CHECK(std::abs(m0 - 10.0) < 0.1);
  CHECK(std::abs(m1 + 10.0) < 0.1);
  CHECK(model.weights[0] == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("preconditions") {
  Eigen::MatrixXd one_point(1, 2);
  one_point << 0.0, 0.0;
  CHECK_THROWS(fit_gmm(one_point, 2, CovarianceFamily::SphericalEqual, {}));
  GmmOptions bad_tol;
  bad_tol.tol = 0.0;
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  CHECK_THROWS(fit_gmm(x, 1, CovarianceFamily::SphericalEqual, bad_tol));
}

TEST_CASE("bic arithmetic") {
  // loglik=0, p_total=2 at k=1,D=1 spherical (0 + 1 + 1), n=e^2
  int n = static_cast<int>(std::round(std::exp(2.0)));
  double bic = bic_of(0.0, 1, CovarianceFamily::SphericalEqual, 1, n);
  CHECK(bic == doctest::Approx(-2.0 * std::log(static_cast<double>(n))));
  CHECK(bic == doctest::Approx(-2.0 * std::log(7.0)));  // n rounds e^2 to 7
}

TEST_CASE("bic of a k=1 spherical model matches the hand formula") {
  RngStream rng(3);
  Eigen::MatrixXd x = gaussian_blob(1000, Eigen::VectorXd::Zero(2), 1.0, rng);
  GmmOptions opts;
  opts.tol = 1e-10;
  auto model = fit_gmm(x, 1, CovarianceFamily::SphericalEqual, opts);
  int p_total = (1 - 1) + 1 * 2 + 1;
  CHECK(model.bic ==
        doctest::Approx(2.0 * model.loglik - p_total * std::log(1000.0)).epsilon(1e-12));
}

TEST_CASE("nested families order their log-likelihoods") {
  RngStream rng(4);
  // anisotropic, correlated data so the families genuinely differ
  Eigen::MatrixXd x(400, 2);
  for (int i = 0; i < 400; ++i) {
    double a = rng.normal(), b = rng.normal();
    x(i, 0) = 2.0 * a;
    x(i, 1) = 0.5 * a + 0.8 * b + (i < 200 ? 1.5 : -1.5);
  }
  GmmOptions opts;
  opts.restarts = 8;
  opts.seed = 5;
  auto sph = fit_gmm(x, 2, CovarianceFamily::SphericalVarying, opts);
  auto dia = fit_gmm(x, 2, CovarianceFamily::DiagonalVarying, opts);
  auto ful = fit_gmm(x, 2, CovarianceFamily::FullVarying, opts);
  REQUIRE(sph.converged);
  REQUIRE(dia.converged);
  REQUIRE(ful.converged);
  CHECK(ful.loglik >= dia.loglik - 1e-6);
  CHECK(dia.loglik >= sph.loglik - 1e-6);
}

TEST_CASE("EM log-likelihood is monotone within slack") {
  RngStream rng(6);
  for (auto family : kAllFamilies) {
    Eigen::MatrixXd x = vstack(gaussian_blob(80, Eigen::Vector2d(2.0, 0.0), 1.0, rng),
                               gaussian_blob(80, Eigen::Vector2d(-2.0, 1.0), 0.7, rng));
    auto model = fit_gmm(x, 3, family, {});
    CHECK(model.max_loglik_drop <= 1e-9);
  }
}

TEST_CASE("responsibility rows sum to 1 and weights are their column means") {
  RngStream rng(7);
  Eigen::MatrixXd x = vstack(gaussian_blob(60, Eigen::Vector2d(3.0, 0.0), 0.5, rng),
                             gaussian_blob(60, Eigen::Vector2d(-3.0, 0.0), 0.5, rng));
  GmmOptions opts;
  opts.tol = 1e-12;  // run to a tight fixed point
  opts.max_iter = 2000;
  auto model = fit_gmm(x, 2, CovarianceFamily::FullVarying, opts);
  REQUIRE(model.converged);
  for (int i = 0; i < model.responsibilities.rows(); ++i)
    CHECK(model.responsibilities.row(i).sum() == doctest::Approx(1.0).epsilon(1e-10));
  Eigen::VectorXd colmean = model.responsibilities.colwise().mean().transpose();
  CHECK((colmean - model.weights).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("covariance floor holds after regularization") {
  // two exactly coincident point groups force degenerate covariances
  Eigen::MatrixXd x(40, 2);
  for (int i = 0; i < 40; ++i) x.row(i) = i < 20 ? Eigen::RowVector2d(1.0, 1.0)
                                                 : Eigen::RowVector2d(-1.0, 2.0);
  auto model = fit_gmm(x, 2, CovarianceFamily::FullVarying, {});
  double mean_var = 0.0;
  Eigen::RowVectorXd mu = x.colwise().mean();
  mean_var = (x.rowwise() - mu).squaredNorm() / x.rows() / x.cols();
  for (const auto& cov : model.covariances) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    CHECK(es.eigenvalues().minCoeff() >= 1e-8 * mean_var * 0.999);
  }
}

TEST_CASE("select_model picks k=1 for a single tight blob") {
  RngStream rng(8);
  Eigen::MatrixXd x = gaussian_blob(300, Eigen::Vector2d(0.0, 0.0), 1.0, rng);
  auto sel = select_model(x, 5);
  CHECK(sel.best.k == 1);
}

TEST_CASE("select_model finds 3 well-separated blobs") {
  RngStream rng(9);
  Eigen::MatrixXd x = vstack(vstack(gaussian_blob(100, Eigen::Vector2d(0.0, 0.0), 1.0, rng),
                                    gaussian_blob(100, Eigen::Vector2d(15.0, 0.0), 1.0, rng)),
                             gaussian_blob(100, Eigen::Vector2d(0.0, 15.0), 1.0, rng));
  auto sel = select_model(x, 6);
  CHECK(sel.best.k == 3);
  CHECK(sel.partition.k == 3);
  CHECK(sel.table.size() == 6 * 6);
}

TEST_CASE("select_model with k_max=1 returns the k=1 fit") {
  RngStream rng(10);
  Eigen::MatrixXd x = vstack(gaussian_blob(50, Eigen::Vector2d(5.0, 0.0), 0.1, rng),
                             gaussian_blob(50, Eigen::Vector2d(-5.0, 0.0), 0.1, rng));
  auto sel = select_model(x, 1);
  CHECK(sel.best.k == 1);
}

TEST_CASE("fits are deterministic given the seed") {
  RngStream rng(11);
  Eigen::MatrixXd x = vstack(gaussian_blob(70, Eigen::Vector2d(2.0, 1.0), 1.0, rng),
                             gaussian_blob(70, Eigen::Vector2d(-2.0, -1.0), 1.0, rng));
  GmmOptions opts;
  opts.seed = 31;
  auto a = fit_gmm(x, 2, CovarianceFamily::DiagonalVarying, opts);
  auto b = fit_gmm(x, 2, CovarianceFamily::DiagonalVarying, opts);
  CHECK(a.loglik == b.loglik);
  CHECK(a.means == b.means);
  CHECK(a.responsibilities == b.responsibilities);
}

TEST_CASE("BIC consistency: modal selected k is 3 on planted SBM embeddings") {
  auto params = SbmParams::planted(3, 0.4, 0.05);
  std::map<int, int> histogram;
  const int reps = 50;
  for (int r = 0; r < reps; ++r) {
    auto sample = sample_sbm(300, params, derive_seed(40, r));
    Embedding e = ase_embed(sample.graph, 3);
    GmmOptions opts;
    opts.seed = derive_seed(41, r);
    auto sel = select_model(e.coords, 6, {kAllFamilies.begin(), kAllFamilies.end()}, opts);
    histogram[sel.best.k]++;
  }
  int modal_k = 0, modal_count = -1;
  for (auto [k, c] : histogram)
    if (c > modal_count) {
      modal_count = c;
      modal_k = k;
    }
  CHECK(modal_k == 3);
}

TEST_CASE("cluster_vertices on a planted 2-block SBM") {
  auto params = SbmParams::planted(2, 0.5, 0.1);
  double total_ari = 0.0;
  int correct_k = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    auto sample = sample_sbm(400, params, derive_seed(900, s));
    ClusterOptions opts;
    opts.dim = 2;
    opts.k_max = 5;
    opts.gmm.seed = derive_seed(901, s);
    auto res = cluster_vertices(sample.graph, EmbeddingSource::Adjacency, opts);
    Partition truth = make_partition(sample.labels, Method::ASE);
    total_ari += ari(truth, res.partition);
    if (res.partition.k == 2) ++correct_k;
  }
  CHECK(total_ari / seeds > 0.9);
  CHECK(correct_k >= 18);
}

TEST_CASE("cluster_vertices on the complete graph collapses to one cluster") {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < 12; ++i)
    for (int j = i + 1; j < 12; ++j) edges.emplace_back(i, j);
  Graph g = Graph::from_edges(12, edges);
  ClusterOptions opts;
  opts.dim = 1;
  opts.k_max = 3;
  auto res = cluster_vertices(g, EmbeddingSource::Adjacency, opts);
  CHECK(res.partition.k == 1);
}

TEST_CASE("cluster_vertices is deterministic") {
  auto params = SbmParams::planted(2, 0.5, 0.1);
  auto sample = sample_sbm(150, params, 5150);
  ClusterOptions opts;
  opts.dim = 2;
  opts.k_max = 4;
  opts.gmm.seed = 8;
  auto a = cluster_vertices(sample.graph, EmbeddingSource::Adjacency, opts);
  auto b = cluster_vertices(sample.graph, EmbeddingSource::Adjacency, opts);
  CHECK(a.partition.labels == b.partition.labels);
  CHECK(a.model.bic == b.model.bic);
}

TEST_CASE("permuting point order permutes labels identically") {
  RngStream rng(12);
  Eigen::MatrixXd x = vstack(gaussian_blob(50, Eigen::Vector2d(6.0, 0.0), 0.3, rng),
                             gaussian_blob(50, Eigen::Vector2d(-6.0, 0.0), 0.3, rng));
  GmmOptions opts;
  opts.seed = 3;
  auto base = fit_gmm(x, 2, CovarianceFamily::SphericalEqual, opts).to_partition(Method::ASE);

  // reversal permutation
  Eigen::MatrixXd rev(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i) rev.row(i) = x.row(x.rows() - 1 - i);
  auto perm = fit_gmm(rev, 2, CovarianceFamily::SphericalEqual, opts).to_partition(Method::ASE);
  std::vector<int> unreversed(perm.labels.rbegin(), perm.labels.rend());
  CHECK(ari(base, make_partition(unreversed, Method::ASE)) == doctest::Approx(1.0));
}
