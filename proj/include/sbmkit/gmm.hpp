#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sbmkit/partition.hpp"

namespace sbmkit {

// Covariance families, ordered simplest to richest; the order is also the
// model-selection tie-break.
enum class CovarianceFamily {
  SphericalEqual,
  SphericalVarying,
  DiagonalEqual,
  DiagonalVarying,
  FullEqual,
  FullVarying,
};

constexpr std::array<CovarianceFamily, 6> kAllFamilies = {
    CovarianceFamily::SphericalEqual,  CovarianceFamily::SphericalVarying,
    CovarianceFamily::DiagonalEqual,   CovarianceFamily::DiagonalVarying,
    CovarianceFamily::FullEqual,       CovarianceFamily::FullVarying,
};

const char* family_name(CovarianceFamily f);
CovarianceFamily family_from_name(const std::string& name);

// Free covariance parameters for the family at (k components, dimension D).
int family_param_count(CovarianceFamily f, int k, int d);

struct GmmModel {
  int k = 0;
  CovarianceFamily family = CovarianceFamily::SphericalEqual;
  Eigen::VectorXd weights;               // length k, simplex
  Eigen::MatrixXd means;                 // k x D
  std::vector<Eigen::MatrixXd> covariances;  // k full D x D matrices
  Eigen::MatrixXd responsibilities;      // n x k, row-stochastic
  double loglik = 0.0;
  double bic = 0.0;
  bool converged = false;
  int iterations = 0;
  // Largest single-iteration log-likelihood decrease seen across the kept
  // restart (0 when monotone); EM must keep this below 1e-9.
  double max_loglik_drop = 0.0;

  Partition to_partition(Method method) const;
};

struct GmmOptions {
  double tol = 1e-6;
  int max_iter = 500;
  int restarts = 5;
  std::uint64_t seed = 1;
};

// EM fit; best of `restarts` k-means++-seeded initializations by final
// log-likelihood. Degenerate restarts (collapsed component) are discarded;
// if all collapse the returned model has converged=false.
GmmModel fit_gmm(const Eigen::MatrixXd& points, int k, CovarianceFamily family,
                 const GmmOptions& opts = {});

// 2*loglik - p_total*ln(n), p_total = (k-1) + k*D + family params (maximized).
double bic_of(double loglik, int k, CovarianceFamily family, int d, int n);

struct SelectionEntry {
  int k;
  CovarianceFamily family;
  double bic;
  double loglik;
  bool converged;
};

struct SelectionResult {
  GmmModel best;
  Partition partition;
  std::vector<SelectionEntry> table;  // full BIC sweep, (k asc, family asc)
};

// Fits all (k, family) pairs for k in 1..k_max and returns the max-BIC
// converged model; ties break toward smaller k, then simpler family.
SelectionResult select_model(const Eigen::MatrixXd& points, int k_max,
                             const std::vector<CovarianceFamily>& families =
                                 {kAllFamilies.begin(), kAllFamilies.end()},
                             const GmmOptions& opts = {}, Method method = Method::ASE);

std::string model_to_json(const GmmModel& m);
std::string selection_table_to_json(const std::vector<SelectionEntry>& table);

}  // namespace sbmkit
