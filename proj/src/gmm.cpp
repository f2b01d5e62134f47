#include "sbmkit/gmm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "sbmkit/kernels.hpp"
#include "sbmkit/rng.hpp"

namespace sbmkit {

const char* family_name(CovarianceFamily f) {
  switch (f) {
    case CovarianceFamily::SphericalEqual: return "spherical-equal";
    case CovarianceFamily::SphericalVarying: return "spherical-varying";
    case CovarianceFamily::DiagonalEqual: return "diagonal-equal";
    case CovarianceFamily::DiagonalVarying: return "diagonal-varying";
    case CovarianceFamily::FullEqual: return "full-equal";
    case CovarianceFamily::FullVarying: return "full-varying";
  }
  return "?";
}

CovarianceFamily family_from_name(const std::string& name) {
  for (auto f : kAllFamilies)
    if (name == family_name(f)) return f;
  throw std::invalid_argument("unknown covariance family: " + name);
}

int family_param_count(CovarianceFamily f, int k, int d) {
  switch (f) {
    case CovarianceFamily::SphericalEqual: return 1;
    case CovarianceFamily::SphericalVarying: return k;
    case CovarianceFamily::DiagonalEqual: return d;
    case CovarianceFamily::DiagonalVarying: return k * d;
    case CovarianceFamily::FullEqual: return d * (d + 1) / 2;
    case CovarianceFamily::FullVarying: return k * d * (d + 1) / 2;
  }
  return 0;
}

double bic_of(double loglik, int k, CovarianceFamily family, int d, int n) {
  int p_total = (k - 1) + k * d + family_param_count(family, k, d);
  return 2.0 * loglik - p_total * std::log(static_cast<double>(n));
}

Partition GmmModel::to_partition(Method method) const {
  const int n = static_cast<int>(responsibilities.rows());
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    int best = 0;
    for (int c = 1; c < k; ++c)
      if (responsibilities(i, c) > responsibilities(i, best)) best = c;
    labels[i] = best;
  }
  return make_partition(std::move(labels), method);
}

namespace {

bool family_is_full(CovarianceFamily f) {
  return f == CovarianceFamily::FullEqual || f == CovarianceFamily::FullVarying;
}

// k-means++ seeding over the data points.
std::vector<int> kmeanspp_centers(const Eigen::MatrixXd& x, int k, RngStream& rng) {
  const int n = static_cast<int>(x.rows());
  std::vector<int> centers;
  centers.push_back(rng.uniform_int(n));
  Eigen::VectorXd dist2 =
      (x.rowwise() - x.row(centers[0])).rowwise().squaredNorm();
  while (static_cast<int>(centers.size()) < k) {
    double total = dist2.sum();
    int pick;
    if (total <= 0.0) {
      pick = rng.uniform_int(n);
    } else {
      double u = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        acc += dist2[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
    }
    centers.push_back(pick);
    dist2 = dist2.cwiseMin((x.rowwise() - x.row(pick)).rowwise().squaredNorm());
  }
  return centers;
}

// M-step + density preparation for one family; returns false if a Cholesky
// cannot be stabilized. raw_min_eig reports the smallest pre-ridge
// covariance eigenvalue across components, the degeneracy signal for
// collapsed spike components.
bool m_step(const Eigen::MatrixXd& x, const Eigen::MatrixXd& resp, CovarianceFamily family,
            double floor, GmmModel& model, std::vector<ComponentDensity>& comps,
            double& raw_min_eig) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  const int k = model.k;
  Eigen::VectorXd nk = resp.colwise().sum();
  model.weights = nk / static_cast<double>(n);
  model.means.resize(k, d);
  for (int c = 0; c < k; ++c)
    model.means.row(c) = (resp.col(c).transpose() * x) / nk[c];

  // raw (pre-ridge) covariances first, so collapsed components are visible
  model.covariances.assign(k, Eigen::MatrixXd::Zero(d, d));
  const bool full = family_is_full(family);
  if (full) {
    std::vector<Eigen::MatrixXd> sk(k);
    for (int c = 0; c < k; ++c) {
      Eigen::MatrixXd centered = x.rowwise() - model.means.row(c);
      sk[c] = centered.transpose() * resp.col(c).asDiagonal() * centered;
    }
    if (family == CovarianceFamily::FullEqual) {
      Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(d, d);
      for (int c = 0; c < k; ++c) pooled += sk[c];
      pooled /= static_cast<double>(n);
      for (int c = 0; c < k; ++c) model.covariances[c] = pooled;
    } else {
      for (int c = 0; c < k; ++c) model.covariances[c] = sk[c] / nk[c];
    }
  } else {
    Eigen::MatrixXd sk_diag(k, d);  // per-component sum r*(x-mu)^2
    for (int c = 0; c < k; ++c) {
      Eigen::MatrixXd centered = x.rowwise() - model.means.row(c);
      sk_diag.row(c) = (centered.array().square().colwise() * resp.col(c).array()).colwise().sum();
    }
    switch (family) {
      case CovarianceFamily::SphericalEqual: {
        double var = sk_diag.sum() / (n * d);
        for (int c = 0; c < k; ++c)
          model.covariances[c] = var * Eigen::MatrixXd::Identity(d, d);
        break;
      }
      case CovarianceFamily::SphericalVarying: {
        for (int c = 0; c < k; ++c) {
          double var = sk_diag.row(c).sum() / (nk[c] * d);
          model.covariances[c] = var * Eigen::MatrixXd::Identity(d, d);
        }
        break;
      }
      case CovarianceFamily::DiagonalEqual: {
        Eigen::VectorXd var = sk_diag.colwise().sum().transpose() / static_cast<double>(n);
        for (int c = 0; c < k; ++c) model.covariances[c] = var.asDiagonal();
        break;
      }
      case CovarianceFamily::DiagonalVarying: {
        for (int c = 0; c < k; ++c) {
          Eigen::VectorXd var = sk_diag.row(c).transpose() / nk[c];
          model.covariances[c] = var.asDiagonal();
        }
        break;
      }
      default: break;
    }
  }

  raw_min_eig = std::numeric_limits<double>::infinity();
  for (int c = 0; c < k; ++c) {
    double min_eig;
    if (full) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.covariances[c],
                                                        Eigen::EigenvaluesOnly);
      min_eig = es.eigenvalues().minCoeff();
    } else {
      min_eig = model.covariances[c].diagonal().minCoeff();
    }
    raw_min_eig = std::min(raw_min_eig, min_eig);
    model.covariances[c].diagonal().array() += floor;
  }

  comps.assign(k, {});
  const double log2pi = std::log(2.0 * M_PI);
  for (int c = 0; c < k; ++c) {
    ComponentDensity& cd = comps[c];
    cd.log_weight = std::log(std::max(model.weights[c], 1e-300));
    cd.mean = model.means.row(c).transpose();
    cd.full = full;
    if (full) {
      Eigen::MatrixXd cov = model.covariances[c];
      Eigen::LLT<Eigen::MatrixXd> llt(cov);
      double extra = floor;
      int attempts = 0;
      while (llt.info() != Eigen::Success && attempts++ < 8) {
        extra *= 10.0;
        cov.diagonal().array() += extra;
        llt.compute(cov);
      }
      if (llt.info() != Eigen::Success) return false;
      model.covariances[c] = cov;
      Eigen::MatrixXd l = llt.matrixL();
      double logdet = 2.0 * l.diagonal().array().log().sum();
      cd.chol_inv = l.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(d, d));
      cd.log_norm = -0.5 * (d * log2pi + logdet);
    } else {
      Eigen::VectorXd var = model.covariances[c].diagonal();
      cd.inv_var = var.cwiseInverse();
      cd.log_norm = -0.5 * (d * log2pi + var.array().log().sum());
    }
  }
  return true;
}

struct EmRun {
  GmmModel model;
  bool degenerate = true;
};

EmRun run_em(const Eigen::MatrixXd& x, int k, CovarianceFamily family, double floor,
             const GmmOptions& opts, std::uint64_t seed) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  RngStream rng(seed);

  EmRun run;
  GmmModel& model = run.model;
  model.k = k;
  model.family = family;

  // hard assignment to k-means++ centers
  auto centers = kmeanspp_centers(x, k, rng);
  Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, k);
  for (int i = 0; i < n; ++i) {
    int best = 0;
    double best_d = (x.row(i) - x.row(centers[0])).squaredNorm();
    for (int c = 1; c < k; ++c) {
      double dist = (x.row(i) - x.row(centers[c])).squaredNorm();
      if (dist < best_d) {
        best_d = dist;
        best = c;
      }
    }
    resp(i, best) = 1.0;
  }
  // every component needs mass before the first M-step
  Eigen::VectorXd nk = resp.colwise().sum();
  for (int c = 0; c < k; ++c)
    if (nk[c] == 0.0) return run;

  const double weight_floor = 1.0 / (10.0 * n);
  std::vector<ComponentDensity> comps;
  Eigen::MatrixXd logp;
  double prev_ll = -std::numeric_limits<double>::infinity();
  model.max_loglik_drop = 0.0;

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    double raw_min_eig = 0.0;
    if (!m_step(x, resp, family, floor, model, comps, raw_min_eig)) return run;
    // a component collapsed onto (nearly) a single point inflates the
    // likelihood without bound; reject the restart rather than let the ridge
    // floor legitimize it. k=1 is exempt so coincident data still fits.
    if (k >= 2 && raw_min_eig < floor) return run;
    for (int c = 0; c < k; ++c)
      if (model.weights[c] < weight_floor) return run;

    gmm_log_density_omp(x, comps, logp);
    // row-wise logsumexp; serial accumulation keeps the sum deterministic
    double ll = 0.0;
    for (int i = 0; i < n; ++i) {
      double m = logp.row(i).maxCoeff();
      double s = (logp.row(i).array() - m).exp().sum();
      double row_ll = m + std::log(s);
      resp.row(i) = (logp.row(i).array() - row_ll).exp();
      ll += row_ll;
    }
    if (!std::isfinite(ll)) return run;

    model.iterations = iter;
    if (iter > 1) {
      double drop = prev_ll - ll;
      if (drop > model.max_loglik_drop) model.max_loglik_drop = drop;
      double rel = std::abs(ll - prev_ll) / (1.0 + std::abs(ll));
      if (rel < opts.tol) {
        model.loglik = ll;
        model.responsibilities = resp;
        model.converged = true;
        run.degenerate = false;
        return run;
      }
    }
    prev_ll = ll;
    model.loglik = ll;
  }
  // iteration cap reached; usable model, flag carried via iterations==max_iter
  model.responsibilities = resp;
  model.converged = true;
  run.degenerate = false;
  return run;
}

}  // namespace

GmmModel fit_gmm(const Eigen::MatrixXd& points, int k, CovarianceFamily family,
                 const GmmOptions& opts) {
  const int n = static_cast<int>(points.rows());
  const int d = static_cast<int>(points.cols());
  if (k < 1) throw std::invalid_argument("fit_gmm: k must be >= 1");
  if (n < k) throw std::invalid_argument("fit_gmm: fewer points than components");
  if (d < 1) throw std::invalid_argument("fit_gmm: dimension must be >= 1");
  if (opts.tol <= 0.0) throw std::invalid_argument("fit_gmm: tol must be positive");

  // ridge floor relative to overall data scale
  double mean_var = 0.0;
  Eigen::RowVectorXd mu = points.colwise().mean();
  mean_var = (points.rowwise() - mu).squaredNorm() / std::max(1, n) / d;
  double floor = std::max(1e-8 * mean_var, 1e-12);

  GmmModel best;
  best.k = k;
  best.family = family;
  best.converged = false;
  bool have = false;
  for (int r = 0; r < opts.restarts; ++r) {
    EmRun run = run_em(points, k, family, floor, opts, derive_seed(opts.seed, r));
    if (run.degenerate) continue;
    if (!have || run.model.loglik > best.loglik) {
      best = run.model;
      have = true;
    }
  }
  if (have) best.bic = bic_of(best.loglik, k, family, d, n);
  return best;
}

SelectionResult select_model(const Eigen::MatrixXd& points, int k_max,
                             const std::vector<CovarianceFamily>& families,
                             const GmmOptions& opts, Method method) {
  if (k_max < 1) throw std::invalid_argument("select_model: k_max must be >= 1");
  if (families.empty()) throw std::invalid_argument("select_model: no families given");

  struct Job {
    int k;
    CovarianceFamily family;
    int family_index;
  };
  std::vector<Job> jobs;
  for (int k = 1; k <= k_max; ++k)
    for (std::size_t f = 0; f < families.size(); ++f)
      jobs.push_back({k, families[f], static_cast<int>(f)});

  std::vector<GmmModel> models(jobs.size());
#pragma omp parallel for schedule(dynamic)
  for (int j = 0; j < static_cast<int>(jobs.size()); ++j) {
    GmmOptions local = opts;
    local.seed = derive_seed(opts.seed, jobs[j].k, jobs[j].family_index);
    if (jobs[j].k > static_cast<int>(points.rows())) {
      models[j].k = jobs[j].k;
      models[j].family = jobs[j].family;
      models[j].converged = false;
    } else {
      models[j] = fit_gmm(points, jobs[j].k, jobs[j].family, local);
    }
  }

  SelectionResult out;
  bool have = false;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const GmmModel& m = models[j];
    out.table.push_back({m.k, m.family, m.bic, m.loglik, m.converged});
    if (!m.converged) continue;
    if (!have || m.bic > out.best.bic) {  // strict >: ascending order keeps ties small
      out.best = m;
      have = true;
    }
  }
  if (!have) throw std::runtime_error("select_model: no converged fits");
  out.partition = out.best.to_partition(method);
  return out;
}

std::string model_to_json(const GmmModel& m) {
  nlohmann::json j;
  j["k"] = m.k;
  j["family"] = family_name(m.family);
  j["loglik"] = m.loglik;
  j["bic"] = m.bic;
  j["converged"] = m.converged;
  j["weights"] = std::vector<double>(m.weights.data(), m.weights.data() + m.weights.size());
  std::vector<std::vector<double>> means;
  for (int c = 0; c < m.means.rows(); ++c) {
    std::vector<double> row(m.means.cols());
    for (int col = 0; col < m.means.cols(); ++col) row[col] = m.means(c, col);
    means.push_back(std::move(row));
  }
  j["means"] = means;
  std::vector<std::vector<std::vector<double>>> covs;
  for (const auto& cov : m.covariances) {
    std::vector<std::vector<double>> rows;
    for (int r = 0; r < cov.rows(); ++r) {
      std::vector<double> row(cov.cols());
      for (int c = 0; c < cov.cols(); ++c) row[c] = cov(r, c);
      rows.push_back(std::move(row));
    }
    covs.push_back(std::move(rows));
  }
  j["covariances"] = covs;
  return j.dump(2);
}

std::string selection_table_to_json(const std::vector<SelectionEntry>& table) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : table) {
    nlohmann::json row;
    row["k"] = e.k;
    row["family"] = family_name(e.family);
    row["bic"] = e.bic;
    row["loglik"] = e.loglik;
    row["converged"] = e.converged;
    arr.push_back(row);
  }
  return arr.dump(2);
}

}  // namespace sbmkit
