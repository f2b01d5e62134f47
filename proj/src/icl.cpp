#include "sbmkit/icl.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sbmkit/rng.hpp"
#include "sbmkit/sbm.hpp"

namespace sbmkit {

namespace {

constexpr double kEtaClamp = 1e-9;

inline double clamp_log(double p) { return std::log(std::min(std::max(p, kEtaClamp), 1.0 - kEtaClamp)); }
inline double clamp_log1m(double p) { return std::log(1.0 - std::min(std::max(p, kEtaClamp), 1.0 - kEtaClamp)); }

// E_kl = sum_{i != j} tau_ik tau_jl A_ij, T_kl = sum_{i != j} tau_ik tau_jl
void pair_sums(const Graph& g, const Eigen::MatrixXd& tau, Eigen::MatrixXd& e_sum,
               Eigen::MatrixXd& t_sum) {
  const int k = static_cast<int>(tau.cols());
  e_sum = Eigen::MatrixXd::Zero(k, k);
  for (auto [i, j] : g.edges()) {
    e_sum += tau.row(i).transpose() * tau.row(j);
    e_sum += tau.row(j).transpose() * tau.row(i);
  }
  Eigen::VectorXd s = tau.colwise().sum();
  t_sum = s * s.transpose() - tau.transpose() * tau;
}

double objective(const Graph& g, const Eigen::MatrixXd& tau, const Eigen::VectorXd& alpha,
                 const Eigen::MatrixXd& eta) {
  const int n = static_cast<int>(tau.rows());
  const int k = static_cast<int>(tau.cols());
  double j = 0.0;
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < k; ++c) {
      double t = tau(i, c);
      j += t * std::log(std::max(alpha[c], 1e-300));
      if (t > 0.0) j -= t * std::log(t);
    }
  Eigen::MatrixXd e_sum, t_sum;
  pair_sums(g, tau, e_sum, t_sum);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      j += 0.5 * (e_sum(a, b) * clamp_log(eta(a, b)) +
                  (t_sum(a, b) - e_sum(a, b)) * clamp_log1m(eta(a, b)));
  return j;
}

// Lloyd k-means over dense adjacency rows for the structured init.
std::vector<int> kmeans_rows(const Graph& g, int k, RngStream& rng) {
  const int n = g.num_vertices();
  Eigen::MatrixXd rows = g.dense_adjacency();
  std::vector<int> centers;
  centers.push_back(rng.uniform_int(n));
  Eigen::VectorXd dist2 = (rows.rowwise() - rows.row(centers[0])).rowwise().squaredNorm();
  while (static_cast<int>(centers.size()) < k) {
    double total = dist2.sum();
    int pick = total <= 0.0 ? rng.uniform_int(n) : [&] {
      double u = rng.uniform() * total, acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += dist2[i];
        if (u < acc) return i;
      }
      return n - 1;
    }();
    centers.push_back(pick);
    dist2 = dist2.cwiseMin((rows.rowwise() - rows.row(pick)).rowwise().squaredNorm());
  }
  Eigen::MatrixXd mu(k, n);
  for (int c = 0; c < k; ++c) mu.row(c) = rows.row(centers[c]);
  std::vector<int> assign(n, 0);
  for (int it = 0; it < 10; ++it) {
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double bd = (rows.row(i) - mu.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        double d = (rows.row(i) - mu.row(c)).squaredNorm();
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      assign[i] = best;
    }
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(k, n);
    Eigen::VectorXd cnt = Eigen::VectorXd::Zero(k);
    for (int i = 0; i < n; ++i) {
      acc.row(assign[i]) += rows.row(i);
      cnt[assign[i]] += 1.0;
    }
    for (int c = 0; c < k; ++c)
      if (cnt[c] > 0.0) mu.row(c) = acc.row(c) / cnt[c];
  }
  return assign;
}

struct EmState {
  Eigen::MatrixXd tau;
  Eigen::VectorXd alpha;
  Eigen::MatrixXd eta;
  double objective = -std::numeric_limits<double>::infinity();
  bool converged = false;
};

EmState run_variational_em(const Graph& g, int k, Eigen::MatrixXd tau,
                           const IclOptions& opts) {
  const int n = g.num_vertices();
  EmState st;
  st.tau = std::move(tau);
  st.alpha = Eigen::VectorXd::Constant(k, 1.0 / k);
  st.eta = Eigen::MatrixXd::Zero(k, k);

  const auto& off = g.offsets();
  const auto& nbr = g.neighbors();

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    // M-step
    st.alpha = st.tau.colwise().mean().transpose().cwiseMax(1e-12);
    st.alpha /= st.alpha.sum();
    Eigen::MatrixXd e_sum, t_sum;
    pair_sums(g, st.tau, e_sum, t_sum);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        st.eta(a, b) = t_sum(a, b) > 0.0 ? e_sum(a, b) / t_sum(a, b) : 0.0;
    st.eta = 0.5 * (st.eta + st.eta.transpose().eval());  // exact symmetry

    Eigen::MatrixXd log_eta(k, k), log_1m_eta(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        log_eta(a, b) = clamp_log(st.eta(a, b));
        log_1m_eta(a, b) = clamp_log1m(st.eta(a, b));
      }
    Eigen::VectorXd log_alpha = st.alpha.array().log();

    // sequential tau sweep (coordinate ascent, keeps the bound monotone)
    Eigen::VectorXd colsum = st.tau.colwise().sum();
    double max_change = 0.0;
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd a_l = Eigen::VectorXd::Zero(k);
      for (int p = off[i]; p < off[i + 1]; ++p) a_l += st.tau.row(nbr[p]).transpose();
      Eigen::VectorXd b_l = colsum - st.tau.row(i).transpose();
      Eigen::VectorXd logits = log_alpha;
      logits += log_eta * a_l + log_1m_eta * (b_l - a_l);
      double m = logits.maxCoeff();
      Eigen::VectorXd t = (logits.array() - m).exp();
      t /= t.sum();
      max_change = std::max(max_change, (t - st.tau.row(i).transpose()).cwiseAbs().maxCoeff());
      colsum += t - st.tau.row(i).transpose();
      st.tau.row(i) = t.transpose();
    }
    if (max_change < opts.tol) {
      st.converged = true;
      break;
    }
  }
  st.objective = objective(g, st.tau, st.alpha, st.eta);
  return st;
}

double completed_icl(const Graph& g, const Partition& p, int k_declared) {
  const int n = g.num_vertices();
  SbmParams fitted = estimate_block_matrix(g, p.labels);
  const int k = fitted.K;
  double cll = 0.0;
  for (int c = 0; c < k; ++c) {
    double nk = fitted.pi[c] * n;
    if (nk > 0.0) cll += nk * std::log(fitted.pi[c]);
  }
  // block pair counts at hard labels
  std::vector<double> counts(k, 0.0);
  for (int l : p.labels) counts[l] += 1.0;
  Eigen::MatrixXd edge_count = Eigen::MatrixXd::Zero(k, k);
  for (auto [i, j] : g.edges()) {
    int a = p.labels[i], b = p.labels[j];
    if (a > b) std::swap(a, b);
    edge_count(a, b) += 1.0;
  }
  for (int a = 0; a < k; ++a)
    for (int b = a; b < k; ++b) {
      double pairs = (a == b) ? counts[a] * (counts[a] - 1.0) / 2.0 : counts[a] * counts[b];
      if (pairs <= 0.0) continue;
      double m_ab = edge_count(a, b);
      double eta = fitted.B(a, b);
      if (m_ab > 0.0) cll += m_ab * std::log(eta);
      if (pairs - m_ab > 0.0) cll += (pairs - m_ab) * std::log(1.0 - eta);
    }
  double dyads = std::max(1.0, n * (n - 1.0) / 2.0);
  double kk = static_cast<double>(k_declared);
  return cll - (kk * (kk + 1.0) / 4.0) * std::log(dyads) -
         ((kk - 1.0) / 2.0) * std::log(static_cast<double>(n));
}

}  // namespace

IclFit icl_fit(const Graph& g, int k, const IclOptions& opts) {
  const int n = g.num_vertices();
  if (k < 1 || k > n) throw std::invalid_argument("icl_fit: need 1 <= K <= n");

  EmState best;
  bool have = false;
  for (int r = 0; r < opts.restarts; ++r) {
    RngStream rng(derive_seed(opts.seed, r));
    Eigen::MatrixXd tau(n, k);
    if (r == 0) {
      // soft labels from k-means on adjacency rows; pure-random tau tends
      // to stall at saddle points on small graphs
      auto assign = kmeans_rows(g, k, rng);
      tau.setConstant(0.2 / k);
      for (int i = 0; i < n; ++i) tau(i, assign[i]) += 0.8;
    } else {
      for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int c = 0; c < k; ++c) {
          tau(i, c) = 0.1 + rng.uniform();
          s += tau(i, c);
        }
        tau.row(i) /= s;
      }
    }
    EmState st = run_variational_em(g, k, std::move(tau), opts);
    if (!have || st.objective > best.objective) {
      best = std::move(st);
      have = true;
    }
  }

  IclFit fit;
  fit.K = k;
  fit.tau = std::move(best.tau);
  fit.alpha = std::move(best.alpha);
  fit.eta = std::move(best.eta);
  fit.objective = best.objective;
  fit.converged = best.converged;
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    int arg = 0;
    for (int c = 1; c < k; ++c)
      if (fit.tau(i, c) > fit.tau(i, arg)) arg = c;
    labels[i] = arg;
  }
  fit.labels = make_partition(std::move(labels), Method::ICL);
  fit.icl = completed_icl(g, fit.labels, k);
  return fit;
}

IclSelection icl_select(const Graph& g, int k_max, const IclOptions& opts) {
  if (k_max < 1) throw std::invalid_argument("icl_select: K_max must be >= 1");
  IclSelection out;
  std::vector<IclFit> fits(k_max);
#pragma omp parallel for schedule(dynamic)
  for (int k = 1; k <= k_max; ++k) {
    IclOptions local = opts;
    local.seed = derive_seed(opts.seed, 1000 + k);
    fits[k - 1] = icl_fit(g, std::min(k, g.num_vertices()), local);
  }
  bool have = false;
  for (int k = 1; k <= k_max; ++k) {
    out.table.emplace_back(k, fits[k - 1].icl);
    if (!have || fits[k - 1].icl > out.best.icl) {
      out.best = fits[k - 1];
      have = true;
    }
  }
  return out;
}

}  // namespace sbmkit
