#include "sbmkit/eigen_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "sbmkit/rng.hpp"

namespace sbmkit {

namespace {

std::vector<int> select_order(const Eigen::VectorXd& values, int d, EigenOrder order) {
  std::vector<int> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (order == EigenOrder::LargestAlgebraic) {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return values[a] > values[b]; });
  } else {
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return std::abs(values[a]) > std::abs(values[b]);
    });
  }
  idx.resize(d);
  return idx;
}

EigenPairs dense_solve(const SymmetricOp& op, int d, EigenOrder order) {
  const int n = op.n;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd col(n);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    op.apply(e.data(), col.data());
    m.col(j) = col;
    e[j] = 0.0;
  }
  m = 0.5 * (m + m.transpose().eval());  // symmetrize roundoff
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success)
    throw ConvergenceError("dense symmetric eigensolver failed");
  auto idx = select_order(solver.eigenvalues(), d, order);
  EigenPairs out;
  out.values.resize(d);
  out.vectors.resize(n, d);
  for (int c = 0; c < d; ++c) {
    out.values[c] = solver.eigenvalues()[idx[c]];
    out.vectors.col(c) = solver.eigenvectors().col(idx[c]);
  }
  return out;
}

// Lanczos with full reorthogonalization and a seeded random start.
EigenPairs lanczos_solve(const SymmetricOp& op, int d, EigenOrder order,
                         const EigenSolverOptions& opts) {
  const int n = op.n;
  const int max_iter = std::min(n, opts.max_iter_factor * n);
  RngStream rng(opts.seed);

  std::vector<Eigen::VectorXd> basis;
  std::vector<double> alphas, betas;  // betas[j] couples v_j and v_{j+1}

  auto random_orthonormal = [&]() -> Eigen::VectorXd {
    for (int attempt = 0; attempt < 64; ++attempt) {
      Eigen::VectorXd v(n);
      for (int i = 0; i < n; ++i) v[i] = rng.normal();
      for (const auto& b : basis) v -= b.dot(v) * b;
      for (const auto& b : basis) v -= b.dot(v) * b;
      double norm = v.norm();
      if (norm > 1e-8) return v / norm;
    }
    throw ConvergenceError("lanczos: could not extend Krylov basis");
  };

  basis.push_back(random_orthonormal());

  Eigen::VectorXd w(n);
  EigenPairs out;
  int since_check = 0;

  for (int m = 1; m <= max_iter; ++m) {
    const Eigen::VectorXd& v = basis.back();
    op.apply(v.data(), w.data());
    if (betas.size() + 1 == basis.size() && !betas.empty() && betas.back() != 0.0)
      w -= betas.back() * basis[basis.size() - 2];
    double alpha = v.dot(w);
    alphas.push_back(alpha);
    w -= alpha * v;
    // full reorthogonalization, twice
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) w -= b.dot(w) * b;
    double beta = w.norm();

    bool breakdown = beta < 1e-12;
    ++since_check;
    bool do_check = (static_cast<int>(alphas.size()) >= d) &&
                    (since_check >= 10 || breakdown || m == max_iter || m == n);
    if (do_check) {
      since_check = 0;
      const int mm = static_cast<int>(alphas.size());
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(mm, mm);
      for (int i = 0; i < mm; ++i) t(i, i) = alphas[i];
      for (int i = 0; i + 1 < mm; ++i) t(i, i + 1) = t(i + 1, i) = betas[i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(t);
      auto idx = select_order(solver.eigenvalues(), std::min(d, mm), order);
      bool converged = static_cast<int>(idx.size()) == d;
      double worst = 0.0;
      if (converged) {
        for (int c : idx) {
          double resid = (breakdown || mm == n)
                             ? 0.0
                             : std::abs(beta * solver.eigenvectors()(mm - 1, c));
          double bound = opts.tol * std::max(1.0, std::abs(solver.eigenvalues()[c]));
          worst = std::max(worst, resid - bound);
          if (resid > bound) converged = false;
        }
      }
      if (converged || mm == n || m == max_iter) {
        if (!converged && mm != n) {
          std::ostringstream msg;
          msg << "lanczos: no convergence after " << m
              << " iterations, worst residual excess " << worst;
          throw ConvergenceError(msg.str());
        }
        out.values.resize(d);
        out.vectors.resize(n, d);
        Eigen::MatrixXd vmat(n, mm);
        for (int c = 0; c < mm; ++c) vmat.col(c) = basis[c];
        for (int c = 0; c < d; ++c) {
          out.values[c] = solver.eigenvalues()[idx[c]];
          out.vectors.col(c) = vmat * solver.eigenvectors().col(idx[c]);
        }
        // Ritz vectors can lose a little orthogonality; clean up.
        for (int c = 0; c < d; ++c) {
          for (int p = 0; p < c; ++p)
            out.vectors.col(c) -= out.vectors.col(p).dot(out.vectors.col(c)) * out.vectors.col(p);
          out.vectors.col(c).normalize();
        }
        return out;
      }
    }

    if (static_cast<int>(basis.size()) == n) break;
    if (breakdown) {
      betas.push_back(0.0);
      basis.push_back(random_orthonormal());
    } else {
      betas.push_back(beta);
      basis.push_back(w / beta);
    }
  }
  throw ConvergenceError("lanczos: iteration cap reached");
}

}  // namespace

EigenPairs top_eigenpairs(const SymmetricOp& op, int d, EigenOrder order,
                          const EigenSolverOptions& opts) {
  if (op.n < 1) throw std::invalid_argument("top_eigenpairs: empty operator");
  if (d < 1 || d > op.n) throw std::invalid_argument("top_eigenpairs: need 1 <= D <= n");
  if (op.n <= opts.dense_threshold) return dense_solve(op, d, order);
  return lanczos_solve(op, d, order, opts);
}

}  // namespace sbmkit
