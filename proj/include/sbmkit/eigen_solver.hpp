#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <stdexcept>

namespace sbmkit {

enum class EigenOrder { LargestAlgebraic, LargestMagnitude };

struct EigenPairs {
  Eigen::VectorXd values;   // length D, ordered per mode (descending)
  Eigen::MatrixXd vectors;  // n x D, orthonormal columns
};

// Matrix-free symmetric operator: apply(x, y) computes y = M x.
struct SymmetricOp {
  int n = 0;
  std::function<void(const double* x, double* y)> apply;
};

struct EigenSolverOptions {
  std::uint64_t seed = 1;
  double tol = 1e-10;          // Ritz residual tolerance (relative)
  int dense_threshold = 512;   // dense eigensolve at or below this order
  int max_iter_factor = 10;    // Lanczos cap = factor * n
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Top-D eigenpairs of a symmetric operator. Dense solve for small n,
// Lanczos with full reorthogonalization above; deterministic given seed.
EigenPairs top_eigenpairs(const SymmetricOp& op, int d, EigenOrder order,
                          const EigenSolverOptions& opts = {});

}  // namespace sbmkit
