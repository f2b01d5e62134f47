#include "sbmkit/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "sbmkit/kernels.hpp"

namespace sbmkit {

SymmetricOp adjacency_op(const Graph& g) {
  SymmetricOp op;
  op.n = g.num_vertices();
  op.apply = [&g](const double* x, double* y) { adjacency_matvec_omp(g, x, y); };
  return op;
}

SymmetricOp laplacian_op(const Graph& g, std::vector<double>& scale_storage) {
  scale_storage.resize(g.num_vertices());
  for (int v = 0; v < g.num_vertices(); ++v) {
    int deg = g.degree(v);
    scale_storage[v] = deg > 0 ? 1.0 / std::sqrt(static_cast<double>(deg)) : 0.0;
  }
  SymmetricOp op;
  op.n = g.num_vertices();
  op.apply = [&g, &scale_storage](const double* x, double* y) {
    laplacian_matvec_omp(g, scale_storage, x, y);
  };
  return op;
}

namespace {
Embedding scale_pairs(EigenPairs pairs, EmbeddingSource source) {
  Embedding e;
  e.source = source;
  e.eigenvalues = pairs.values;
  e.coords = std::move(pairs.vectors);
  for (int c = 0; c < e.coords.cols(); ++c)
    e.coords.col(c) *= std::sqrt(std::abs(e.eigenvalues[c]));
  return e;
}
}  // namespace

Embedding ase_embed(const Graph& g, int d, EigenOrder order, const EigenSolverOptions& opts) {
  auto op = adjacency_op(g);
  return scale_pairs(top_eigenpairs(op, d, order, opts), EmbeddingSource::Adjacency);
}

Embedding lap_embed(const Graph& g, int d, EigenOrder order, const EigenSolverOptions& opts) {
  std::vector<double> scale;
  auto op = laplacian_op(g, scale);
  return scale_pairs(top_eigenpairs(op, d, order, opts), EmbeddingSource::Laplacian);
}

Embedding embed(const Graph& g, EmbeddingSource source, int d, EigenOrder order,
                const EigenSolverOptions& opts) {
  return source == EmbeddingSource::Adjacency ? ase_embed(g, d, order, opts)
                                              : lap_embed(g, d, order, opts);
}

int estimate_dimension(const std::vector<double>& magnitudes) {
  const int p = static_cast<int>(magnitudes.size());
  if (p < 3) throw std::invalid_argument("estimate_dimension: need at least 3 values");
  for (int i = 0; i + 1 < p; ++i)
    if (magnitudes[i] < magnitudes[i + 1])
      throw std::invalid_argument("estimate_dimension: input not sorted descending");

  std::vector<double> prefix(p + 1, 0.0), prefix_sq(p + 1, 0.0);
  for (int i = 0; i < p; ++i) {
    prefix[i + 1] = prefix[i] + magnitudes[i];
    prefix_sq[i + 1] = prefix_sq[i] + magnitudes[i] * magnitudes[i];
  }

  int best_q = 1;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (int q = 1; q < p; ++q) {
    double m1 = prefix[q] / q;
    double m2 = (prefix[p] - prefix[q]) / (p - q);
    double ss = (prefix_sq[q] - q * m1 * m1) + (prefix_sq[p] - prefix_sq[q] - (p - q) * m2 * m2);
    double var = std::max(ss / p, 1e-300);
    double ll = -0.5 * p * std::log(2.0 * M_PI * var) - ss / (2.0 * var);
    if (ll > best_ll + 1e-12) {  // strict improvement keeps ties at smaller q
      best_ll = ll;
      best_q = q;
    }
  }
  return best_q;
}

std::vector<double> scree_magnitudes(const Graph& g, EmbeddingSource source, int cap,
                                     const EigenSolverOptions& opts) {
  int d = std::min(g.num_vertices(), cap);
  Embedding e = embed(g, source, d, EigenOrder::LargestMagnitude, opts);
  std::vector<double> mags(d);
  for (int i = 0; i < d; ++i) mags[i] = std::abs(e.eigenvalues[i]);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  return mags;
}

void save_embedding_files(const Embedding& e, const std::string& csv_path,
                          const std::string& sidecar_path) {
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot write " + csv_path);
  out << "vertex";
  for (int c = 0; c < e.coords.cols(); ++c) out << ",x" << (c + 1);
  out << "\n";
  out.precision(17);
  for (int i = 0; i < e.coords.rows(); ++i) {
    out << i;
    for (int c = 0; c < e.coords.cols(); ++c) out << "," << e.coords(i, c);
    out << "\n";
  }
  nlohmann::json side;
  side["source"] = e.source == EmbeddingSource::Adjacency ? "adjacency" : "laplacian";
  std::vector<double> vals(e.eigenvalues.data(), e.eigenvalues.data() + e.eigenvalues.size());
  side["eigenvalues"] = vals;
  std::ofstream sout(sidecar_path);
  if (!sout) throw std::runtime_error("cannot write " + sidecar_path);
  sout << side.dump(2) << "\n";
}

}  // namespace sbmkit
