#include "sbmkit/pipeline.hpp"

#include <algorithm>
#include <stdexcept>

namespace sbmkit {

ClusterResult cluster_vertices(const Graph& g, EmbeddingSource source,
                               const ClusterOptions& opts) {
  const int n = g.num_vertices();
  if (n < 1) throw std::invalid_argument("cluster_vertices: empty graph");

  ClusterResult out;
  int d;
  if (opts.dim) {
    d = *opts.dim;
    if (d < 1 || d > n) throw std::invalid_argument("cluster_vertices: bad dimension");
  } else {
    out.dim_estimated = true;
    if (n < 3) {
      d = 1;
    } else {
      auto mags = scree_magnitudes(g, source, std::min(opts.scree_cap, n), opts.eig);
      d = estimate_dimension(mags);
    }
  }
  out.dim_used = d;
  out.embedding = embed(g, source, d, opts.order, opts.eig);

  Method method = source == EmbeddingSource::Adjacency ? Method::ASE : Method::LAP;
  auto selection = select_model(out.embedding.coords, opts.k_max, opts.families,
                                opts.gmm, method);
  out.partition = std::move(selection.partition);
  out.model = std::move(selection.best);
  out.table = std::move(selection.table);
  return out;
}

}  // namespace sbmkit
