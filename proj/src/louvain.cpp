#include "sbmkit/louvain.hpp"

#include <numeric>
#include <stdexcept>
#include <vector>

#include "sbmkit/rng.hpp"

namespace sbmkit {

double modularity(const Graph& g, const Partition& p, double resolution) {
  if (p.size() != g.num_vertices())
    throw std::invalid_argument("modularity: partition length mismatch");
  const double m = static_cast<double>(g.num_edges());
  if (m == 0.0) return 0.0;
  int k = p.k;
  std::vector<double> intra(k, 0.0), deg(k, 0.0);
  for (auto [i, j] : g.edges())
    if (p.labels[i] == p.labels[j]) intra[p.labels[i]] += 1.0;
  auto degrees = g.degrees();
  for (int v = 0; v < g.num_vertices(); ++v) deg[p.labels[v]] += degrees[v];
  double q = 0.0;
  for (int c = 0; c < k; ++c) {
    double frac = deg[c] / (2.0 * m);
    q += intra[c] / m - resolution * frac * frac;
  }
  return q;
}

namespace {

// weighted multigraph level for the aggregation phase
struct LevelGraph {
  int n;
  std::vector<std::vector<std::pair<int, double>>> adj;  // no self entries
  std::vector<double> self_weight;                       // loop weight per node
  std::vector<double> wdeg;                              // 2*self + sum adj
};

LevelGraph from_graph(const Graph& g) {
  LevelGraph lg;
  lg.n = g.num_vertices();
  lg.adj.resize(lg.n);
  lg.self_weight.assign(lg.n, 0.0);
  lg.wdeg.assign(lg.n, 0.0);
  for (auto [i, j] : g.edges()) {
    lg.adj[i].emplace_back(j, 1.0);
    lg.adj[j].emplace_back(i, 1.0);
  }
  for (int v = 0; v < lg.n; ++v)
    for (auto [u, w] : lg.adj[v]) lg.wdeg[v] += w;
  return lg;
}

// One local-move phase; returns community ids (renumbered contiguous) and
// whether any node moved.
bool local_phase(const LevelGraph& lg, double m, double resolution, RngStream& rng,
                 std::vector<int>& community) {
  const int n = lg.n;
  community.resize(n);
  std::iota(community.begin(), community.end(), 0);
  std::vector<double> tot(lg.wdeg);  // sum of weighted degrees per community

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  std::vector<double> link_w(n, 0.0);
  bool any_move = false;
  bool moved = true;
  int guard = 0;
  while (moved) {
    moved = false;
    if (++guard > n + 100)  // phases must terminate; each pass needs a strict gain
      throw std::runtime_error("louvain: local phase failed to terminate");
    for (int v : order) {
      int old_c = community[v];
      // weights to neighboring communities, stable first-encounter order
      std::vector<int> seen;
      for (auto [u, w] : lg.adj[v]) {
        int c = community[u];
        if (link_w[c] == 0.0 && w > 0.0) seen.push_back(c);
        link_w[c] += w;
      }
      if (link_w[old_c] == 0.0) seen.push_back(old_c);

      tot[old_c] -= lg.wdeg[v];
      community[v] = -1;
      double best_gain = link_w[old_c] / m -
                         resolution * lg.wdeg[v] * tot[old_c] / (2.0 * m * m);
      int best_c = old_c;
      for (int c : seen) {
        if (c == old_c) continue;
        double gain = link_w[c] / m - resolution * lg.wdeg[v] * tot[c] / (2.0 * m * m);
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best_c = c;
        }
      }
      community[v] = best_c;
      tot[best_c] += lg.wdeg[v];
      if (best_c != old_c) {
        moved = true;
        any_move = true;
      }
      for (int c : seen) link_w[c] = 0.0;
      link_w[old_c] = 0.0;
    }
  }
  // renumber contiguous
  std::vector<int> remap(n, -1);
  int next = 0;
  for (int v = 0; v < n; ++v) {
    if (remap[community[v]] < 0) remap[community[v]] = next++;
    community[v] = remap[community[v]];
  }
  return any_move;
}

LevelGraph aggregate(const LevelGraph& lg, const std::vector<int>& community, int k) {
  LevelGraph out;
  out.n = k;
  out.adj.resize(k);
  out.self_weight.assign(k, 0.0);
  out.wdeg.assign(k, 0.0);
  for (int v = 0; v < lg.n; ++v) {
    int cv = community[v];
    out.self_weight[cv] += lg.self_weight[v];
    for (auto [u, w] : lg.adj[v]) {
      int cu = community[u];
      if (cu == cv)
        out.self_weight[cv] += 0.5 * w;  // each intra edge seen from both ends
    }
  }
  // inter-community weights, scatter-accumulated per source community
  std::vector<double> scatter(k, 0.0);
  std::vector<int> seen;
  std::vector<std::vector<int>> members(k);
  for (int v = 0; v < lg.n; ++v) members[community[v]].push_back(v);
  for (int c = 0; c < k; ++c) {
    seen.clear();
    for (int v : members[c])
      for (auto [u, w] : lg.adj[v]) {
        int cu = community[u];
        if (cu == c) continue;
        if (scatter[cu] == 0.0) seen.push_back(cu);
        scatter[cu] += w;
      }
    for (int cu : seen) {
      out.adj[c].emplace_back(cu, scatter[cu]);
      scatter[cu] = 0.0;
    }
  }
  for (int c = 0; c < k; ++c) {
    out.wdeg[c] = 2.0 * out.self_weight[c];
    for (auto [u, w] : out.adj[c]) out.wdeg[c] += w;
  }
  return out;
}

}  // namespace

Partition louvain(const Graph& g, std::uint64_t seed, double resolution) {
  const int n = g.num_vertices();
  std::vector<int> labels(n);
  std::iota(labels.begin(), labels.end(), 0);
  if (g.num_edges() == 0) return make_partition(std::move(labels), Method::Louvain);

  RngStream rng(seed);
  const double m = static_cast<double>(g.num_edges());
  LevelGraph lg = from_graph(g);

  for (int level = 0; level < 64; ++level) {
    std::vector<int> community;
    bool moved = local_phase(lg, m, resolution, rng, community);
    int k = 0;
    for (int c : community) k = std::max(k, c + 1);
    for (int v = 0; v < n; ++v) labels[v] = community[labels[v]];
    if (!moved || k == lg.n) break;
    lg = aggregate(lg, community, k);
  }
  return make_partition(std::move(labels), Method::Louvain);
}

}  // namespace sbmkit
