#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace sbmkit {

// Simple undirected graph: symmetric, binary, hollow adjacency.
// Immutable after construction; edges stored as sorted (i<j) pairs plus a
// CSR neighbor index for row access.
class Graph {
 public:
  Graph() = default;

  // Drops self-loops, collapses duplicates and (j,i) mirrors.
  static Graph from_edges(int n, std::vector<std::pair<int, int>> edges);

  int num_vertices() const { return n_; }
  std::int64_t num_edges() const { return static_cast<std::int64_t>(edges_.size()); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  // CSR access
  const std::vector<int>& offsets() const { return offsets_; }
  const std::vector<int>& neighbors() const { return neighbors_; }
  int degree(int v) const { return offsets_[v + 1] - offsets_[v]; }

  std::vector<int> degrees() const;
  bool has_edge(int i, int j) const;
  Eigen::MatrixXd dense_adjacency() const;

 private:
  int n_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<int> offsets_{0};
  std::vector<int> neighbors_;
};

// (user_id, site_id) visitation records; timestamps, if any, are dropped
// upstream. Site ids are mapped to vertex indices in first-appearance order.
struct EventLog {
  std::vector<std::pair<std::string, std::string>> records;
};

struct ProjectedGraph {
  Graph graph;
  std::vector<std::string> vertex_names;  // site_id per vertex index
};

// Edge-list text format: lines "i j", '#' comments, optional "n=<int>" header.
Graph load_edge_list(std::istream& in);
Graph load_edge_list_file(const std::string& path);
void save_edge_list(const Graph& g, std::ostream& out);
void save_graph_files(const Graph& g, const std::string& edge_path,
                      const std::string& sidecar_path,
                      const std::vector<std::string>& vertex_names = {});

// CSV with header user_id,site_id[,timestamp].
EventLog load_event_log(std::istream& in);
EventLog load_event_log_file(const std::string& path);

// Co-visitation projection: sites are vertices, edge iff some user visited
// both. max_user_sites > 0 skips users with more than that many distinct
// sites (0 = no filter).
ProjectedGraph project_covisitation(const EventLog& log, int max_user_sites = 0);

// A = 1{max(M, M^T) > 0} with zeroed diagonal.
Graph normalize_matrix(const Eigen::MatrixXd& m);

}  // namespace sbmkit
