#include "sbmkit/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace sbmkit {

Graph Graph::from_edges(int n, std::vector<std::pair<int, int>> edges) {
  if (n < 0) throw std::invalid_argument("Graph: negative vertex count");
  std::vector<std::pair<int, int>> cleaned;
  cleaned.reserve(edges.size());
  for (auto [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw std::invalid_argument("Graph: vertex id out of range");
    if (i == j) continue;  // hollow
    if (i > j) std::swap(i, j);
    cleaned.emplace_back(i, j);
  }
  std::sort(cleaned.begin(), cleaned.end());
  cleaned.erase(std::unique(cleaned.begin(), cleaned.end()), cleaned.end());

  Graph g;
  g.n_ = n;
  g.edges_ = std::move(cleaned);

  std::vector<int> deg(n, 0);
  for (auto [i, j] : g.edges_) {
    ++deg[i];
    ++deg[j];
  }
  g.offsets_.assign(n + 1, 0);
  for (int v = 0; v < n; ++v) g.offsets_[v + 1] = g.offsets_[v] + deg[v];
  g.neighbors_.resize(g.offsets_[n]);
  std::vector<int> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (auto [i, j] : g.edges_) {
    g.neighbors_[cursor[i]++] = j;
    g.neighbors_[cursor[j]++] = i;
  }
  for (int v = 0; v < n; ++v)
    std::sort(g.neighbors_.begin() + g.offsets_[v], g.neighbors_.begin() + g.offsets_[v + 1]);
  return g;
}

std::vector<int> Graph::degrees() const {
  std::vector<int> d(n_);
  for (int v = 0; v < n_; ++v) d[v] = degree(v);
  return d;
}

bool Graph::has_edge(int i, int j) const {
  if (i == j) return false;
  auto begin = neighbors_.begin() + offsets_[i];
  auto end = neighbors_.begin() + offsets_[i + 1];
  return std::binary_search(begin, end, j);
}

Eigen::MatrixXd Graph::dense_adjacency() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
  for (auto [i, j] : edges_) {
    a(i, j) = 1.0;
    a(j, i) = 1.0;
  }
  return a;
}

Graph load_edge_list(std::istream& in) {
  std::vector<std::pair<int, int>> edges;
  int max_id = -1;
  int header_n = -1;
  std::string line;
  int lineno = 0;
  bool saw_content = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string trimmed = line;
    trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
    if (trimmed.empty()) continue;
    if (trimmed.rfind("n=", 0) == 0) {
      try {
        header_n = std::stoi(trimmed.substr(2));
      } catch (const std::exception&) {
        throw std::runtime_error("edge list line " + std::to_string(lineno) + ": bad header");
      }
      saw_content = true;
      continue;
    }
    std::istringstream ls(trimmed);
    long long i, j;
    if (!(ls >> i >> j) || i < 0 || j < 0)
      throw std::runtime_error("edge list line " + std::to_string(lineno) +
                               ": expected two non-negative integers");
    std::string rest;
    if (ls >> rest)
      throw std::runtime_error("edge list line " + std::to_string(lineno) + ": trailing tokens");
    edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
    max_id = std::max(max_id, static_cast<int>(std::max(i, j)));
    saw_content = true;
  }
  if (!saw_content) throw std::runtime_error("edge list: empty input");
  int n = header_n >= 0 ? header_n : max_id + 1;
  if (header_n >= 0 && max_id >= header_n)
    throw std::runtime_error("edge list: vertex id exceeds declared n");
  return Graph::from_edges(n, std::move(edges));
}

Graph load_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);
  return load_edge_list(in);
}

void save_edge_list(const Graph& g, std::ostream& out) {
  out << "n=" << g.num_vertices() << "\n";
  for (auto [i, j] : g.edges()) out << i << " " << j << "\n";
}

void save_graph_files(const Graph& g, const std::string& edge_path,
                      const std::string& sidecar_path,
                      const std::vector<std::string>& vertex_names) {
  std::ofstream out(edge_path);
  if (!out) throw std::runtime_error("cannot write " + edge_path);
  save_edge_list(g, out);
  nlohmann::json side;
  side["n"] = g.num_vertices();
  side["vertex_names"] = vertex_names;
  std::ofstream sout(sidecar_path);
  if (!sout) throw std::runtime_error("cannot write " + sidecar_path);
  sout << side.dump(2) << "\n";
}

namespace {
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}
}  // namespace

EventLog load_event_log(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("event log: empty input");
  auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "user_id" || header[1] != "site_id")
    throw std::runtime_error("event log: expected header user_id,site_id[,timestamp]");
  EventLog log;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() < 2 || fields[0].empty() || fields[1].empty())
      throw std::runtime_error("event log line " + std::to_string(lineno) + ": bad record");
    log.records.emplace_back(fields[0], fields[1]);
  }
  return log;
}

EventLog load_event_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open event log: " + path);
  return load_event_log(in);
}

ProjectedGraph project_covisitation(const EventLog& log, int max_user_sites) {
  if (log.records.empty()) throw std::runtime_error("project_covisitation: empty log");
  // Site index by first appearance, so outputs stay interpretable.
  std::map<std::string, int> site_index;
  std::vector<std::string> names;
  std::map<std::string, std::set<int>> user_sites;
  for (const auto& [user, site] : log.records) {
    auto it = site_index.find(site);
    int idx;
    if (it == site_index.end()) {
      idx = static_cast<int>(names.size());
      site_index.emplace(site, idx);
      names.push_back(site);
    } else {
      idx = it->second;
    }
    user_sites[user].insert(idx);
  }
  std::vector<std::pair<int, int>> edges;
  for (const auto& [user, sites] : user_sites) {
    if (max_user_sites > 0 && static_cast<int>(sites.size()) > max_user_sites) continue;
    for (auto it = sites.begin(); it != sites.end(); ++it)
      for (auto jt = std::next(it); jt != sites.end(); ++jt)
        edges.emplace_back(*it, *jt);
  }
  ProjectedGraph out;
  out.graph = Graph::from_edges(static_cast<int>(names.size()), std::move(edges));
  out.vertex_names = std::move(names);
  return out;
}

Graph normalize_matrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("normalize_matrix: matrix not square");
  int n = static_cast<int>(m.rows());
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::max(m(i, j), m(j, i)) > 0.0) edges.emplace_back(i, j);
  return Graph::from_edges(n, std::move(edges));
}

}  // namespace sbmkit
