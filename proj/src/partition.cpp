#include "sbmkit/partition.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace sbmkit {

const char* method_name(Method m) {
  switch (m) {
    case Method::ASE: return "ASE";
    case Method::LAP: return "LAP";
    case Method::ICL: return "ICL";
    case Method::Louvain: return "Louvain";
  }
  return "?";
}

Partition make_partition(std::vector<int> labels, Method method) {
  std::unordered_map<int, int> remap;
  for (int& l : labels) {
    auto [it, inserted] = remap.emplace(l, static_cast<int>(remap.size()));
    l = it->second;
  }
  Partition p;
  p.labels = std::move(labels);
  p.k = static_cast<int>(remap.size());
  p.method = method;
  return p;
}

void save_partition(const Partition& p, std::ostream& out) {
  out << "vertex,label\n";
  for (std::size_t v = 0; v < p.labels.size(); ++v)
    out << v << "," << p.labels[v] << "\n";
}

void save_partition_file(const Partition& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write partition: " + path);
  save_partition(p, out);
}

Partition load_partition(std::istream& in, Method method) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("partition: empty input");
  std::vector<std::pair<int, int>> rows;
  int max_v = -1;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::istringstream ls(line);
    int v, l;
    char comma;
    if (!(ls >> v >> comma >> l) || comma != ',')
      throw std::runtime_error("partition: bad row '" + line + "'");
    rows.emplace_back(v, l);
    max_v = std::max(max_v, v);
  }
  std::vector<int> labels(max_v + 1, -1);
  for (auto [v, l] : rows) labels[v] = l;
  for (int l : labels)
    if (l < 0) throw std::runtime_error("partition: missing vertex row");
  return make_partition(std::move(labels), method);
}

Partition load_partition_file(const std::string& path, Method method) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open partition: " + path);
  return load_partition(in, method);
}

}  // namespace sbmkit
