#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sbmkit {

enum class Method { ASE, LAP, ICL, Louvain };

const char* method_name(Method m);

// Cluster assignment over n vertices; labels are contiguous in [0, k).
struct Partition {
  std::vector<int> labels;
  int k = 0;
  Method method = Method::ASE;

  int size() const { return static_cast<int>(labels.size()); }
};

// Renumbers labels so the used ids are exactly 0..k-1, preserving
// first-appearance order.
Partition make_partition(std::vector<int> labels, Method method);

// CSV "vertex,label"
void save_partition(const Partition& p, std::ostream& out);
void save_partition_file(const Partition& p, const std::string& path);
Partition load_partition(std::istream& in, Method method = Method::ASE);
Partition load_partition_file(const std::string& path, Method method = Method::ASE);

}  // namespace sbmkit
