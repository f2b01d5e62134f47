#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sbmkit/partition.hpp"

namespace sbmkit {

// Hubert-Arabie adjusted Rand index; 1 when the degenerate denominator is 0
// and the partitions agree, else 0.
double ari(const Partition& a, const Partition& b);

// entry (i,j) = ari(ps[i], ps[j]); unit diagonal, exactly symmetric.
Eigen::MatrixXd partition_comparison_matrix(const std::vector<Partition>& ps);

enum class TestMethod { Exact, NormalApprox };

struct TestResult {
  double statistic = 0.0;  // rank sum W of the x sample (mid-ranks)
  double p_value = 1.0;
  TestMethod method = TestMethod::NormalApprox;
  int n_x = 0;
  int n_y = 0;
};

// Two-sided Wilcoxon rank-sum. Exact p by enumeration when both sizes <= 10
// and there are no ties; otherwise normal approximation with tie-corrected
// variance and 0.5 continuity correction.
TestResult wilcoxon_rank_sum(const std::vector<double>& x, const std::vector<double>& y);

// Per-vertex values for named metrics; missing values allowed.
struct MetricTable {
  std::vector<std::string> metric_names;
  // metric name -> per-vertex optional value
  std::map<std::string, std::vector<std::optional<double>>> values;

  static MetricTable from_csv_file(const std::string& path);
};

enum class Correction { None, Bonferroni, BenjaminiHochberg };

struct PairTest {
  int cluster_a = 0;
  int cluster_b = 0;
  TestResult result;
  bool testable = true;
  bool significant = false;
};

struct PairwiseTestReport {
  std::vector<PairTest> pairs;  // lexicographic (a, b), a < b
  int significant_count = 0;
  int testable_count = 0;
};

PairwiseTestReport pairwise_cluster_tests(const Partition& p, const MetricTable& metrics,
                                          const std::string& metric_name, double alpha = 0.05,
                                          bool log_transform = false,
                                          Correction correction = Correction::None);

}  // namespace sbmkit
