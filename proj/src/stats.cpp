#include "sbmkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sbmkit {

double ari(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) throw std::invalid_argument("ari: partition length mismatch");
  const int n = a.size();
  const int ka = a.k, kb = b.k;
  Eigen::MatrixXd cont = Eigen::MatrixXd::Zero(ka, kb);
  for (int i = 0; i < n; ++i) cont(a.labels[i], b.labels[i]) += 1.0;

  auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double sum_cells = 0.0;
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j) sum_cells += comb2(cont(i, j));
  double sum_a = 0.0, sum_b = 0.0;
  for (int i = 0; i < ka; ++i) sum_a += comb2(cont.row(i).sum());
  for (int j = 0; j < kb; ++j) sum_b += comb2(cont.col(j).sum());
  double total = comb2(static_cast<double>(n));
  double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
  double max_index = 0.5 * (sum_a + sum_b);
  double denom = max_index - expected;
  if (denom == 0.0) return a.labels == b.labels ? 1.0 : 0.0;
  return (sum_cells - expected) / denom;
}

Eigen::MatrixXd partition_comparison_matrix(const std::vector<Partition>& ps) {
  if (ps.size() < 2)
    throw std::invalid_argument("partition_comparison_matrix: need at least 2 partitions");
  const int m = static_cast<int>(ps.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      double v = ari(ps[i], ps[j]);
      out(i, j) = v;
      out(j, i) = v;
    }
  return out;
}

namespace {

// mid-ranks of the pooled sample; returns (ranks, tie group sizes)
std::pair<std::vector<double>, std::vector<int>> midranks(std::vector<double> pooled) {
  const int n = static_cast<int>(pooled.size());
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return pooled[a] < pooled[b]; });
  std::vector<double> ranks(n);
  std::vector<int> tie_sizes;
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && pooled[idx[j + 1]] == pooled[idx[i]]) ++j;
    double r = 0.5 * (i + j) + 1.0;
    for (int t = i; t <= j; ++t) ranks[idx[t]] = r;
    tie_sizes.push_back(j - i + 1);
    i = j + 1;
  }
  return {ranks, tie_sizes};
}

// Exact tie-free null distribution of the rank sum: dp[s] = #subsets of size
// n_x from ranks 1..N with sum s.
std::vector<double> exact_ranksum_counts(int n_x, int big_n) {
  int max_sum = 0;
  for (int r = big_n - n_x + 1; r <= big_n; ++r) max_sum += r;
  std::vector<std::vector<double>> dp(n_x + 1, std::vector<double>(max_sum + 1, 0.0));
  dp[0][0] = 1.0;
  for (int r = 1; r <= big_n; ++r)
    for (int j = std::min(n_x, r); j >= 1; --j)
      for (int s = max_sum; s >= r; --s)
        if (dp[j - 1][s - r] > 0.0) dp[j][s] += dp[j - 1][s - r];
  return dp[n_x];
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

TestResult wilcoxon_rank_sum(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.empty() || y.empty()) throw std::invalid_argument("wilcoxon_rank_sum: empty sample");
  const int n_x = static_cast<int>(x.size());
  const int n_y = static_cast<int>(y.size());
  const int big_n = n_x + n_y;

  std::vector<double> pooled(x);
  pooled.insert(pooled.end(), y.begin(), y.end());
  auto [ranks, tie_sizes] = midranks(pooled);
  double w = 0.0;
  for (int i = 0; i < n_x; ++i) w += ranks[i];

  TestResult res;
  res.statistic = w;
  res.n_x = n_x;
  res.n_y = n_y;

  bool tie_free = static_cast<int>(tie_sizes.size()) == big_n;
  if (n_x <= 10 && n_y <= 10 && tie_free) {
    res.method = TestMethod::Exact;
    auto counts = exact_ranksum_counts(n_x, big_n);
    double total = 0.0;
    for (double c : counts) total += c;
    int wi = static_cast<int>(std::llround(w));
    double le = 0.0, ge = 0.0;
    for (int s = 0; s < static_cast<int>(counts.size()); ++s) {
      if (s <= wi) le += counts[s];
      if (s >= wi) ge += counts[s];
    }
    double one_sided = std::min(le, ge) / total;
    res.p_value = std::min(1.0, 2.0 * one_sided);
  } else {
    res.method = TestMethod::NormalApprox;
    double mean = n_x * (big_n + 1.0) / 2.0;
    double tie_term = 0.0;
    for (int t : tie_sizes) tie_term += static_cast<double>(t) * t * t - t;
    double var = n_x * static_cast<double>(n_y) * (big_n + 1.0) / 12.0 -
                 n_x * static_cast<double>(n_y) * tie_term /
                     (12.0 * big_n * (big_n - 1.0));
    if (var <= 0.0) {  // all values tied
      res.p_value = 1.0;
      return res;
    }
    double diff = w - mean;
    double cc = diff > 0.0 ? -0.5 : (diff < 0.0 ? 0.5 : 0.0);
    double z = (diff + cc) / std::sqrt(var);
    res.p_value = std::min(1.0, 2.0 * normal_sf(std::abs(z)));
  }
  return res;
}

MetricTable MetricTable::from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("metrics: empty file");
  std::vector<std::string> header;
  {
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        header.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur.push_back(c);
      }
    }
    header.push_back(cur);
  }
  if (header.empty() || header[0] != "vertex")
    throw std::runtime_error("metrics: first column must be 'vertex'");

  MetricTable table;
  for (std::size_t c = 1; c < header.size(); ++c) {
    table.metric_names.push_back(header[c]);
    table.values[header[c]] = {};
  }
  std::vector<std::pair<int, std::vector<std::optional<double>>>> rows;
  int max_v = -1;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
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
    if (fields.size() != header.size())
      throw std::runtime_error("metrics: ragged row '" + line + "'");
    int v = std::stoi(fields[0]);
    std::vector<std::optional<double>> vals;
    for (std::size_t c = 1; c < fields.size(); ++c)
      vals.push_back(fields[c].empty() ? std::nullopt
                                       : std::optional<double>(std::stod(fields[c])));
    rows.emplace_back(v, std::move(vals));
    max_v = std::max(max_v, v);
  }
  for (auto& name : table.metric_names)
    table.values[name].assign(max_v + 1, std::nullopt);
  for (auto& [v, vals] : rows)
    for (std::size_t c = 0; c < table.metric_names.size(); ++c)
      table.values[table.metric_names[c]][v] = vals[c];
  return table;
}

PairwiseTestReport pairwise_cluster_tests(const Partition& p, const MetricTable& metrics,
                                          const std::string& metric_name, double alpha,
                                          bool log_transform, Correction correction) {
  auto it = metrics.values.find(metric_name);
  if (it == metrics.values.end())
    throw std::invalid_argument("pairwise_cluster_tests: unknown metric " + metric_name);
  const auto& column = it->second;
  if (static_cast<int>(column.size()) > p.size())
    throw std::invalid_argument("pairwise_cluster_tests: metric indexes past partition");

  std::vector<std::vector<double>> per_cluster(p.k);
  for (std::size_t v = 0; v < column.size(); ++v)
    if (column[v]) {
      double val = *column[v];
      per_cluster[p.labels[v]].push_back(log_transform ? std::log1p(val) : val);
    }

  PairwiseTestReport report;
  for (int a = 0; a < p.k; ++a)
    for (int b = a + 1; b < p.k; ++b) {
      PairTest pt;
      pt.cluster_a = a;
      pt.cluster_b = b;
      if (per_cluster[a].empty() || per_cluster[b].empty()) {
        pt.testable = false;
      } else {
        pt.result = wilcoxon_rank_sum(per_cluster[a], per_cluster[b]);
        ++report.testable_count;
      }
      report.pairs.push_back(pt);
    }

  // significance decisions, optionally corrected
  std::vector<PairTest*> testable;
  for (auto& pt : report.pairs)
    if (pt.testable) testable.push_back(&pt);
  const int m = static_cast<int>(testable.size());
  if (correction == Correction::None) {
    for (auto* pt : testable) pt->significant = pt->result.p_value < alpha;
  } else if (correction == Correction::Bonferroni) {
    for (auto* pt : testable) pt->significant = pt->result.p_value < alpha / std::max(1, m);
  } else {
    std::vector<int> order(m);
    for (int i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return testable[a]->result.p_value < testable[b]->result.p_value;
    });
    int cutoff = -1;
    for (int r = 0; r < m; ++r)
      if (testable[order[r]]->result.p_value <= alpha * (r + 1) / m) cutoff = r;
    for (int r = 0; r < m; ++r) testable[order[r]]->significant = r <= cutoff;
  }
  for (auto* pt : testable)
    if (pt->significant) ++report.significant_count;
  return report;
}

}  // namespace sbmkit
