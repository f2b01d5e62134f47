// sbmkit command line: simulate / cluster / compare / validate / project.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sbmkit/icl.hpp"
#include "sbmkit/louvain.hpp"
#include "sbmkit/pipeline.hpp"
#include "sbmkit/sbm.hpp"
#include "sbmkit/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sbmkit;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void write_report(const json& body, double elapsed, const fs::path& path) {
  json wrapped = body;
  wrapped["toolkit_version"] = kVersion;
  // timing lives under its own key so determinism checks can strip it
  wrapped["timing"] = {{"elapsed_seconds", elapsed}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path.string());
  out << wrapped.dump(2) << "\n";
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::string> resolve_algos(const std::string& algo) {
  if (algo == "all") return {"ase", "lap", "icl", "louvain"};
  return split_list(algo);
}

std::vector<CovarianceFamily> resolve_families(const std::string& families) {
  if (families == "all") return {kAllFamilies.begin(), kAllFamilies.end()};
  std::vector<CovarianceFamily> out;
  for (const auto& name : split_list(families)) out.push_back(family_from_name(name));
  return out;
}

struct AlgoRun {
  Partition partition;
  int k_hat = 0;
  int dim_used = 0;
};

AlgoRun run_algorithm(const std::string& algo, const Graph& g, std::optional<int> dim,
                      int k_max, const std::vector<CovarianceFamily>& families,
                      double resolution, std::uint64_t seed) {
  AlgoRun out;
  if (algo == "ase" || algo == "lap") {
    ClusterOptions copts;
    copts.dim = dim;
    copts.k_max = k_max;
    copts.families = families;
    copts.gmm.seed = seed;
    copts.eig.seed = seed;
    auto res = cluster_vertices(
        g, algo == "ase" ? EmbeddingSource::Adjacency : EmbeddingSource::Laplacian, copts);
    out.partition = std::move(res.partition);
    out.dim_used = res.dim_used;
  } else if (algo == "icl") {
    IclOptions iopts;
    iopts.seed = seed;
    auto sel = icl_select(g, k_max, iopts);
    out.partition = std::move(sel.best.labels);
  } else if (algo == "louvain") {
    out.partition = louvain(g, seed, resolution);
  } else {
    throw std::invalid_argument("unknown algorithm: " + algo);
  }
  out.k_hat = out.partition.k;
  return out;
}

int cmd_simulate(const std::string& params_path, int n, int blocks, double p_in, double p_out,
                 int replicates, const std::string& algo, int dim, int k_max,
                 const std::string& families_arg, double resolution, std::uint64_t seed,
                 const std::string& out_dir) {
  Timer timer;
  SbmParams params;
  int sample_n = n;
  std::optional<int> dim_opt = dim > 0 ? std::optional<int>(dim) : std::nullopt;
  if (!params_path.empty()) {
    json cfg;
    std::ifstream in(params_path);
    if (!in) {
      std::cerr << "error: cannot open params file " << params_path << "\n";
      return kExitInput;
    }
    in >> cfg;
    params.K = cfg.at("K").get<int>();
    params.pi = cfg.at("pi").get<std::vector<double>>();
    auto rows = cfg.at("B").get<std::vector<std::vector<double>>>();
    params.B.resize(params.K, params.K);
    for (int i = 0; i < params.K; ++i)
      for (int c = 0; c < params.K; ++c) params.B(i, c) = rows.at(i).at(c);
    if (cfg.contains("n")) sample_n = cfg["n"].get<int>();
    if (cfg.contains("dim") && cfg["dim"].get<int>() > 0) dim_opt = cfg["dim"].get<int>();
    if (cfg.contains("replicates") && replicates <= 0)
      replicates = cfg["replicates"].get<int>();
    if (cfg.contains("k_max") && k_max <= 0) k_max = cfg["k_max"].get<int>();
  } else {
    params = SbmParams::planted(blocks, p_in, p_out);
  }
  if (replicates <= 0) replicates = 50;
  if (k_max <= 0) k_max = 10;
  params.validate();
  if (sample_n < 1) {
    std::cerr << "error: n must be positive\n";
    return kExitInput;
  }

  auto algos = resolve_algos(algo);
  auto families = resolve_families(families_arg);
  fs::create_directories(out_dir);

  struct Row {
    std::map<std::string, int> k_hat;
    std::map<std::string, double> ari_truth;
    std::map<std::string, int> dim_used;
  };
  std::vector<Row> rows(replicates);

#pragma omp parallel for schedule(dynamic)
  for (int rep = 0; rep < replicates; ++rep) {
    auto sample = sample_sbm(sample_n, params, derive_seed(seed, rep));
    Partition truth = make_partition(sample.labels, Method::ASE);
    for (std::size_t a = 0; a < algos.size(); ++a) {
      auto run = run_algorithm(algos[a], sample.graph, dim_opt, k_max, families, resolution,
                               derive_seed(seed, rep, 100 + a));
      rows[rep].k_hat[algos[a]] = run.k_hat;
      rows[rep].ari_truth[algos[a]] = ari(truth, run.partition);
      rows[rep].dim_used[algos[a]] = run.dim_used;
    }
  }

  json report;
  report["command"] = "simulate";
  report["seed"] = seed;
  report["config"] = {{"n", sample_n},
                      {"K", params.K},
                      {"pi", params.pi},
                      {"replicates", replicates},
                      {"algo", algos},
                      {"dim", dim_opt ? *dim_opt : 0},
                      {"kmax", k_max},
                      {"resolution", resolution}};
  std::vector<std::vector<double>> b_rows(params.K, std::vector<double>(params.K));
  for (int i = 0; i < params.K; ++i)
    for (int c = 0; c < params.K; ++c) b_rows[i][c] = params.B(i, c);
  report["config"]["B"] = b_rows;

  json reps = json::array();
  for (int rep = 0; rep < replicates; ++rep) {
    json row;
    row["replicate"] = rep;
    for (const auto& a : algos) {
      row[a] = {{"k_hat", rows[rep].k_hat[a]}, {"ari", rows[rep].ari_truth[a]}};
      if (a == "ase" || a == "lap") row[a]["dim_used"] = rows[rep].dim_used[a];
    }
    reps.push_back(row);
  }
  report["replicates"] = reps;

  json summary;
  for (const auto& a : algos) {
    double mean_ari = 0.0;
    std::map<int, int> hist;
    for (int rep = 0; rep < replicates; ++rep) {
      mean_ari += rows[rep].ari_truth[a];
      hist[rows[rep].k_hat[a]]++;
    }
    mean_ari /= replicates;
    json h = json::object();
    for (auto [k, c] : hist) h[std::to_string(k)] = c;
    summary[a] = {{"mean_ari", mean_ari}, {"k_hat_histogram", h}};
  }
  report["summary"] = summary;
  write_report(report, timer.seconds(), fs::path(out_dir) / "simulate_report.json");
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_project(const std::string& events_path, const std::string& out_prefix,
                int max_user_sites) {
  auto log = load_event_log_file(events_path);
  auto projected = project_covisitation(log, max_user_sites);
  save_graph_files(projected.graph, out_prefix + ".edges", out_prefix + ".json",
                   projected.vertex_names);
  std::cout << "n=" << projected.graph.num_vertices()
            << " edges=" << projected.graph.num_edges() << "\n";
  return 0;
}

int cmd_cluster(const std::string& graph_path, const std::string& events_path,
                const std::string& algo, int dim, int k_max, const std::string& families_arg,
                double resolution, std::uint64_t seed, const std::string& out_dir) {
  Timer timer;
  if (k_max <= 0) k_max = 10;
  Graph g;
  std::vector<std::string> vertex_names;
  if (!graph_path.empty()) {
    g = load_edge_list_file(graph_path);
  } else if (!events_path.empty()) {
    auto projected = project_covisitation(load_event_log_file(events_path));
    g = std::move(projected.graph);
    vertex_names = std::move(projected.vertex_names);
  } else {
    std::cerr << "error: need --graph or --events\n";
    return kExitInput;
  }

  auto algos = resolve_algos(algo);
  auto families = resolve_families(families_arg);
  std::optional<int> dim_opt = dim > 0 ? std::optional<int>(dim) : std::nullopt;
  fs::create_directories(out_dir);

  json report;
  report["command"] = "cluster";
  report["seed"] = seed;
  report["config"] = {{"algo", algos},    {"dim", dim},
                      {"kmax", k_max},    {"resolution", resolution},
                      {"graph", graph_path}, {"events", events_path}};
  report["graph"] = {{"n", g.num_vertices()}, {"edges", g.num_edges()}};

  for (std::size_t a = 0; a < algos.size(); ++a) {
    const std::string& name = algos[a];
    if (name == "ase" || name == "lap") {
      ClusterOptions copts;
      copts.dim = dim_opt;
      copts.k_max = k_max;
      copts.families = families;
      copts.gmm.seed = derive_seed(seed, 100 + a);
      copts.eig.seed = copts.gmm.seed;
      auto res = cluster_vertices(
          g, name == "ase" ? EmbeddingSource::Adjacency : EmbeddingSource::Laplacian, copts);
      save_partition_file(res.partition,
                          (fs::path(out_dir) / ("partition_" + name + ".csv")).string());
      std::ofstream mj(fs::path(out_dir) / ("model_" + name + ".json"));
      mj << model_to_json(res.model) << "\n";
      std::ofstream sj(fs::path(out_dir) / ("selection_" + name + ".json"));
      sj << selection_table_to_json(res.table) << "\n";
      report[name] = {{"k_hat", res.partition.k},
                      {"dim_used", res.dim_used},
                      {"dim_estimated", res.dim_estimated},
                      {"bic", res.model.bic},
                      {"family", family_name(res.model.family)}};
      if (res.dim_estimated)
        std::cout << name << ": estimated D = " << res.dim_used << "\n";
    } else if (name == "icl") {
      IclOptions iopts;
      iopts.seed = derive_seed(seed, 100 + a);
      auto sel = icl_select(g, k_max, iopts);
      save_partition_file(sel.best.labels,
                          (fs::path(out_dir) / "partition_icl.csv").string());
      json table = json::array();
      for (auto [k, v] : sel.table) table.push_back({{"K", k}, {"icl", v}});
      std::ofstream tj(fs::path(out_dir) / "icl_report.json");
      tj << table.dump(2) << "\n";
      report[name] = {{"k_hat", sel.best.K}, {"icl", sel.best.icl}};
    } else if (name == "louvain") {
      auto p = louvain(g, derive_seed(seed, 100 + a), resolution);
      save_partition_file(p, (fs::path(out_dir) / "partition_louvain.csv").string());
      report[name] = {{"k_hat", p.k}, {"modularity", modularity(g, p, resolution)}};
    } else {
      std::cerr << "error: unknown algorithm " << name << "\n";
      return kExitInput;
    }
    std::cout << name << ": k_hat = " << report[name]["k_hat"] << "\n";
  }
  if (!vertex_names.empty()) report["vertex_names"] = vertex_names;
  write_report(report, timer.seconds(), fs::path(out_dir) / "cluster_report.json");
  return 0;
}

int cmd_compare(const std::vector<std::string>& partition_paths, const std::string& out_dir) {
  Timer timer;
  if (partition_paths.size() < 2) {
    std::cerr << "error: need at least 2 partition files\n";
    return kExitInput;
  }
  std::vector<Partition> ps;
  for (const auto& path : partition_paths) ps.push_back(load_partition_file(path));
  for (const auto& p : ps)
    if (p.size() != ps[0].size()) {
      std::cerr << "error: partition length mismatch\n";
      return kExitInput;
    }
  auto mat = partition_comparison_matrix(ps);

  fs::create_directories(out_dir);
  json report;
  report["command"] = "compare";
  report["config"] = {{"partitions", partition_paths}};
  std::vector<std::vector<double>> m_rows(ps.size(), std::vector<double>(ps.size()));
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (std::size_t j = 0; j < ps.size(); ++j) m_rows[i][j] = mat(i, j);
  report["ari_matrix"] = m_rows;

  std::vector<std::tuple<double, int, int>> pairs;
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (std::size_t j = i + 1; j < ps.size(); ++j)
      pairs.emplace_back(mat(i, j), static_cast<int>(i), static_cast<int>(j));
  std::sort(pairs.begin(), pairs.end(), std::greater<>());
  json ranked = json::array();
  for (auto [v, i, j] : pairs)
    ranked.push_back({{"a", partition_paths[i]}, {"b", partition_paths[j]}, {"ari", v}});
  report["ranked_pairs"] = ranked;
  write_report(report, timer.seconds(), fs::path(out_dir) / "compare_report.json");
  std::cout << report["ari_matrix"].dump() << "\n";
  return 0;
}

int cmd_validate(const std::string& partition_path, const std::string& metrics_path,
                 double alpha, bool log_metrics, const std::string& correction_arg,
                 const std::string& out_dir) {
  Timer timer;
  auto partition = load_partition_file(partition_path);
  auto metrics = MetricTable::from_csv_file(metrics_path);
  Correction correction = Correction::None;
  if (correction_arg == "bonferroni") correction = Correction::Bonferroni;
  else if (correction_arg == "bh") correction = Correction::BenjaminiHochberg;
  else if (correction_arg != "none") {
    std::cerr << "error: unknown correction " << correction_arg << "\n";
    return kExitInput;
  }

  fs::create_directories(out_dir);
  json report;
  report["command"] = "validate";
  report["config"] = {{"partition", partition_path},
                      {"metrics", metrics_path},
                      {"alpha", alpha},
                      {"log_metrics", log_metrics},
                      {"correction", correction_arg}};

  for (const auto& metric : metrics.metric_names) {
    auto res = pairwise_cluster_tests(partition, metrics, metric, alpha, log_metrics,
                                      correction);
    json pairs = json::array();
    for (const auto& pt : res.pairs) {
      json row;
      row["pair"] = {pt.cluster_a, pt.cluster_b};
      row["testable"] = pt.testable;
      if (pt.testable) {
        row["W"] = pt.result.statistic;
        row["p"] = pt.result.p_value;
        row["method"] = pt.result.method == TestMethod::Exact ? "exact" : "normal-approx";
        row["significant"] = pt.significant;
      }
      pairs.push_back(row);
    }
    report["metrics"][metric] = {{"pairs", pairs},
                                 {"significant_pairs", res.significant_count},
                                 {"testable_pairs", res.testable_count}};
    std::cout << metric << ": " << res.significant_count << "/" << res.testable_count
              << " significant pairs at alpha=" << alpha << "\n";
  }
  write_report(report, timer.seconds(), fs::path(out_dir) / "validate_report.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BIC-based spectral vertex clustering toolkit for stochastic blockmodels"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::string algo = "all";
  std::string families = "all";
  int dim = 0;
  int k_max = 0;
  double resolution = 1.0;
  double alpha = 0.05;

  auto* sim = app.add_subcommand("simulate", "Sample SBMs and score recovery per algorithm");
  std::string params_path;
  int sim_n = 600, sim_blocks = 3, replicates = 0;
  double p_in = 0.3, p_out = 0.1;
  sim->add_option("--params", params_path, "Scenario JSON (K, pi, B, optional n/dim/replicates)");
  sim->add_option("--n", sim_n, "Vertex count");
  sim->add_option("--blocks", sim_blocks, "True block count (planted scenario)");
  sim->add_option("--p-in", p_in, "Within-block edge probability");
  sim->add_option("--p-out", p_out, "Cross-block edge probability");
  sim->add_option("--replicates", replicates, "Replicate count (default 50)");
  sim->add_option("--algo", algo, "ase,lap,icl,louvain or all");
  sim->add_option("--dim", dim, "Embedding dimension (0 = auto)");
  sim->add_option("--kmax", k_max, "Largest candidate cluster count (0 = scenario value or 10)");
  sim->add_option("--families", families, "Covariance families (comma list or all)");
  sim->add_option("--resolution", resolution, "Louvain resolution");
  sim->add_option("--seed", seed, "Base RNG seed");
  sim->add_option("--out-dir", out_dir, "Report directory");

  auto* clu = app.add_subcommand("cluster", "Cluster a real graph end to end");
  std::string graph_path, events_path;
  clu->add_option("--graph", graph_path, "Edge-list file");
  clu->add_option("--events", events_path, "Event-log CSV (co-visitation projection)");
  clu->add_option("--algo", algo, "ase,lap,icl,louvain or all");
  clu->add_option("--dim", dim, "Embedding dimension (0 = auto via profile likelihood)");
  clu->add_option("--kmax", k_max, "Largest candidate cluster count (0 = 10)");
  clu->add_option("--families", families, "Covariance families (comma list or all)");
  clu->add_option("--resolution", resolution, "Louvain resolution");
  clu->add_option("--seed", seed, "Base RNG seed");
  clu->add_option("--out-dir", out_dir, "Output directory");

  auto* cmp = app.add_subcommand("compare", "Pairwise ARI matrix over partition files");
  std::vector<std::string> partition_paths;
  cmp->add_option("partitions", partition_paths, "Partition CSV files")->expected(-1);
  cmp->add_option("--out-dir", out_dir, "Report directory");

  auto* val = app.add_subcommand("validate", "Pairwise Wilcoxon tests on cluster metrics");
  std::string partition_path, metrics_path, correction = "none";
  bool log_metrics = false;
  val->add_option("--partition", partition_path, "Partition CSV")->required();
  val->add_option("--metrics", metrics_path, "Metric CSV (vertex,<metric>...)")->required();
  val->add_option("--alpha", alpha, "Significance level");
  val->add_flag("--log-metrics", log_metrics, "log1p-transform metric values");
  val->add_option("--correction", correction, "none|bonferroni|bh");
  val->add_option("--out-dir", out_dir, "Report directory");

  auto* prj = app.add_subcommand("project", "Event log to co-visitation edge list");
  std::string events_in, out_prefix = "graph";
  int max_user_sites = 0;
  prj->add_option("--events", events_in, "Event-log CSV")->required();
  prj->add_option("--out", out_prefix, "Output prefix (.edges/.json)");
  prj->add_option("--max-user-sites", max_user_sites,
                  "Skip users visiting more than this many sites (0 = no filter)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return cmd_simulate(params_path, sim_n, sim_blocks, p_in, p_out, replicates, algo, dim,
                          k_max, families, resolution, seed, out_dir);
    if (clu->parsed())
      return cmd_cluster(graph_path, events_path, algo, dim, k_max, families, resolution, seed,
                         out_dir);
    if (cmp->parsed()) return cmd_compare(partition_paths, out_dir);
    if (val->parsed())
      return cmd_validate(partition_path, metrics_path, alpha, log_metrics, correction,
                          out_dir);
    if (prj->parsed()) return cmd_project(events_in, out_prefix, max_user_sites);
  } catch (const ConvergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return 0;
}
