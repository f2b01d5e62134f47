#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "sbmkit/graph.hpp"
#include "sbmkit/rng.hpp"
#include "sbmkit/sbm.hpp"

using namespace sbmkit;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kCli = SBMKIT_CLI_PATH;

int run(const std::string& args) {
  std::string cmd = kCli + " " + args + " > cli_stdout.txt 2> cli_stderr.txt";
  int status = std::system(cmd.c_str());
#ifdef _WIN32
  return status;
#else
  return WEXITSTATUS(status);
#endif
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load_json(const fs::path& path) { return json::parse(slurp(path)); }

// report comparison with the wall-clock entry removed
std::string stripped(const fs::path& path) {
  json j = load_json(path);
  j.erase("timing");
  return j.dump();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::path("cli_scratch") / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
};

void write_two_block_graph(const std::string& edge_path, const std::string& metrics_path,
                           std::uint64_t seed) {
  auto sample = sample_sbm(150, SbmParams::planted(2, 0.5, 0.05), seed);
  std::ofstream out(edge_path);
  save_edge_list(sample.graph, out);
  out.close();
  RngStream rng(seed + 1);
  std::ofstream met(metrics_path);
  met << "vertex,spend\n";
  for (int v = 0; v < 150; ++v)
    met << v << "," << 5.0 * sample.labels[v] + rng.uniform() << "\n";
}

}  // namespace

TEST_CASE("simulate: planted scenario produces a summary report") {
  TempDir dir("simulate");
  int rc = run("simulate --n 150 --blocks 2 --p-in 0.5 --p-out 0.1 --replicates 3 "
               "--algo ase,louvain --dim 2 --kmax 4 --seed 5 --out-dir " + dir.path.string());
  REQUIRE(rc == 0);
  json report = load_json(dir.path / "simulate_report.json");
  CHECK(report["command"] == "simulate");
  CHECK(report["replicates"].size() == 3);
  CHECK(report["summary"]["ase"].contains("mean_ari"));
  CHECK(report["summary"]["louvain"].contains("k_hat_histogram"));
  CHECK(report["summary"]["ase"]["mean_ari"].get<double>() > 0.9);
}

TEST_CASE("simulate: shipped scenario file is accepted") {
  TempDir dir("scenario");
  int rc = run(std::string("simulate --params ") + SBMKIT_DATA_DIR +
               "/default_scenario.json --replicates 2 --algo louvain --seed 2 --out-dir " +
               dir.path.string());
  REQUIRE(rc == 0);
  json report = load_json(dir.path / "simulate_report.json");
  CHECK(report["config"]["n"] == 600);
  CHECK(report["config"]["K"] == 3);
  CHECK(report["config"]["kmax"] == 5);
}

TEST_CASE("cluster: all algorithms emit partitions and a report") {
  TempDir dir("cluster");
  write_two_block_graph(dir / "g.edges", dir / "metrics.csv", 11);
  int rc = run("cluster --graph " + (dir / "g.edges") + " --algo all --dim 2 --kmax 4 "
               "--seed 3 --out-dir " + dir.path.string());
  REQUIRE(rc == 0);
  for (const char* name : {"ase", "lap", "icl", "louvain"})
    CHECK(fs::exists(dir.path / (std::string("partition_") + name + ".csv")));
  CHECK(fs::exists(dir.path / "model_ase.json"));
  CHECK(fs::exists(dir.path / "selection_lap.json"));
  CHECK(fs::exists(dir.path / "icl_report.json"));
  json report = load_json(dir.path / "cluster_report.json");
  CHECK(report["ase"]["k_hat"] == 2);
  CHECK(report["louvain"].contains("modularity"));
}

TEST_CASE("cluster: reruns with the same seed are byte-identical") {
  TempDir dir("determinism");
  write_two_block_graph(dir / "g.edges", dir / "metrics.csv", 21);
  for (const char* sub : {"a", "b"}) {
    int rc = run("cluster --graph " + (dir / "g.edges") +
                 " --algo ase,icl --dim 2 --kmax 4 --seed 9 --out-dir " + (dir / sub));
    REQUIRE(rc == 0);
  }
  CHECK(slurp(dir.path / "a" / "partition_ase.csv") ==
        slurp(dir.path / "b" / "partition_ase.csv"));
  CHECK(slurp(dir.path / "a" / "partition_icl.csv") ==
        slurp(dir.path / "b" / "partition_icl.csv"));
  CHECK(slurp(dir.path / "a" / "model_ase.json") == slurp(dir.path / "b" / "model_ase.json"));
  CHECK(stripped(dir.path / "a" / "cluster_report.json") ==
        stripped(dir.path / "b" / "cluster_report.json"));
}

TEST_CASE("input errors exit with code 2") {
  TempDir dir("errors");
  CHECK(run("cluster --out-dir " + dir.path.string()) == 2);  // no input at all
  CHECK(run("cluster --graph does_not_exist.edges --out-dir " + dir.path.string()) == 2);
  {
    std::ofstream bad(dir / "bad.edges");
    bad << "n=4\n0 zero\n";
  }
  CHECK(run("cluster --graph " + (dir / "bad.edges") + " --out-dir " + dir.path.string()) == 2);
  CHECK(run("compare " + (dir / "missing_a.csv") + " " + (dir / "missing_b.csv")) == 2);
}

TEST_CASE("validate rejects an unknown correction") {
  TempDir dir("valbad");
  write_two_block_graph(dir / "g.edges", dir / "metrics.csv", 31);
  int rc = run("cluster --graph " + (dir / "g.edges") + " --algo louvain --seed 4 --out-dir " +
               dir.path.string());
  REQUIRE(rc == 0);
  CHECK(run("validate --partition " + (dir / "partition_louvain.csv") + " --metrics " +
            (dir / "metrics.csv") + " --correction banana --out-dir " +
            dir.path.string()) == 2);
}

TEST_CASE("end to end: project, cluster, compare, validate") {
  TempDir dir("pipeline");

  // synthetic event log: two site communities bridged only via co-visits
  // inside each community; a per-site metric tracks the community
  RngStream rng(41);
  std::ofstream ev(dir / "events.csv");
  ev << "user_id,site_id\n";
  for (int u = 0; u < 120; ++u) {
    int group = u % 2;
    for (int visit = 0; visit < 3; ++visit)
      ev << "u" << u << ",site" << group << "_" << rng.uniform_int(8) << "\n";
  }
  ev.close();

  REQUIRE(run("project --events " + (dir / "events.csv") + " --out " + (dir / "sites")) == 0);
  REQUIRE(fs::exists(dir.path / "sites.edges"));
  json sidecar = load_json(dir.path / "sites.json");
  REQUIRE(sidecar["vertex_names"].size() == 16);

  REQUIRE(run("cluster --events " + (dir / "events.csv") +
              " --algo ase,louvain --dim 2 --kmax 4 --seed 6 --out-dir " +
              dir.path.string()) == 0);
  json report = load_json(dir.path / "cluster_report.json");
  CHECK(report["ase"]["k_hat"] == 2);
  CHECK(report["louvain"]["k_hat"] == 2);

  REQUIRE(run("compare " + (dir / "partition_ase.csv") + " " +
              (dir / "partition_louvain.csv") + " --out-dir " + dir.path.string()) == 0);
  json cmp = load_json(dir.path / "compare_report.json");
  CHECK(cmp["ari_matrix"][0][1].get<double>() == doctest::Approx(1.0));

  // metric rows follow the projection's vertex order recorded in the sidecar
  std::ofstream met(dir / "metrics.csv");
  met << "vertex,traffic\n";
  for (int v = 0; v < 16; ++v) {
    std::string name = sidecar["vertex_names"][v].get<std::string>();
    int group = name[4] - '0';  // "site<g>_<i>"
    met << v << "," << 100.0 * group + rng.uniform() << "\n";
  }
  met.close();
  REQUIRE(run("validate --partition " + (dir / "partition_ase.csv") + " --metrics " +
              (dir / "metrics.csv") + " --alpha 0.05 --out-dir " + dir.path.string()) == 0);
  json val = load_json(dir.path / "validate_report.json");
  CHECK(val["metrics"]["traffic"]["testable_pairs"] == 1);
  CHECK(val["metrics"]["traffic"]["significant_pairs"] == 1);
}
