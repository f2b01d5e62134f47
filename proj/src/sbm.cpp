#include "sbmkit/sbm.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace sbmkit {

void SbmParams::validate() const {
  if (K < 1) throw std::invalid_argument("SbmParams: K must be >= 1");
  if (static_cast<int>(pi.size()) != K) throw std::invalid_argument("SbmParams: pi length != K");
  if (B.rows() != K || B.cols() != K) throw std::invalid_argument("SbmParams: B must be KxK");
  double sum = 0.0;
  for (double p : pi) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("SbmParams: pi entry outside [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("SbmParams: pi does not sum to 1");
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) {
      if (B(i, j) < 0.0 || B(i, j) > 1.0)
        throw std::invalid_argument("SbmParams: B entry outside [0,1]");
      if (B(i, j) != B(j, i)) throw std::invalid_argument("SbmParams: B not symmetric");
    }
}

SbmParams SbmParams::planted(int K, double p_in, double p_out) {
  SbmParams params;
  params.K = K;
  params.pi.assign(K, 1.0 / K);
  // uniform pi must pass the 1e-12 sum check even when 1/K is inexact
  double sum = 0.0;
  for (int k = 0; k + 1 < K; ++k) sum += params.pi[k];
  params.pi[K - 1] = 1.0 - sum;
  params.B = Eigen::MatrixXd::Constant(K, K, p_out);
  params.B.diagonal().setConstant(p_in);
  params.validate();
  return params;
}

SbmParams SbmParams::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open params: " + path);
  nlohmann::json j;
  in >> j;
  SbmParams params;
  params.K = j.at("K").get<int>();
  params.pi = j.at("pi").get<std::vector<double>>();
  auto rows = j.at("B").get<std::vector<std::vector<double>>>();
  params.B.resize(params.K, params.K);
  if (static_cast<int>(rows.size()) != params.K)
    throw std::runtime_error("params: B row count != K");
  for (int i = 0; i < params.K; ++i) {
    if (static_cast<int>(rows[i].size()) != params.K)
      throw std::runtime_error("params: B column count != K");
    for (int c = 0; c < params.K; ++c) params.B(i, c) = rows[i][c];
  }
  params.validate();
  return params;
}

std::string SbmParams::to_json() const {
  nlohmann::json j;
  j["K"] = K;
  j["pi"] = pi;
  std::vector<std::vector<double>> rows(K, std::vector<double>(K));
  for (int i = 0; i < K; ++i)
    for (int c = 0; c < K; ++c) rows[i][c] = B(i, c);
  j["B"] = rows;
  return j.dump();
}

SbmSample sample_sbm(int n, const SbmParams& params, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_sbm: n must be >= 1");
  params.validate();
  RngStream rng(seed);
  BlockLabels labels(n);
  for (int i = 0; i < n; ++i) labels[i] = rng.categorical(params.pi);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < params.B(labels[i], labels[j])) edges.emplace_back(i, j);
  return {Graph::from_edges(n, std::move(edges)), std::move(labels)};
}

LatentPositionSample sample_latent_position_graph(int n, const LatentPositionModel& model,
                                                  std::uint64_t seed, bool keep_positions) {
  if (n < 1) throw std::invalid_argument("sample_latent_position_graph: n must be >= 1");
  RngStream rng(seed);
  std::vector<Eigen::VectorXd> positions(n);
  for (int i = 0; i < n; ++i) positions[i] = model.position_sampler(rng);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double p = model.link(positions[i], positions[j]);
      if (p < 0.0 || p > 1.0) {
        std::ostringstream msg;
        msg << "latent position model: link(" << i << "," << j << ") = " << p
            << " outside [0,1]";
        throw std::runtime_error(msg.str());
      }
      if (rng.uniform() < p) edges.emplace_back(i, j);
    }
  LatentPositionSample out;
  out.graph = Graph::from_edges(n, std::move(edges));
  if (keep_positions) {
    out.positions.resize(n, model.dimension);
    for (int i = 0; i < n; ++i) out.positions.row(i) = positions[i].transpose();
  }
  return out;
}

SbmParams estimate_block_matrix(const Graph& g, const BlockLabels& labels) {
  int n = g.num_vertices();
  if (static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("estimate_block_matrix: label length mismatch");
  int K = 0;
  for (int l : labels) K = std::max(K, l + 1);
  std::vector<double> counts(K, 0.0);
  for (int l : labels) counts[l] += 1.0;

  Eigen::MatrixXd edge_count = Eigen::MatrixXd::Zero(K, K);
  for (auto [i, j] : g.edges()) {
    edge_count(labels[i], labels[j]) += 1.0;
    if (labels[i] != labels[j]) edge_count(labels[j], labels[i]) += 1.0;
  }
  SbmParams out;
  out.K = K;
  out.pi.resize(K);
  for (int k = 0; k < K; ++k) out.pi[k] = counts[k] / n;
  out.B = Eigen::MatrixXd::Zero(K, K);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l) {
      double pairs = (k == l) ? counts[k] * (counts[k] - 1.0) / 2.0 : counts[k] * counts[l];
      out.B(k, l) = pairs > 0.0 ? edge_count(k, l) / pairs : 0.0;
    }
  return out;
}

}  // namespace sbmkit
