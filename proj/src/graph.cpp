#include "setreg/graph.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace setreg {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::knn: return "knn";
    case Scheme::threshold_near: return "threshold_near";
    case Scheme::kfurthest: return "kfurthest";
    case Scheme::threshold_far: return "threshold_far";
  }
  return "?";
}

Scheme parse_scheme(const std::string& name) {
  for (Scheme s : {Scheme::knn, Scheme::threshold_near, Scheme::kfurthest, Scheme::threshold_far}) {
    if (name == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown graph scheme '" + name + "'");
}

void GraphConfig::validate(std::size_t n) const {
  const auto check_k = [n](int k, const char* what) {
    if (k < 1 || static_cast<std::size_t>(k) > n - 1) {
      throw std::invalid_argument(std::string("GraphConfig: ") + what + " = " +
                                  std::to_string(k) + " outside [1, " + std::to_string(n - 1) +
                                  "]");
    }
  };
  if (n < 2) throw std::invalid_argument("GraphConfig: at least two nodes required");
  if (schemes.empty()) throw std::invalid_argument("GraphConfig: no scheme selected");
  if (schemes.contains(Scheme::knn)) check_k(k_near, "k_near");
  if (schemes.contains(Scheme::kfurthest)) check_k(k_far, "k_far");
  if (schemes.contains(Scheme::threshold_near) && !(d_thres1 > 0.0)) {
    throw std::invalid_argument("GraphConfig: d_thres1 must be positive");
  }
  if (schemes.contains(Scheme::threshold_far) && !(d_thres2 > 0.0)) {
    throw std::invalid_argument("GraphConfig: d_thres2 must be positive");
  }
}

std::vector<std::pair<int, int>> ConstraintsGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (weights[i][j]) out.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  }
  return out;
}

std::size_t ConstraintsGraph::component_count() const {
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto [i, j] : edges()) parent[find(i)] = find(j);
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += find(i) == i;
  return count;
}

SquareMatrix distance_matrix(const ImageSet& set) {
  const std::size_t n = set.size();
  SquareMatrix d(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = euclidean_distance(set.image(i), set.image(j));
    }
  }
  return d;
}

ConstraintsGraph build_graph(const SquareMatrix& dist, const GraphConfig& cfg) {
  const std::size_t n = dist.size();
  cfg.validate(n);

  ConstraintsGraph g;
  g.n = n;
  g.weights.assign(n, std::vector<unsigned char>(n, 0));
  g.distances = dist;
  g.schemes = cfg.schemes;

  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < n; ++i) {
    others.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) others.push_back(j);
    }
    if (cfg.schemes.contains(Scheme::knn)) {
      std::stable_sort(others.begin(), others.end(),
                       [&](std::size_t a, std::size_t b) { return dist(i, a) < dist(i, b); });
      for (int k = 0; k < cfg.k_near; ++k) g.weights[i][others[k]] = 1;
    }
    if (cfg.schemes.contains(Scheme::kfurthest)) {
      std::sort(others.begin(), others.end());
      std::stable_sort(others.begin(), others.end(),
                       [&](std::size_t a, std::size_t b) { return dist(i, a) > dist(i, b); });
      for (int k = 0; k < cfg.k_far; ++k) g.weights[i][others[k]] = 1;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (cfg.schemes.contains(Scheme::threshold_near) && dist(i, j) <= cfg.d_thres1) {
        g.weights[i][j] = 1;
      }
      if (cfg.schemes.contains(Scheme::threshold_far) && dist(i, j) >= cfg.d_thres2) {
        g.weights[i][j] = 1;
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    bool incident = false;
    for (std::size_t j = 0; j < n && !incident; ++j) incident = g.weights[i][j] || g.weights[j][i];
    if (!incident) {
      g.warnings.push_back("node " + std::to_string(i) +
                           " has no incident edges; its offset stays at its initial value");
    }
  }
  if (const std::size_t c = g.component_count(); c > 1) {
    g.warnings.push_back("graph has " + std::to_string(c) +
                         " connected components; components not containing node 0 are "
                         "registered only relative to themselves");
  }
  return g;
}

nlohmann::ordered_json graph_to_json(const ConstraintsGraph& g, const std::vector<std::string>& ids) {
  nlohmann::ordered_json j;
  j["nodes"] = ids;
  nlohmann::ordered_json schemes = nlohmann::ordered_json::array();
  for (Scheme s : g.schemes) schemes.push_back(to_string(s));
  j["schemes"] = schemes;
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (auto [a, b] : g.edges()) edges.push_back({a, b});
  j["edges"] = edges;
  nlohmann::ordered_json dist = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < g.n; ++i) {
    std::vector<double> row(g.n);
    for (std::size_t k = 0; k < g.n; ++k) row[k] = g.distances(i, k);
    dist.push_back(row);
  }
  j["distances"] = dist;
  j["warnings"] = g.warnings;
  return j;
}

}  // namespace setreg
