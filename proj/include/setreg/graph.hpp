#pragma once

#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "setreg/image.hpp"

namespace setreg {

/// Dense n x n matrix of doubles.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), values_(n * n, fill) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * n_ + j]; }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

/// Edge-building rules. Proximal: knn, threshold_near. Distal: kfurthest, threshold_far.
enum class Scheme { knn, threshold_near, kfurthest, threshold_far };

std::string to_string(Scheme s);
/// Accepts the enumerator names. Throws std::invalid_argument otherwise.
Scheme parse_scheme(const std::string& name);

struct GraphConfig {
  std::set<Scheme> schemes{Scheme::knn, Scheme::kfurthest};
  int k_near = 3;
  int k_far = 3;
  double d_thres1 = 0.0;  // threshold_near: connect when d <= d_thres1
  double d_thres2 = 0.0;  // threshold_far: connect when d >= d_thres2

  /// Throws std::invalid_argument if an active scheme's parameter is out of range for n nodes.
  void validate(std::size_t n) const;
};

/// Directed binary constraints graph over an image set.
struct ConstraintsGraph {
  std::size_t n = 0;
  std::vector<std::vector<unsigned char>> weights;  // weights[i][j] = w_ij in {0, 1}
  SquareMatrix distances;
  std::set<Scheme> schemes;
  std::vector<std::string> warnings;

  bool has_edge(std::size_t i, std::size_t j) const { return weights[i][j] != 0; }
  /// Active (i, j) pairs in row-major order.
  std::vector<std::pair<int, int>> edges() const;
  /// Number of weakly connected components.
  std::size_t component_count() const;
};

/// Pairwise euclidean_distance over the set; exactly symmetric with a zero diagonal.
SquareMatrix distance_matrix(const ImageSet& set);

/// Union of the edges admitted by every active scheme, self-loops excluded. Ties in the
/// nearest/furthest ranking go to the lower index. Nodes left without any incident edge are
/// reported in `warnings`.
ConstraintsGraph build_graph(const SquareMatrix& dist, const GraphConfig& cfg);

/// Node ids, edge list, distance matrix, schemes and warnings.
nlohmann::ordered_json graph_to_json(const ConstraintsGraph& g, const std::vector<std::string>& ids);

}  // namespace setreg
