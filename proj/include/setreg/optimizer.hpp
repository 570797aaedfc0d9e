#pragma once

#include <functional>
#include <optional>
#include <span>
#include <map>
#include <vector>

#include <nlohmann/json.hpp>

#include "setreg/correlation.hpp"
#include "setreg/graph.hpp"
#include "setreg/image.hpp"
#include "setreg/representation.hpp"

namespace setreg {

/// Unit moves in the fixed tie-break order N, NE, E, SE, S, SW, W, NW (y grows downwards).
std::vector<Shift> king_moves();

struct OptimizerConfig {
  PyramidSchedule schedule;
  int max_iterations_per_level = 10000;
  std::vector<Shift> neighborhood = king_moves();
  bool group_moves = true;
  // Moves may jump anywhere within a Chebyshev radius of floor(reach_scale * sigma) pixels
  // (at least 1). 0 keeps unit moves only.
  double reach_scale = 1.5;

  void validate() const;
};

struct LevelTrace {
  double sigma = 0.0;
  int iterations = 0;  // accepted moves
  double fitness = 0.0;  // J at convergence
  bool converged = false;  // false if the iteration cap stopped the level
  std::vector<double> history;  // J before the first move, then after every accepted move
};

struct StageTimings {
  double representation_ms = 0.0;
  double tables_ms = 0.0;
  double ascent_ms = 0.0;
};

/// Offsets Δr_k map pixel r of image k to pixel r + Δr_k of the reference image 0.
struct RegistrationSolution {
  std::vector<Shift> offsets;  // offsets[0] == (0, 0)
  double fitness = 0.0;
  std::vector<LevelTrace> trace;
  StageTimings timings;
  std::vector<std::string> warnings;
};

/// Correlation tables keyed by ordered edge.
using EdgeTables = std::map<Edge, CorrelationTable>;

/// J = sum over active edges (i, j) of lookup(table(i, j), Δr_i - Δr_j).
/// Throws std::logic_error if an active edge has no table.
double fitness(std::span<const Shift> offsets, const ConstraintsGraph& graph,
               const EdgeTables& tables);

struct AscentResult {
  std::vector<Shift> offsets;
  int iterations = 0;
  bool converged = true;
  std::vector<double> history;
};

/// Discrete steepest ascent. Each iteration scores every move within Chebyshev distance
/// `reach` of every non-reference offset (and, with cfg.group_moves, of every group of images
/// bound together by edges sitting on a table peak) and applies the best one if it improves J
/// by more than kMinImprovement. Moves that would push an offset component beyond `max_offset`
/// are skipped. Ties go to single images before groups, then to the lowest image index, then to
/// the earliest move (cfg.neighborhood first, then the window in raster order). With group moves
/// on, a state where none of these improve J also tries moving all non-reference images together.
AscentResult ascend_level(std::vector<Shift> offsets, const ConstraintsGraph& graph,
                          const EdgeTables& tables, const OptimizerConfig& cfg, int max_offset,
                          int reach = 1);

/// Chebyshev reach of the moves at one sigma level.
int level_reach(const OptimizerConfig& cfg, double sigma);

inline constexpr double kMinImprovement = 1e-12;

/// Per-level hooks for diagnostics.
struct RegistrationObserver {
  std::function<void(double sigma, const std::vector<Representation>&)> on_representations;
};

/// Graph effective for a set of n images: k_near and k_far are clamped to n - 1.
GraphConfig effective_graph_config(GraphConfig cfg, std::size_t n);

/// Coarse-to-fine registration: for each sigma rebuild representations and edge tables, then
/// ascend from the previous level's offsets (zeros at the first level).
RegistrationSolution register_set(const ImageSet& set, const GraphConfig& gcfg,
                                  const OptimizerConfig& ocfg, const CorrelationParams& ccfg,
                                  const RegistrationObserver& observer = {});

/// Builds the active-edge tables for one sigma level (parallel across edges).
EdgeTables build_edge_tables(const std::vector<PreparedRepresentation>& reps,
                             const ConstraintsGraph& graph, const CorrelationParams& ccfg);

/// {"offsets": {id: [dx, dy]}, "fitness": J, "trace": [...]}
nlohmann::ordered_json solution_to_json(const RegistrationSolution& sol,
                                        const std::vector<std::string>& ids);

}  // namespace setreg
