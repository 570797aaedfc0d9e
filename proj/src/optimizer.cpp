#include "setreg/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "setreg/parallel.hpp"

namespace setreg {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

struct Incidence {
  const CorrelationTable* table;
  int other;
};

// Per node: tables of edges leaving it and entering it.
struct Adjacency {
  std::vector<std::vector<Incidence>> out;
  std::vector<std::vector<Incidence>> in;
};

Adjacency adjacency(const ConstraintsGraph& graph, const EdgeTables& tables) {
  Adjacency adj;
  adj.out.resize(graph.n);
  adj.in.resize(graph.n);
  for (auto [i, j] : graph.edges()) {
    const auto it = tables.find({i, j});
    if (it == tables.end()) {
      throw std::logic_error("no correlation table for active edge (" + std::to_string(i) + ", " +
                             std::to_string(j) + ")");
    }
    adj.out[i].push_back({&it->second, j});
    adj.in[j].push_back({&it->second, i});
  }
  return adj;
}

// Change in J when offsets[k] moves by m; only terms incident to k change.
double move_gain(const Adjacency& adj, std::span<const Shift> offsets, int k, Shift m) {
  const Shift cur = offsets[k];
  const Shift next = cur + m;
  double gain = 0.0;
  for (const auto& e : adj.out[k]) {
    const Shift other = offsets[e.other];
    gain += e.table->lookup(next - other) - e.table->lookup(cur - other);
  }
  for (const auto& e : adj.in[k]) {
    const Shift other = offsets[e.other];
    gain += e.table->lookup(other - next) - e.table->lookup(other - cur);
  }
  return gain;
}

// Edges sitting on a local maximum of their table bind their endpoints. Returns the movable
// side of every bound component with at least two members: the component itself, or everything
// outside it when it contains the reference image.
std::vector<std::vector<int>> locked_groups(const Adjacency& adj, std::span<const Shift> offsets,
                                            int n) {
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  const auto moves = king_moves();
  for (int i = 0; i < n; ++i) {
    for (const auto& e : adj.out[i]) {
      const Shift d = offsets[i] - offsets[e.other];
      const double here = e.table->lookup(d);
      if (here <= CorrelationTable::kRejected) continue;
      bool peak = true;
      for (Shift m : moves) {
        if (e.table->lookup(d + m) > here) {
          peak = false;
          break;
        }
      }
      if (peak) parent[find(i)] = find(e.other);
    }
  }
  std::vector<std::vector<int>> members(n);
  for (int i = 0; i < n; ++i) members[find(i)].push_back(i);
  std::vector<std::vector<int>> groups;
  for (int root = 0; root < n; ++root) {
    const auto& c = members[root];
    if (c.size() < 2) continue;
    if (c.front() != 0) {
      groups.push_back(c);
      continue;
    }
    std::vector<int> rest;
    for (int i = 1; i < n; ++i) {
      if (find(i) != root) rest.push_back(i);
    }
    if (!rest.empty()) groups.push_back(std::move(rest));
  }
  std::sort(groups.begin(), groups.end());
  return groups;
}

// Change in J when every member of `group` moves by m; only edges crossing the group boundary
// change.
double group_gain(const Adjacency& adj, std::span<const Shift> offsets, const std::vector<int>& group,
                  Shift m, int n) {
  std::vector<char> in_group(n, 0);
  for (int k : group) in_group[k] = 1;
  double gain = 0.0;
  for (int k : group) {
    const Shift cur = offsets[k];
    const Shift next = cur + m;
    for (const auto& e : adj.out[k]) {
      if (in_group[e.other]) continue;
      const Shift other = offsets[e.other];
      gain += e.table->lookup(next - other) - e.table->lookup(cur - other);
    }
    for (const auto& e : adj.in[k]) {
      if (in_group[e.other]) continue;
      const Shift other = offsets[e.other];
      gain += e.table->lookup(other - next) - e.table->lookup(other - cur);
    }
  }
  return gain;
}

}  // namespace

std::vector<Shift> king_moves() {
  return {{0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}};
}

void OptimizerConfig::validate() const {
  if (max_iterations_per_level < 1) {
    throw std::invalid_argument("OptimizerConfig: max_iterations_per_level must be >= 1");
  }
  if (neighborhood.empty()) throw std::invalid_argument("OptimizerConfig: empty neighborhood");
  if (!(reach_scale >= 0.0) || !std::isfinite(reach_scale)) {
    throw std::invalid_argument("OptimizerConfig: reach_scale must be finite and >= 0");
  }
}

double fitness(std::span<const Shift> offsets, const ConstraintsGraph& graph,
               const EdgeTables& tables) {
  if (offsets.size() != graph.n) throw std::invalid_argument("fitness: offset count mismatch");
  double j = 0.0;
  for (auto [a, b] : graph.edges()) {
    const auto it = tables.find({a, b});
    if (it == tables.end()) {
      throw std::logic_error("no correlation table for active edge (" + std::to_string(a) + ", " +
                             std::to_string(b) + ")");
    }
    j += it->second.lookup(offsets[a] - offsets[b]);
  }
  return j;
}

namespace {

// Unit moves first (tie-break order), then the rest of the Chebyshev window in raster order.
std::vector<Shift> candidate_moves(const std::vector<Shift>& neighborhood, int reach) {
  std::vector<Shift> moves = neighborhood;
  for (int dy = -reach; dy <= reach; ++dy) {
    for (int dx = -reach; dx <= reach; ++dx) {
      const Shift m{dx, dy};
      if (m == Shift{} || std::find(moves.begin(), moves.end(), m) != moves.end()) continue;
      moves.push_back(m);
    }
  }
  return moves;
}

bool within(Shift s, int bound) { return std::abs(s.dx) <= bound && std::abs(s.dy) <= bound; }

}  // namespace

AscentResult ascend_level(std::vector<Shift> offsets, const ConstraintsGraph& graph,
                          const EdgeTables& tables, const OptimizerConfig& cfg, int max_offset,
                          int reach) {
  cfg.validate();
  if (offsets.size() != graph.n) throw std::invalid_argument("ascend_level: offset count mismatch");
  if (reach < 1) throw std::invalid_argument("ascend_level: reach must be >= 1");
  const Adjacency adj = adjacency(graph, tables);
  const int n = static_cast<int>(graph.n);
  const std::vector<Shift> moves = candidate_moves(cfg.neighborhood, reach);

  AscentResult result;
  double current = fitness(offsets, graph, tables);
  result.history.push_back(current);
  result.converged = false;

  while (result.iterations < cfg.max_iterations_per_level) {
    double best_gain = kMinImprovement;
    int best_node = -1;
    Shift best_move;
    for (int k = 1; k < n; ++k) {
      for (Shift m : moves) {
        if (!within(offsets[k] + m, max_offset)) continue;
        const double gain = move_gain(adj, offsets, k, m);
        if (gain > best_gain) {
          best_gain = gain;
          best_node = k;
          best_move = m;
        }
      }
    }
    std::vector<int> best_group;
    if (cfg.group_moves) {
      for (const auto& group : locked_groups(adj, offsets, n)) {
        for (Shift m : moves) {
          const bool inside = std::all_of(group.begin(), group.end(),
                                          [&](int k) { return within(offsets[k] + m, max_offset); });
          if (!inside) continue;
          const double gain = group_gain(adj, offsets, group, m, n);
          if (gain > best_gain) {
            best_gain = gain;
            best_node = -1;
            best_group = group;
            best_move = m;
          }
        }
      }
    }
    if (cfg.group_moves && best_node < 0 && best_group.empty()) {
      // Escape from a local maximum: moving the reference by m is the gauge twin of moving every
      // other image by -m.
      std::vector<int> others(n - 1);
      std::iota(others.begin(), others.end(), 1);
      for (Shift m : moves) {
        const bool inside = std::all_of(others.begin(), others.end(),
                                        [&](int k) { return within(offsets[k] - m, max_offset); });
        if (!inside) continue;
        const double gain = move_gain(adj, offsets, 0, m);
        if (gain > best_gain) {
          best_gain = gain;
          best_node = -1;
          best_group = others;
          best_move = -m;
        }
      }
    }
    if (best_node < 0 && best_group.empty()) {
      result.converged = true;
      break;
    }
    if (best_node < 0) {
      for (int k : best_group) offsets[k] = offsets[k] + best_move;
    } else {
      offsets[best_node] = offsets[best_node] + best_move;
    }
    current += best_gain;
    result.history.push_back(current);
    ++result.iterations;
  }
  if (!result.converged) {
    // The cap may coincide with a local maximum; check once more.
    bool improvable = false;
    for (int k = 1; k < n && !improvable; ++k) {
      for (Shift m : moves) {
        if (!within(offsets[k] + m, max_offset)) continue;
        if (move_gain(adj, offsets, k, m) > kMinImprovement) {
          improvable = true;
          break;
        }
      }
    }
    result.converged = !improvable;
  }
  result.offsets = std::move(offsets);
  return result;
}

int level_reach(const OptimizerConfig& cfg, double sigma) {
  return std::max(1, static_cast<int>(std::floor(cfg.reach_scale * sigma)));
}

GraphConfig effective_graph_config(GraphConfig cfg, std::size_t n) {
  const int cap = static_cast<int>(n) - 1;
  cfg.k_near = std::min(cfg.k_near, cap);
  cfg.k_far = std::min(cfg.k_far, cap);
  return cfg;
}

EdgeTables build_edge_tables(const std::vector<PreparedRepresentation>& reps,
                             const ConstraintsGraph& graph, const CorrelationParams& ccfg) {
  const auto edges = graph.edges();
  std::vector<std::optional<CorrelationTable>> built(edges.size());
  parallel_for(edges.size(), [&](std::size_t e) {
    const auto [i, j] = edges[e];
    built[e] = build_table(reps[i], reps[j], ccfg, {i, j});
  });
  EdgeTables tables;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    tables.emplace(Edge{edges[e].first, edges[e].second}, std::move(*built[e]));
  }
  return tables;
}

RegistrationSolution register_set(const ImageSet& set, const GraphConfig& gcfg,
                                  const OptimizerConfig& ocfg, const CorrelationParams& ccfg,
                                  const RegistrationObserver& observer) {
  ocfg.validate();
  if (ccfg.max_shift < 0 || ccfg.max_shift >= std::min(set.width(), set.height())) {
    throw std::invalid_argument("max_shift " + std::to_string(ccfg.max_shift) +
                                " must lie in [0, " +
                                std::to_string(std::min(set.width(), set.height())) + ")");
  }
  if (!(ccfg.min_overlap_frac > 0.0 && ccfg.min_overlap_frac <= 1.0)) {
    throw std::invalid_argument("min_overlap_frac must lie in (0, 1]");
  }

  const std::size_t n = set.size();
  const ConstraintsGraph graph = build_graph(distance_matrix(set), effective_graph_config(gcfg, n));

  RegistrationSolution sol;
  sol.offsets.assign(n, Shift{});
  sol.warnings = graph.warnings;

  EdgeTables tables;
  for (double sigma : ocfg.schedule.sigmas()) {
    auto t0 = Clock::now();
    std::vector<PreparedRepresentation> reps(n);
    parallel_for(n, [&](std::size_t i) {
      reps[i] = prepare(abs_highpass(set.image(i), sigma, set.id(i)));
    });
    sol.timings.representation_ms += elapsed_ms(t0);
    if (observer.on_representations) {
      std::vector<Representation> plain;
      plain.reserve(n);
      for (const auto& r : reps) plain.push_back(r.rep);
      observer.on_representations(sigma, plain);
    }

    t0 = Clock::now();
    tables = build_edge_tables(reps, graph, ccfg);
    sol.timings.tables_ms += elapsed_ms(t0);

    t0 = Clock::now();
    AscentResult level =
        ascend_level(sol.offsets, graph, tables, ocfg, ccfg.max_shift, level_reach(ocfg, sigma));
    sol.timings.ascent_ms += elapsed_ms(t0);

    sol.offsets = std::move(level.offsets);
    LevelTrace trace;
    trace.sigma = sigma;
    trace.iterations = level.iterations;
    trace.fitness = level.history.back();
    trace.converged = level.converged;
    trace.history = std::move(level.history);
    if (!trace.converged) {
      sol.warnings.push_back("sigma " + std::to_string(sigma) + ": iteration cap reached");
    }
    sol.trace.push_back(std::move(trace));
  }
  sol.fitness = fitness(sol.offsets, graph, tables);
  return sol;
}

nlohmann::ordered_json solution_to_json(const RegistrationSolution& sol,
                                        const std::vector<std::string>& ids) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json offsets = nlohmann::ordered_json::object();
  for (std::size_t k = 0; k < sol.offsets.size(); ++k) {
    offsets[ids.at(k)] = {sol.offsets[k].dx, sol.offsets[k].dy};
  }
  j["offsets"] = offsets;
  j["fitness"] = sol.fitness;
  nlohmann::ordered_json trace = nlohmann::ordered_json::array();
  for (const auto& level : sol.trace) {
    trace.push_back({{"sigma", level.sigma},
                     {"iterations", level.iterations},
                     {"fitness", level.fitness},
                     {"converged", level.converged},
                     {"fitness_history", level.history}});
  }
  j["trace"] = trace;
  j["warnings"] = sol.warnings;
  return j;
}

}  // namespace setreg
