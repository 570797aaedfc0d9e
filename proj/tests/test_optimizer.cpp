#include <doctest.h>

#include "oracles.hpp"
#include "setreg/dataset.hpp"
#include "setreg/optimizer.hpp"

using namespace setreg;

namespace {

struct Level {
  std::vector<Representation> reps;
  ConstraintsGraph graph;
  EdgeTables tables;
};

Level level_for(const ImageSet& set, double sigma, CorrelationParams params,
                GraphConfig gcfg = GraphConfig{}) {
  Level l;
  std::vector<PreparedRepresentation> prepared;
  for (std::size_t i = 0; i < set.size(); ++i) {
    l.reps.push_back(abs_highpass(set.image(i), sigma));
    prepared.push_back(prepare(l.reps.back()));
  }
  l.graph = build_graph(distance_matrix(set), effective_graph_config(gcfg, set.size()));
  l.tables = build_edge_tables(prepared, l.graph, params);
  return l;
}

std::vector<ImageGrid> grids(const Level& l) {
  std::vector<ImageGrid> g;
  for (const auto& r : l.reps) g.push_back(r.grid);
  return g;
}

ImageSet tiny_set(std::uint64_t seed, int n, int bound, int size = 16) {
  const ImageGrid base = procedural_texture(size + 2 * bound, size + 2 * bound, seed);
  return generate_set(base, n, bound, PerturbationSpec::none(seed)).images;
}

void check_monotone(const std::vector<double>& history) {
  for (std::size_t i = 1; i < history.size(); ++i) CHECK(history[i] > history[i - 1]);
}

}  // namespace

TEST_CASE("king moves order") {
  const std::vector<Shift> want{{0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}};
  CHECK(king_moves() == want);
}

TEST_CASE("fitness") {
  std::mt19937_64 rng(41);
  SUBCASE("identical images score one per edge") {
    const ImageGrid g = procedural_texture(24, 24, 3);
    const ImageSet set({g, g, g, g}, {"a", "b", "c", "d"});
    const Level l = level_for(set, 2.0, {6, 0.25});
    const std::vector<Shift> zero(4);
    CHECK(fitness(zero, l.graph, l.tables) == doctest::Approx(l.graph.edges().size()));
  }
  SUBCASE("two shifted copies peak at the compensating offset") {
    const ImageGrid base = oracle::random_grid(rng, 40, 40);
    const Shift t{3, -2};
    // zeta_2(r) = zeta_1(r - t), built directly at the representation level
    std::vector<PreparedRepresentation> reps{
        prepare({oracle::crop(base, 8, 8, 24, 24), 1.0, "a"}),
        prepare({oracle::crop(base, 8 - t.dx, 8 - t.dy, 24, 24), 1.0, "b"})};
    SquareMatrix d(2);
    d(0, 1) = d(1, 0) = 1.0;
    GraphConfig g;
    g.k_near = g.k_far = 1;
    const ConstraintsGraph graph = build_graph(d, g);
    const EdgeTables tables = build_edge_tables(reps, graph, {6, 0.25});
    CHECK(graph.edges().size() == 2);
    double best = -1e9;
    Shift arg;
    for (int dy = -6; dy <= 6; ++dy) {
      for (int dx = -6; dx <= 6; ++dx) {
        const std::vector<Shift> off{{0, 0}, {dx, dy}};
        const double j = fitness(off, graph, tables);
        if (j > best) {
          best = j;
          arg = {dx, dy};
        }
      }
    }
    CHECK(arg == -t);
    CHECK(best == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("exhaustive enumeration against spatial coefficients") {
    const ImageSet set = tiny_set(7, 3, 2);
    const CorrelationParams params{6, 0.25};
    const Level l = level_for(set, 2.0, params);
    const auto z = grids(l);
    const auto edges = oracle::edges_of(l.graph);
    for (int a = 0; a < 25; ++a) {
      for (int b = 0; b < 25; ++b) {
        const std::vector<Shift> off{{0, 0}, {a % 5 - 2, a / 5 - 2}, {b % 5 - 2, b / 5 - 2}};
        CHECK(std::abs(fitness(off, l.graph, l.tables) -
                       oracle::fitness(z, edges, off, params.max_shift, params.min_overlap_frac)) <=
              1e-9);
      }
    }
  }
  SUBCASE("gauge invariance") {
    const ImageSet set = tiny_set(8, 4, 3, 24);
    const Level l = level_for(set, 2.0, {12, 0.25});
    std::uniform_int_distribution<int> s(-3, 3);
    for (int t = 0; t < 50; ++t) {
      std::vector<Shift> off(4), moved(4);
      const Shift c{s(rng), s(rng)};
      for (int k = 0; k < 4; ++k) {
        off[k] = {s(rng), s(rng)};
        moved[k] = off[k] + c;
      }
      CHECK(fitness(off, l.graph, l.tables) == fitness(moved, l.graph, l.tables));
    }
  }
  SUBCASE("missing table is a construction bug") {
    const ImageSet set = tiny_set(9, 3, 2);
    Level l = level_for(set, 2.0, {6, 0.25});
    l.tables.erase(l.tables.begin());
    CHECK_THROWS_AS(fitness(std::vector<Shift>(3), l.graph, l.tables), std::logic_error);
  }
}

TEST_CASE("ascend_level") {
  std::mt19937_64 rng(42);
  OptimizerConfig cfg;
  SUBCASE("already optimal") {
    const ImageGrid g = procedural_texture(24, 24, 5);
    const ImageSet set({g, g, g}, {"a", "b", "c"});
    const Level l = level_for(set, 2.0, {6, 0.25});
    const AscentResult r = ascend_level(std::vector<Shift>(3), l.graph, l.tables, cfg, 6);
    CHECK(r.iterations == 0);
    CHECK(r.converged);
    CHECK(r.offsets == std::vector<Shift>(3));
    CHECK(r.history.size() == 1);
  }
  SUBCASE("two images reach the table argmax") {
    const ImageGrid base = oracle::random_grid(rng, 40, 40);
    const ImageGrid first = oracle::crop(base, 8, 8, 24, 24);
    const ImageGrid second = oracle::crop(base, 7, 7, 24, 24);  // second(r) = first(r - (1, 1))
    const ImageSet set({first, second}, {"a", "b"});
    const Level l = level_for(set, 2.0, {6, 0.25});
    const CorrelationTable& t01 = l.tables.at({0, 1});
    Shift arg;
    for (int dy = -6; dy <= 6; ++dy)
      for (int dx = -6; dx <= 6; ++dx)
        if (t01.lookup({dx, dy}) > t01.lookup(arg)) arg = {dx, dy};
    const AscentResult r = ascend_level(std::vector<Shift>(2), l.graph, l.tables, cfg, 6);
    CHECK(r.offsets[1] == -arg);
    CHECK(r.offsets[1] == Shift{-1, -1});
    CHECK(r.converged);
  }
  SUBCASE("monotone, gauge fixed, bounded, deterministic") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const ImageSet set = tiny_set(seed, 5, 4, 24);
      const Level l = level_for(set, 2.0, {5, 0.25});
      for (int reach : {1, 3}) {
        const AscentResult r = ascend_level(std::vector<Shift>(5), l.graph, l.tables, cfg, 5, reach);
        check_monotone(r.history);
        CHECK(r.history.size() == static_cast<std::size_t>(r.iterations) + 1);
        CHECK(r.offsets[0] == Shift{});
        for (Shift s : r.offsets) CHECK((std::abs(s.dx) <= 5 && std::abs(s.dy) <= 5));
        CHECK(r.history.back() == doctest::Approx(fitness(r.offsets, l.graph, l.tables)));
        const AscentResult again = ascend_level(std::vector<Shift>(5), l.graph, l.tables, cfg, 5, reach);
        CHECK(again.offsets == r.offsets);
        CHECK(again.history == r.history);
      }
    }
  }
  SUBCASE("iteration cap") {
    const ImageSet set = tiny_set(3, 4, 4, 24);
    const Level l = level_for(set, 2.0, {8, 0.25});
    OptimizerConfig capped;
    capped.max_iterations_per_level = 1;
    const AscentResult r = ascend_level(std::vector<Shift>(4), l.graph, l.tables, capped, 8);
    CHECK(r.iterations == 1);
    CHECK_FALSE(r.converged);
  }
  SUBCASE("argument checks") {
    const ImageSet set = tiny_set(3, 3, 2);
    const Level l = level_for(set, 2.0, {6, 0.25});
    CHECK_THROWS_AS(ascend_level(std::vector<Shift>(2), l.graph, l.tables, cfg, 6), std::invalid_argument);
    CHECK_THROWS_AS(ascend_level(std::vector<Shift>(3), l.graph, l.tables, cfg, 6, 0), std::invalid_argument);
    OptimizerConfig bad;
    bad.max_iterations_per_level = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = OptimizerConfig{};
    bad.reach_scale = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }
}

TEST_CASE("level reach") {
  OptimizerConfig cfg;
  cfg.reach_scale = 1.5;
  CHECK(level_reach(cfg, 40.0) == 60);
  CHECK(level_reach(cfg, 3.0) == 4);
  cfg.reach_scale = 0.0;
  CHECK(level_reach(cfg, 40.0) == 1);
}

TEST_CASE("small instances reach the exhaustive optimum") {
  int exact = 0;
  const CorrelationParams params{6, 0.25};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ImageSet set = tiny_set(seed + 100, 3, 3);
    const Level l = level_for(set, 2.0, params);
    const OptimizerConfig cfg;
    const AscentResult r =
        ascend_level(std::vector<Shift>(3), l.graph, l.tables, cfg, params.max_shift, level_reach(cfg, 2.0));
    double best = -1e9;
    for (int a = 0; a < 49; ++a) {
      for (int b = 0; b < 49; ++b) {
        const std::vector<Shift> off{{0, 0}, {a % 7 - 3, a / 7 - 3}, {b % 7 - 3, b / 7 - 3}};
        best = std::max(best, fitness(off, l.graph, l.tables));
      }
    }
    CHECK(r.history.back() >= 0.999 * best);
    exact += r.history.back() >= best - 1e-12;
  }
  CHECK(exact >= 9);
}

TEST_CASE("register_set") {
  SUBCASE("identical images") {
    const ImageGrid g = procedural_texture(48, 48, 4);
    const ImageSet set({g, g}, {"a", "b"});
    OptimizerConfig cfg;
    cfg.schedule = PyramidSchedule({8.0, 3.0, 1.0});
    const RegistrationSolution sol = register_set(set, GraphConfig{}, cfg, {16, 0.25});
    CHECK(sol.offsets == std::vector<Shift>(2));
    REQUIRE(sol.trace.size() == 3);
    for (const auto& lvl : sol.trace) {
      CHECK(lvl.iterations == 0);
      CHECK(lvl.converged);
    }
    CHECK(sol.fitness == doctest::Approx(2.0));
  }
  SUBCASE("perturbed ten-image set") {
    const ImageGrid base = procedural_texture(336, 336, 17);
    PerturbationSpec p;
    p.seed = 17;
    const GeneratedSet gs = generate_set(base, 10, 40, p);
    const RegistrationSolution sol = register_set(gs.images, GraphConfig{}, OptimizerConfig{}, {});
    CHECK(registration_error(sol, gs.truth).mean <= 2.0);
    CHECK(sol.offsets[0] == Shift{});
    for (const auto& lvl : sol.trace) check_monotone(lvl.history);
    CHECK(sol.trace.size() == 4);
  }
  SUBCASE("coarse-to-fine dominates a single fine level on a large misalignment") {
    const ImageGrid base = procedural_texture(256 + 120, 256 + 120, 23);
    const ImageGrid a = oracle::crop(base, 60, 60, 256, 256);
    const ImageGrid b = oracle::crop(base, 0, 60, 256, 256);
    const ImageSet set({a, b}, {"a", "b"});
    OptimizerConfig fine;
    fine.schedule = PyramidSchedule({3.0});
    const RegistrationSolution full = register_set(set, GraphConfig{}, OptimizerConfig{}, {});
    const RegistrationSolution single = register_set(set, GraphConfig{}, fine, {});
    CHECK(full.fitness >= single.fitness);
    CHECK(full.offsets[1] == Shift{-60, 0});
  }
  SUBCASE("argument checks") {
    const ImageSet set = tiny_set(1, 3, 2);
    CHECK_THROWS_AS(register_set(set, GraphConfig{}, OptimizerConfig{}, {16, 0.25}), std::invalid_argument);
    CHECK_THROWS_AS(register_set(set, GraphConfig{}, OptimizerConfig{}, {4, 0.0}), std::invalid_argument);
  }
  SUBCASE("iteration cap is reported") {
    const ImageSet set = tiny_set(2, 4, 4, 32);
    OptimizerConfig cfg;
    cfg.schedule = PyramidSchedule({2.0});
    cfg.max_iterations_per_level = 1;
    const RegistrationSolution sol = register_set(set, GraphConfig{}, cfg, {8, 0.25});
    CHECK_FALSE(sol.trace[0].converged);
    CHECK_FALSE(sol.warnings.empty());
  }
}

TEST_CASE("solution JSON") {
  RegistrationSolution sol;
  sol.offsets = {{0, 0}, {3, -2}};
  sol.fitness = 1.5;
  sol.trace.push_back({8.0, 2, 1.5, true, {1.0, 1.25, 1.5}});
  const auto j = solution_to_json(sol, {"a.png", "b.png"});
  CHECK(j["offsets"]["b.png"] == nlohmann::json({3, -2}));
  CHECK(j["fitness"] == 1.5);
  CHECK(j["trace"][0]["iterations"] == 2);
  CHECK(j["trace"][0]["fitness_history"].size() == 3);
}
