#include "setreg/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "setreg/errors.hpp"
#include "setreg/optimizer.hpp"
#include "setreg/raster_io.hpp"

namespace setreg::cli {
namespace fs = std::filesystem;

namespace {

constexpr int kProceduralSize = 256;

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string sigma_label(double sigma) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sigma_%g", sigma);
  return buf;
}

}  // namespace

GeneratedSet run_generate(const GenerateOptions& o) {
  if (o.n < 2) throw std::invalid_argument("generate: n must be >= 2");
  if (o.shift_bound < 0) throw std::invalid_argument("generate: shift bound must be >= 0");

  ImageGrid base;
  int w = o.width, h = o.height;
  if (o.base) {
    base = load_grayscale(*o.base);
  } else {
    if (w <= 0) w = kProceduralSize;
    if (h <= 0) h = kProceduralSize;
    base = procedural_texture(w + 2 * o.shift_bound, h + 2 * o.shift_bound,
                              o.texture_seed.value_or(o.seed));
  }
  PerturbationSpec p = o.clean ? PerturbationSpec::none() : o.perturbation;
  p.seed = o.seed;
  GeneratedSet set = generate_set(base, o.n, o.shift_bound, p, w, h);
  save_set(o.out, set.images, set.truth);
  return set;
}

nlohmann::ordered_json register_options_to_json(const RegisterOptions& o) {
  nlohmann::ordered_json schemes = nlohmann::ordered_json::array();
  for (Scheme s : o.graph.schemes) schemes.push_back(to_string(s));
  nlohmann::ordered_json j;
  j["set_dir"] = o.set_dir.string();
  j["subset"] = o.subset;
  j["sigmas"] = o.sigmas;
  j["graph"] = {{"schemes", schemes},
                {"k_near", o.graph.k_near},
                {"k_far", o.graph.k_far},
                {"d_thres1", o.graph.d_thres1},
                {"d_thres2", o.graph.d_thres2}};
  j["correlation"] = {{"max_shift", o.correlation.max_shift},
                      {"min_overlap", o.correlation.min_overlap_frac}};
  j["optimizer"] = {{"max_iterations_per_level", o.max_iterations},
                    {"neighborhood", "king8"},
                    {"reach_scale", o.reach_scale},
                    {"group_moves", o.group_moves}};
  return j;
}

RegisterOptions register_options_from_json(const nlohmann::json& c) {
  RegisterOptions o;
  try {
    o.set_dir = c.value("set_dir", std::string{});
    o.subset = c.value("subset", 0);
    if (c.contains("sigmas")) o.sigmas = c.at("sigmas").get<std::vector<double>>();
    if (c.contains("graph")) {
      const auto& g = c.at("graph");
      if (g.contains("schemes")) {
        o.graph.schemes.clear();
        for (const auto& s : g.at("schemes")) o.graph.schemes.insert(parse_scheme(s.get<std::string>()));
      }
      o.graph.k_near = g.value("k_near", o.graph.k_near);
      o.graph.k_far = g.value("k_far", o.graph.k_far);
      o.graph.d_thres1 = g.value("d_thres1", o.graph.d_thres1);
      o.graph.d_thres2 = g.value("d_thres2", o.graph.d_thres2);
    }
    if (c.contains("correlation")) {
      const auto& k = c.at("correlation");
      o.correlation.max_shift = k.value("max_shift", o.correlation.max_shift);
      o.correlation.min_overlap_frac = k.value("min_overlap", o.correlation.min_overlap_frac);
    }
    if (c.contains("optimizer")) {
      const auto& opt = c.at("optimizer");
      o.max_iterations = opt.value("max_iterations_per_level", o.max_iterations);
      o.reach_scale = opt.value("reach_scale", o.reach_scale);
      o.group_moves = opt.value("group_moves", o.group_moves);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed run config: ") + e.what());
  }
  return o;
}

nlohmann::ordered_json register_loaded(const LoadedSet& loaded, const std::string& set_id,
                                       const RegisterOptions& o) {
  const ImageSet set = o.subset > 0 ? loaded.images.prefix(static_cast<std::size_t>(o.subset))
                                    : loaded.images;
  std::optional<GroundTruth> truth = loaded.truth;
  if (truth) truth->offsets.resize(set.size());

  OptimizerConfig ocfg;
  ocfg.schedule = PyramidSchedule(o.sigmas);
  ocfg.max_iterations_per_level = o.max_iterations;
  ocfg.reach_scale = o.reach_scale;
  ocfg.group_moves = o.group_moves;

  RegistrationObserver observer;
  if (o.dump_representations) {
    const fs::path root = *o.dump_representations;
    observer.on_representations = [root](double sigma, const std::vector<Representation>& reps) {
      const fs::path dir = root / sigma_label(sigma);
      fs::create_directories(dir);
      for (const auto& r : reps) {
        write_pgm_normalized(dir / (fs::path(r.source_id).stem().string() + ".pgm"), r.grid);
      }
    };
  }

  const RegistrationSolution sol = register_set(set, o.graph, ocfg, o.correlation, observer);

  if (o.dump_graph) {
    const ConstraintsGraph graph =
        build_graph(distance_matrix(set), effective_graph_config(o.graph, set.size()));
    std::ofstream out(*o.dump_graph);
    out << graph_to_json(graph, set.ids()).dump(2) << '\n';
    if (!out) throw FormatError("cannot write '" + o.dump_graph->string() + "'");
  }

  nlohmann::ordered_json report;
  report["set_id"] = set_id;
  report["n"] = set.size();
  report["config"] = register_options_to_json(o);
  const auto sol_json = solution_to_json(sol, set.ids());
  for (const auto& [key, value] : sol_json.items()) report[key] = value;
  if (truth) {
    const RegistrationError err = registration_error(sol, *truth);
    nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
    for (const auto& p : err.pairs) pairs.push_back({p.i, p.j, p.error});
    report["errors"] = {{"mean", err.mean}, {"pairs", pairs}};
  } else {
    report["errors"] = nullptr;
  }
  report["timings_ms"] = {{"representation", sol.timings.representation_ms},
                          {"tables", sol.timings.tables_ms},
                          {"ascent", sol.timings.ascent_ms}};
  return report;
}

nlohmann::ordered_json run_register(const RegisterOptions& o) {
  const LoadedSet loaded = load_set(o.set_dir);
  std::string id = o.set_dir.filename().string();
  if (id.empty()) id = o.set_dir.parent_path().filename().string();
  return register_loaded(loaded, id, o);
}

const std::vector<std::string>& eval_columns() {
  static const std::vector<std::string> columns{
      "set_id",          "n",         "fitness",   "mean_error", "baseline_error",
      "error_reduction_pct", "representation_ms", "tables_ms", "ascent_ms", "status",
      "message"};
  return columns;
}

EvalResult run_eval(const EvalOptions& options) {
  if (!fs::is_directory(options.sets_dir)) {
    throw FormatError("'" + options.sets_dir.string() + "' is not a directory");
  }
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(options.sets_dir)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());

  EvalResult result;
  std::string csv = csv_join(eval_columns()) + "\n";

  struct Sum {
    double total = 0.0;
    int count = 0;
    void add(double v) { total += v; ++count; }
    std::string mean() const { return count ? number(total / count) : ""; }
  } fitness_sum, error_sum, baseline_sum, rep_sum, table_sum, ascent_sum;
  int ok = 0, failed = 0;

  for (const auto& dir : dirs) {
    const std::string id = dir.filename().string();
    std::vector<std::string> row(eval_columns().size());
    row[0] = id;
    try {
      const LoadedSet loaded = load_set(dir);
      RegisterOptions ro = options.registration;
      ro.set_dir = dir;
      ro.dump_graph.reset();
      ro.dump_representations.reset();
      const auto report = register_loaded(loaded, id, ro);

      row[1] = std::to_string(report["n"].get<std::size_t>());
      row[2] = number(report["fitness"].get<double>());
      fitness_sum.add(report["fitness"].get<double>());
      std::optional<double> engine_error;
      if (!report["errors"].is_null()) {
        engine_error = report["errors"]["mean"].get<double>();
        row[3] = number(*engine_error);
        error_sum.add(*engine_error);
      }
      if (options.baseline && engine_error) {
        const std::size_t n = report["n"].get<std::size_t>();
        std::vector<std::string> ids(loaded.images.ids().begin(),
                                     loaded.images.ids().begin() + static_cast<std::ptrdiff_t>(n));
        const GroundTruth baseline = parse_offsets_json(dir / *options.baseline, ids);
        GroundTruth truth = *loaded.truth;
        truth.offsets.resize(n);
        const double baseline_error = registration_error(baseline.offsets, truth).mean;
        row[4] = number(baseline_error);
        baseline_sum.add(baseline_error);
        const double reduction =
            baseline_error > 0.0 ? 100.0 * (baseline_error - *engine_error) / baseline_error : 0.0;
        row[5] = number(reduction);
      }
      row[6] = number(report["timings_ms"]["representation"].get<double>());
      row[7] = number(report["timings_ms"]["tables"].get<double>());
      row[8] = number(report["timings_ms"]["ascent"].get<double>());
      rep_sum.add(report["timings_ms"]["representation"].get<double>());
      table_sum.add(report["timings_ms"]["tables"].get<double>());
      ascent_sum.add(report["timings_ms"]["ascent"].get<double>());
      row[9] = "ok";
      ++ok;
    } catch (const std::exception& e) {
      std::fill(row.begin() + 1, row.end(), std::string{});
      row[9] = "error";
      row[10] = e.what();
      ++failed;
      result.all_ok = false;
    }
    csv += csv_join(row) + "\n";
  }

  std::vector<std::string> footer(eval_columns().size());
  footer[0] = "ALL";
  footer[1] = std::to_string(ok);
  footer[2] = fitness_sum.mean();
  footer[3] = error_sum.mean();
  footer[4] = baseline_sum.mean();
  if (baseline_sum.count > 0 && error_sum.count > 0) {
    const double b = baseline_sum.total / baseline_sum.count;
    const double e = error_sum.total / error_sum.count;
    footer[5] = number(b > 0.0 ? 100.0 * (b - e) / b : 0.0);
  }
  footer[6] = rep_sum.mean();
  footer[7] = table_sum.mean();
  footer[8] = ascent_sum.mean();
  footer[9] = failed == 0 ? "ok" : "error";
  footer[10] = failed == 0 ? "" : std::to_string(failed) + " set(s) failed";
  csv += csv_join(footer) + "\n";
  result.csv = std::move(csv);
  return result;
}

std::string csv_join(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\n\r") == std::string::npos) {
      line += f;
      continue;
    }
    line += '"';
    for (char c : f) {
      if (c == '"') line += '"';
      line += c;
    }
    line += '"';
  }
  return line;
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

}  // namespace setreg::cli
