#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "setreg/correlation.hpp"
#include "setreg/dataset.hpp"
#include "setreg/graph.hpp"

namespace setreg::cli {

struct GenerateOptions {
  std::optional<std::filesystem::path> base;  // procedural texture when absent
  int n = 10;
  int shift_bound = 40;
  int width = 0;  // output size; 0 = base size - 2 * shift_bound (256 for procedural bases)
  int height = 0;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> texture_seed;  // defaults to seed
  PerturbationSpec perturbation;  // seed is overwritten by `seed`
  bool clean = false;  // disable every perturbation
  std::filesystem::path out;
};

/// Generates a synthetic set and writes it (PNG + truth.json) to options.out.
GeneratedSet run_generate(const GenerateOptions& options);

struct RegisterOptions {
  std::filesystem::path set_dir;
  std::vector<double> sigmas{40.0, 20.0, 8.0, 3.0};
  GraphConfig graph;
  CorrelationParams correlation;
  int max_iterations = 10000;
  double reach_scale = 1.5;
  bool group_moves = true;
  int subset = 0;  // register only the first `subset` images; 0 = all
  std::optional<std::filesystem::path> dump_graph;
  std::optional<std::filesystem::path> dump_representations;
};

/// Everything needed to reproduce a run; the "config" block of a report.
nlohmann::ordered_json register_options_to_json(const RegisterOptions& options);
/// Inverse of register_options_to_json. Missing keys keep their defaults.
RegisterOptions register_options_from_json(const nlohmann::json& config);

/// Loads, registers and (when truth.json is present) scores one set. Returns the run report.
nlohmann::ordered_json run_register(const RegisterOptions& options);

/// Same, for an already loaded set; `set_id` labels the report.
nlohmann::ordered_json register_loaded(const LoadedSet& loaded, const std::string& set_id,
                                       const RegisterOptions& options);

struct EvalOptions {
  std::filesystem::path sets_dir;  // one subdirectory per set
  std::optional<std::string> baseline;  // offsets file name looked up inside each set
  RegisterOptions registration;  // set_dir is ignored
};

struct EvalResult {
  std::string csv;
  bool all_ok = true;
};

/// Column order of the eval CSV.
const std::vector<std::string>& eval_columns();

/// Registers every set below sets_dir (sorted by name) and aggregates one CSV row per set plus
/// a final "ALL" row. Failures become rows with status "error" and the batch continues.
EvalResult run_eval(const EvalOptions& options);

/// Minimal RFC 4180 helpers used for the eval CSV.
std::string csv_join(const std::vector<std::string>& fields);
std::vector<std::string> csv_split(const std::string& line);

}  // namespace setreg::cli
