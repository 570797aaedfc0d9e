// setreg: generate synthetic image sets, register sets, evaluate batches.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "setreg/cli.hpp"

namespace {

using namespace setreg;
using namespace setreg::cli;

void add_registration_flags(CLI::App* cmd, RegisterOptions& o, std::vector<std::string>& schemes) {
  cmd->add_option("--sigmas", o.sigmas, "Coarse-to-fine high-pass sigmas")
      ->delimiter(',')
      ->capture_default_str();
  cmd->add_option("--schemes", schemes,
                  "Graph schemes: knn, threshold_near, kfurthest, threshold_far")
      ->delimiter(',')
      ->capture_default_str();
  cmd->add_option("--k-near", o.graph.k_near, "Neighbours per node (knn)")->capture_default_str();
  cmd->add_option("--k-far", o.graph.k_far, "Furthest images per node (kfurthest)")
      ->capture_default_str();
  cmd->add_option("--d-thres1", o.graph.d_thres1, "Proximity threshold (threshold_near)");
  cmd->add_option("--d-thres2", o.graph.d_thres2, "Remoteness threshold (threshold_far)");
  cmd->add_option("--max-shift", o.correlation.max_shift, "Search window in pixels")
      ->capture_default_str();
  cmd->add_option("--min-overlap", o.correlation.min_overlap_frac,
                  "Minimum overlap area fraction")
      ->capture_default_str();
  cmd->add_option("--max-iterations", o.max_iterations, "Iteration cap per sigma level")
      ->capture_default_str();
  cmd->add_option("--reach-scale", o.reach_scale,
                  "Moves jump up to floor(scale * sigma) pixels per step (0 = unit steps)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_flag("!--no-group-moves", o.group_moves, "Move single images only");
  cmd->add_option("--subset", o.subset, "Register only the first k images (0 = all)")
      ->capture_default_str();
}

void apply_schemes(RegisterOptions& o, const std::vector<std::string>& schemes) {
  if (schemes.empty()) return;
  o.graph.schemes.clear();
  for (const auto& s : schemes) o.graph.schemes.insert(parse_scheme(s));
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  out << text;
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Set-based translational registration of time-separated images"};
  app.require_subcommand(1);

  // generate
  GenerateOptions gen;
  std::string gen_base, gen_out;
  std::uint64_t gen_texture_seed = 0;
  auto* generate = app.add_subcommand("generate", "Write a synthetic set (PNG + truth.json)");
  generate->add_option("--base", gen_base, "Base raster; procedural texture when omitted");
  generate->add_option("--n", gen.n, "Number of images")->check(CLI::Range(2, 1 << 20))
      ->capture_default_str();
  generate->add_option("--shift-bound", gen.shift_bound, "Max |shift| per axis in pixels")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  generate->add_option("--width", gen.width, "Output width (default: base width - 2*bound, or 256)");
  generate->add_option("--height", gen.height, "Output height");
  generate->add_option("--seed", gen.seed, "Seed for shifts and perturbations")
      ->capture_default_str();
  auto* texture_opt =
      generate->add_option("--texture-seed", gen_texture_seed, "Procedural texture seed (default: --seed)");
  generate->add_flag("--clean", gen.clean, "Disable all appearance perturbations");
  generate->add_option("--gamma-min", gen.perturbation.gamma_min)->capture_default_str();
  generate->add_option("--gamma-max", gen.perturbation.gamma_max)->capture_default_str();
  generate->add_option("--ramp", gen.perturbation.gradient_amp, "Illumination ramp amplitude")
      ->capture_default_str();
  generate->add_option("--occluders", gen.perturbation.occluder_count)->capture_default_str();
  generate->add_option("--occluder-min", gen.perturbation.occluder_size_min)->capture_default_str();
  generate->add_option("--occluder-max", gen.perturbation.occluder_size_max)->capture_default_str();
  generate->add_option("--noise", gen.perturbation.noise_sigma)->capture_default_str();
  generate->add_option("--out", gen_out, "Output directory")->required();

  // register
  RegisterOptions reg;
  std::vector<std::string> reg_schemes{"knn", "kfurthest"};
  std::string reg_set, reg_output, reg_config, reg_graph, reg_reps;
  auto* reg_cmd = app.add_subcommand("register", "Register one set and print a JSON report");
  reg_cmd->add_option("set", reg_set, "Directory of PNG/PGM images (optional truth.json)");
  reg_cmd->add_option("--config", reg_config,
                      "Re-run using the \"config\" block of an earlier report");
  add_registration_flags(reg_cmd, reg, reg_schemes);
  reg_cmd->add_option("--dump-graph", reg_graph, "Write the constraints graph as JSON");
  reg_cmd->add_option("--dump-representations", reg_reps,
                      "Write per-level representations as PGM under this directory");
  reg_cmd->add_option("-o,--output", reg_output, "Report file (default: stdout)");

  // eval
  EvalOptions ev;
  std::vector<std::string> ev_schemes{"knn", "kfurthest"};
  std::string ev_sets, ev_baseline, ev_output;
  std::ostringstream columns;
  for (const auto& c : eval_columns()) columns << "  " << c << "\n";
  auto* eval = app.add_subcommand(
      "eval",
      "Register every set below a directory and write one CSV row per set plus an ALL row.\n"
      "Columns:\n" + columns.str() +
          "error_reduction_pct = 100 * (baseline_error - mean_error) / baseline_error "
          "(0 when the baseline is already perfect).");
  eval->add_option("sets", ev_sets, "Directory containing one subdirectory per set")->required();
  eval->add_option("--baseline", ev_baseline,
                   "Baseline offsets file name inside each set (truth.json format)");
  add_registration_flags(eval, ev.registration, ev_schemes);
  eval->add_option("-o,--output", ev_output, "CSV file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      if (!gen_base.empty()) gen.base = gen_base;
      if (texture_opt->count() > 0) gen.texture_seed = gen_texture_seed;
      gen.out = gen_out;
      run_generate(gen);
      std::cout << gen.out.string() << "\n";
      return 0;
    }
    if (reg_cmd->parsed()) {
      if (!reg_config.empty()) {
        std::ifstream in(reg_config);
        if (!in) throw std::runtime_error("cannot open '" + reg_config + "'");
        const auto doc = nlohmann::json::parse(in);
        reg = register_options_from_json(doc.contains("config") ? doc.at("config") : doc);
        if (!reg_set.empty()) reg.set_dir = reg_set;
      } else {
        apply_schemes(reg, reg_schemes);
        reg.set_dir = reg_set;
      }
      if (reg.set_dir.empty()) throw CLI::ValidationError("register", "no set directory given");
      if (!reg_graph.empty()) reg.dump_graph = reg_graph;
      if (!reg_reps.empty()) reg.dump_representations = reg_reps;
      write_text(reg_output, run_register(reg).dump(2) + "\n");
      return 0;
    }
    if (eval->parsed()) {
      apply_schemes(ev.registration, ev_schemes);
      ev.sets_dir = ev_sets;
      if (!ev_baseline.empty()) ev.baseline = ev_baseline;
      const EvalResult result = run_eval(ev);
      write_text(ev_output, result.csv);
      return result.all_ok ? 0 : 1;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
