#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "setreg/image.hpp"
#include "setreg/optimizer.hpp"

namespace setreg {

/// True translation of every image relative to the first one, in the same convention as
/// RegistrationSolution::offsets.
struct GroundTruth {
  std::vector<Shift> offsets;
};

struct LoadedSet {
  ImageSet images;
  std::optional<GroundTruth> truth;
};

/// Loads every .png/.pgm file in `dir`, ordered by filename, plus `truth.json` when present.
/// Truth entries are re-expressed relative to the first file. Throws FormatError naming the
/// offending file on unreadable rasters, size mismatches or malformed sidecars.
LoadedSet load_set(const std::filesystem::path& dir);

/// Writes images as 16-bit PNG (`ids` are the filenames) plus truth.json when given.
void save_set(const std::filesystem::path& dir, const ImageSet& set,
              const std::optional<GroundTruth>& truth);

/// Parses a truth.json-style document (filename -> [dx, dy]) against the given ids.
GroundTruth parse_offsets_json(const std::filesystem::path& file,
                               const std::vector<std::string>& ids);

/// Appearance changes applied independently to every generated image.
struct PerturbationSpec {
  double gamma_min = 0.6;  // I <- I^gamma, gamma ~ U[gamma_min, gamma_max]
  double gamma_max = 1.6;
  double gradient_amp = 0.3;  // linear ramp, peak-to-peak amplitude ~ U[0, gradient_amp]
  int occluder_count = 5;
  double occluder_size_min = 0.02;  // side / diameter as a fraction of image width
  double occluder_size_max = 0.06;
  double noise_sigma = 0.01;
  std::uint64_t seed = 0;

  /// All perturbations disabled.
  static PerturbationSpec none(std::uint64_t seed = 0);
  void validate() const;
};

struct GeneratedSet {
  ImageSet images;
  GroundTruth truth;
};

/// Crops n views of `base` with random shifts in [-shift_bound, shift_bound]^2 (the first view
/// unshifted) and perturbs each view. Output size defaults to the base size minus 2 * shift_bound
/// per axis. Throws std::invalid_argument if the base is too small, naming the minimum size.
GeneratedSet generate_set(const ImageGrid& base, int n, int shift_bound, const PerturbationSpec& p,
                          int out_width = 0, int out_height = 0);

/// Procedural aerial-like texture in [0, 1]: multi-octave value noise overlaid with flat
/// rectangles, so that structure exists at every scale of the sigma schedule.
ImageGrid procedural_texture(int width, int height, std::uint64_t seed);

struct RegistrationError {
  double mean = 0.0;
  struct Pair {
    int i;
    int j;
    double error;
  };
  std::vector<Pair> pairs;  // every ordered pair i != j
};

/// e_ij = |(Δr_i - Δr_j) - (t_i - t_j)| over all ordered pairs. Throws on size mismatch.
RegistrationError registration_error(std::span<const Shift> recovered, const GroundTruth& truth);
RegistrationError registration_error(const RegistrationSolution& sol, const GroundTruth& truth);

}  // namespace setreg
