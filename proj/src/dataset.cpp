#include "setreg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "setreg/errors.hpp"
#include "setreg/raster_io.hpp"

namespace setreg {
namespace fs = std::filesystem;

namespace {

std::string generated_id(int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "img_%03d.png", k);
  return buf;
}

void perturb(ImageGrid& img, const PerturbationSpec& p, std::mt19937_64& rng) {
  const int w = img.width();
  const int h = img.height();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  bool touched = false;

  if (p.gamma_min != 1.0 || p.gamma_max != 1.0) {
    const double gamma = p.gamma_min + (p.gamma_max - p.gamma_min) * unit(rng);
    for (auto& v : img.pixels()) v = std::pow(std::max(v, 0.0), gamma);
    touched = true;
  }

  if (p.gradient_amp > 0.0) {
    const double amp = p.gradient_amp * unit(rng);
    const double theta = 2.0 * std::numbers::pi * unit(rng);
    const double c = std::cos(theta), s = std::sin(theta);
    const double half_span = (std::abs(c) * (w - 1) + std::abs(s) * (h - 1)) / 2.0;
    if (half_span > 0.0) {
      const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          img(x, y) += amp * ((x - cx) * c + (y - cy) * s) / (2.0 * half_span);
        }
      }
    }
    touched = true;
  }

  for (int o = 0; o < p.occluder_count; ++o) {
    const double frac = p.occluder_size_min + (p.occluder_size_max - p.occluder_size_min) * unit(rng);
    const int size = std::max(1, static_cast<int>(std::lround(frac * w)));
    const bool disc = unit(rng) < 0.5;
    const double cx = unit(rng) * w, cy = unit(rng) * h;
    const double value = unit(rng);
    const double half = size / 2.0;
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - half)));
    const int x1 = std::min(w, static_cast<int>(std::ceil(cx + half)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - half)));
    const int y1 = std::min(h, static_cast<int>(std::ceil(cy + half)));
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        const double ddx = x + 0.5 - cx, ddy = y + 0.5 - cy;
        if (!disc || ddx * ddx + ddy * ddy <= half * half) img(x, y) = value;
      }
    }
    touched = true;
  }

  if (p.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, p.noise_sigma);
    for (auto& v : img.pixels()) v += noise(rng);
    touched = true;
  }

  if (touched) {
    for (auto& v : img.pixels()) v = std::clamp(v, 0.0, 1.0);
  }
}

}  // namespace

PerturbationSpec PerturbationSpec::none(std::uint64_t seed) {
  PerturbationSpec p;
  p.gamma_min = p.gamma_max = 1.0;
  p.gradient_amp = 0.0;
  p.occluder_count = 0;
  p.noise_sigma = 0.0;
  p.seed = seed;
  return p;
}

void PerturbationSpec::validate() const {
  if (!(gamma_min > 0.0) || gamma_max < gamma_min) {
    throw std::invalid_argument("PerturbationSpec: gamma range must satisfy 0 < min <= max");
  }
  if (gradient_amp < 0.0) throw std::invalid_argument("PerturbationSpec: negative gradient_amp");
  if (occluder_count < 0) throw std::invalid_argument("PerturbationSpec: negative occluder_count");
  if (occluder_size_min < 0.0 || occluder_size_max < occluder_size_min) {
    throw std::invalid_argument("PerturbationSpec: occluder size range must satisfy 0 <= min <= max");
  }
  if (noise_sigma < 0.0) throw std::invalid_argument("PerturbationSpec: negative noise_sigma");
}

GeneratedSet generate_set(const ImageGrid& base, int n, int shift_bound, const PerturbationSpec& p,
                          int out_width, int out_height) {
  if (n < 2) throw std::invalid_argument("generate_set: n must be >= 2");
  if (shift_bound < 0) throw std::invalid_argument("generate_set: negative shift_bound");
  p.validate();

  const int w = out_width > 0 ? out_width : base.width() - 2 * shift_bound;
  const int h = out_height > 0 ? out_height : base.height() - 2 * shift_bound;
  const int need_w = std::max(w, 1) + 2 * shift_bound;
  const int need_h = std::max(h, 1) + 2 * shift_bound;
  if (w < 1 || h < 1 || base.width() < need_w || base.height() < need_h) {
    throw std::invalid_argument("generate_set: base image " + std::to_string(base.width()) + "x" +
                                std::to_string(base.height()) + " too small; need at least " +
                                std::to_string(need_w) + "x" + std::to_string(need_h));
  }
  // Occluders are capped at 20% of the image area in the worst case.
  const double max_side = std::max(1.0, std::ceil(p.occluder_size_max * w)) + 1.0;
  if (p.occluder_count * max_side * max_side > 0.2 * w * h) {
    throw std::invalid_argument("generate_set: occluders could cover more than 20% of the image");
  }

  std::mt19937_64 rng(p.seed);
  std::uniform_int_distribution<int> draw(-shift_bound, shift_bound);
  GroundTruth truth;
  truth.offsets.push_back({0, 0});
  for (int k = 1; k < n; ++k) {
    const int dx = draw(rng);
    const int dy = draw(rng);
    truth.offsets.push_back({dx, dy});
  }

  const int ox = (base.width() - w) / 2;
  const int oy = (base.height() - h) / 2;
  std::vector<ImageGrid> images;
  std::vector<std::string> ids;
  for (int k = 0; k < n; ++k) {
    const Shift t = truth.offsets[k];
    ImageGrid view(w, h);
    for (int y = 0; y < h; ++y) {
      const auto src = base.row(oy + t.dy + y).subspan(ox + t.dx, w);
      std::copy(src.begin(), src.end(), view.row(y).begin());
    }
    perturb(view, p, rng);
    images.push_back(std::move(view));
    ids.push_back(generated_id(k));
  }
  return {ImageSet(std::move(images), std::move(ids)), std::move(truth)};
}

ImageGrid procedural_texture(int width, int height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ImageGrid tex(width, height);

  double amplitude = 1.0;
  for (int cell = 128; cell >= 2; cell /= 2, amplitude *= 0.6) {
    const int gw = width / cell + 2;
    const int gh = height / cell + 2;
    std::vector<double> lattice(static_cast<std::size_t>(gw) * gh);
    for (auto& v : lattice) v = unit(rng);
    const auto at = [&](int i, int j) { return lattice[static_cast<std::size_t>(j) * gw + i]; };
    for (int y = 0; y < height; ++y) {
      const double fy = static_cast<double>(y) / cell;
      const int j = static_cast<int>(fy);
      double ty = fy - j;
      ty = ty * ty * (3.0 - 2.0 * ty);
      for (int x = 0; x < width; ++x) {
        const double fx = static_cast<double>(x) / cell;
        const int i = static_cast<int>(fx);
        double tx = fx - i;
        tx = tx * tx * (3.0 - 2.0 * tx);
        const double top = at(i, j) + (at(i + 1, j) - at(i, j)) * tx;
        const double bottom = at(i, j + 1) + (at(i + 1, j + 1) - at(i, j + 1)) * tx;
        tex(x, y) += amplitude * (top + (bottom - top) * ty);
      }
    }
  }

  // Flat rectangles ("fields", "roofs") give sharp edges at many scales.
  const int rect_count = std::max(1, width * height / 1200);
  std::uniform_int_distribution<int> side(3, std::max(4, std::min(width, height) / 6));
  for (int r = 0; r < rect_count; ++r) {
    const int rw = side(rng), rh = side(rng);
    const int x0 = static_cast<int>(unit(rng) * width), y0 = static_cast<int>(unit(rng) * height);
    const double value = 2.5 * unit(rng);
    for (int y = y0; y < std::min(height, y0 + rh); ++y) {
      for (int x = x0; x < std::min(width, x0 + rw); ++x) tex(x, y) = 0.3 * tex(x, y) + 0.7 * value;
    }
  }

  const auto px = tex.pixels();
  const auto [lo, hi] = std::minmax_element(px.begin(), px.end());
  const double lo_v = *lo, range = *hi - *lo;
  for (auto& v : tex.pixels()) v = range > 0.0 ? (v - lo_v) / range : 0.0;
  return tex;
}

GroundTruth parse_offsets_json(const fs::path& file, const std::vector<std::string>& ids) {
  std::ifstream in(file);
  if (!in) throw FormatError("cannot open '" + file.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("'" + file.string() + "': " + e.what());
  }
  if (!doc.is_object()) throw FormatError("'" + file.string() + "': expected a JSON object");

  GroundTruth truth;
  for (const auto& id : ids) {
    const auto it = doc.find(id);
    if (it == doc.end()) throw FormatError("'" + file.string() + "': no entry for '" + id + "'");
    const auto& v = *it;
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
      throw FormatError("'" + file.string() + "': entry for '" + id +
                        "' must be an [dx, dy] integer pair");
    }
    truth.offsets.push_back({v[0].get<int>(), v[1].get<int>()});
  }
  const Shift first = truth.offsets.front();
  for (auto& s : truth.offsets) s = s - first;
  return truth;
}

LoadedSet load_set(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw FormatError("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_raster_filename(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  if (files.size() < 2) {
    throw FormatError("'" + dir.string() + "': need at least two PNG/PGM images, found " +
                      std::to_string(files.size()));
  }

  std::vector<ImageGrid> images;
  std::vector<std::string> ids;
  for (const auto& f : files) {
    ImageGrid img = load_grayscale(f);
    if (!images.empty() && !img.same_shape(images.front())) {
      throw FormatError("'" + f.string() + "' is " + std::to_string(img.width()) + "x" +
                        std::to_string(img.height()) + ", expected " +
                        std::to_string(images.front().width()) + "x" +
                        std::to_string(images.front().height()));
    }
    images.push_back(std::move(img));
    ids.push_back(f.filename().string());
  }

  LoadedSet out{ImageSet(std::move(images), std::move(ids)), std::nullopt};
  if (const fs::path sidecar = dir / "truth.json"; fs::exists(sidecar)) {
    out.truth = parse_offsets_json(sidecar, out.images.ids());
  }
  return out;
}

void save_set(const fs::path& dir, const ImageSet& set, const std::optional<GroundTruth>& truth) {
  fs::create_directories(dir);
  for (std::size_t k = 0; k < set.size(); ++k) write_png16(dir / set.id(k), set.image(k));
  if (truth) {
    if (truth->offsets.size() != set.size()) {
      throw std::invalid_argument("save_set: truth size does not match the set");
    }
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    for (std::size_t k = 0; k < set.size(); ++k) {
      doc[set.id(k)] = {truth->offsets[k].dx, truth->offsets[k].dy};
    }
    std::ofstream out(dir / "truth.json");
    out << doc.dump(2) << '\n';
    if (!out) throw FormatError("cannot write '" + (dir / "truth.json").string() + "'");
  }
}

RegistrationError registration_error(std::span<const Shift> recovered, const GroundTruth& truth) {
  if (recovered.size() != truth.offsets.size()) {
    throw std::invalid_argument("registration_error: solution has " +
                                std::to_string(recovered.size()) + " offsets, truth has " +
                                std::to_string(truth.offsets.size()));
  }
  RegistrationError err;
  const int n = static_cast<int>(recovered.size());
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const Shift d = (recovered[i] - recovered[j]) - (truth.offsets[i] - truth.offsets[j]);
      const double e = std::hypot(static_cast<double>(d.dx), static_cast<double>(d.dy));
      err.pairs.push_back({i, j, e});
      total += e;
    }
  }
  err.mean = err.pairs.empty() ? 0.0 : total / static_cast<double>(err.pairs.size());
  return err;
}

RegistrationError registration_error(const RegistrationSolution& sol, const GroundTruth& truth) {
  return registration_error(sol.offsets, truth);
}

}  // namespace setreg
