#include "setreg/correlation.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace setreg {
namespace {

// FFTW plans for one padded size. Plans are created once under a lock (the FFTW planner is
// not thread-safe) and then executed concurrently through the new-array interface.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plans] : plans_) {
      fftw_destroy_plan(plans.forward);
      fftw_destroy_plan(plans.inverse);
    }
  }

  PlanPair get(int pw, int ph) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find({pw, ph});
    if (it != plans_.end()) return it->second;

    const std::size_t real_count = static_cast<std::size_t>(pw) * ph;
    const std::size_t complex_count = static_cast<std::size_t>(ph) * (pw / 2 + 1);
    double* real = fftw_alloc_real(real_count);
    fftw_complex* spec = fftw_alloc_complex(complex_count);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair plans;
    plans.forward = fftw_plan_dft_r2c_2d(ph, pw, real, spec, flags);
    plans.inverse = fftw_plan_dft_c2r_2d(ph, pw, spec, real, flags);
    fftw_free(real);
    fftw_free(spec);
    if (!plans.forward || !plans.inverse) throw std::runtime_error("FFTW planning failed");
    plans_.emplace(std::make_pair(pw, ph), plans);
    return plans;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, PlanPair> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

// Circular cross-correlation of two spectra, cropped to |dx| <= reach_x, |dy| <= reach_y.
ShiftTable correlate_spectra(const Spectrum& a, const Spectrum& b, int reach_x, int reach_y) {
  const int pw = a.padded_width;
  const int ph = a.padded_height;
  std::vector<std::complex<double>> product(a.coefficients.size());
  for (std::size_t k = 0; k < product.size(); ++k) {
    product[k] = std::conj(a.coefficients[k]) * b.coefficients[k];
  }
  std::vector<double> spatial(static_cast<std::size_t>(pw) * ph);
  fftw_execute_dft_c2r(plan_cache().get(pw, ph).inverse, as_fftw(product.data()),
                       spatial.data());

  const double scale = 1.0 / (static_cast<double>(pw) * ph);
  ShiftTable table(reach_x, reach_y);
  for (int dy = -reach_y; dy <= reach_y; ++dy) {
    const std::size_t row = static_cast<std::size_t>((dy + ph) % ph) * pw;
    for (int dx = -reach_x; dx <= reach_x; ++dx) {
      table.at({dx, dy}) = spatial[row + static_cast<std::size_t>((dx + pw) % pw)] * scale;
    }
  }
  return table;
}

void validate_params(const CorrelationParams& p, int w, int h) {
  if (p.max_shift < 0 || p.max_shift >= std::min(w, h)) {
    throw std::invalid_argument("build_table: max_shift " + std::to_string(p.max_shift) +
                                " must lie in [0, " + std::to_string(std::min(w, h)) + ")");
  }
  if (!(p.min_overlap_frac > 0.0 && p.min_overlap_frac <= 1.0)) {
    throw std::invalid_argument("build_table: min_overlap_frac must lie in (0, 1]");
  }
}

}  // namespace

ShiftTable::ShiftTable(int reach_x, int reach_y) : reach_x_(reach_x), reach_y_(reach_y) {
  if (reach_x < 0 || reach_y < 0) throw std::invalid_argument("ShiftTable: negative reach");
  values_.assign(static_cast<std::size_t>(columns()) * rows(), 0.0);
}

int next_smooth_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

Spectrum forward_spectrum(const ImageGrid& g, int pw, int ph) {
  if (pw < g.width() || ph < g.height()) {
    throw std::invalid_argument("forward_spectrum: padded size smaller than the grid");
  }
  std::vector<double> padded(static_cast<std::size_t>(pw) * ph, 0.0);
  for (int y = 0; y < g.height(); ++y) {
    const auto src = g.row(y);
    std::copy(src.begin(), src.end(), padded.begin() + static_cast<std::ptrdiff_t>(y) * pw);
  }
  Spectrum s;
  s.padded_width = pw;
  s.padded_height = ph;
  s.coefficients.resize(static_cast<std::size_t>(ph) * (pw / 2 + 1));
  fftw_execute_dft_r2c(plan_cache().get(pw, ph).forward, padded.data(),
                       as_fftw(s.coefficients.data()));
  return s;
}

ShiftTable cross_correlate_full(const ImageGrid& a, const ImageGrid& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("cross_correlate_full: dimension mismatch");
  const int pw = next_smooth_size(2 * a.width() - 1);
  const int ph = next_smooth_size(2 * a.height() - 1);
  return correlate_spectra(forward_spectrum(a, pw, ph), forward_spectrum(b, pw, ph),
                           a.width() - 1, a.height() - 1);
}

ShiftTable cross_correlate_full(const Representation& a, const Representation& b) {
  return cross_correlate_full(a.grid, b.grid);
}

namespace {

ImageGrid mirrored(const ImageGrid& g, bool flip_x, bool flip_y) {
  const int w = g.width(), h = g.height();
  ImageGrid out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out(x, y) = g(flip_x ? w - 1 - x : x, flip_y ? h - 1 - y : y);
  return out;
}

}  // namespace

CornerSums::CornerSums(const ImageGrid& g)
    : width_(g.width()),
      height_(g.height()),
      top_left_(integral_image(g)),
      top_right_(integral_image(mirrored(g, true, false))),
      bottom_left_(integral_image(mirrored(g, false, true))),
      bottom_right_(integral_image(mirrored(g, true, true))) {}

double CornerSums::corner_rect(int x0, int y0, int x1, int y1) const {
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, width_);
  y1 = std::min(y1, height_);
  if (x0 >= x1 || y0 >= y1) return 0.0;
  const bool left = x0 == 0, top = y0 == 0;
  const bool right = x1 == width_, bottom = y1 == height_;
  if (left && top) return top_left_(x1 - 1, y1 - 1);
  if (right && top) return top_right_(width_ - 1 - x0, y1 - 1);
  if (left && bottom) return bottom_left_(x1 - 1, height_ - 1 - y0);
  if (right && bottom) return bottom_right_(width_ - 1 - x0, height_ - 1 - y0);
  throw std::invalid_argument("corner_rect: rectangle does not touch a corner");
}

PreparedRepresentation prepare(Representation rep) {
  const ImageGrid& g = rep.grid;
  const int pw = next_smooth_size(2 * g.width() - 1);
  const int ph = next_smooth_size(2 * g.height() - 1);
  auto spectrum = std::make_shared<const Spectrum>(forward_spectrum(g, pw, ph));

  ImageGrid squares = g;
  for (auto& v : squares.pixels()) v *= v;
  auto energy = std::make_shared<const CornerSums>(squares);
  return {std::move(rep), std::move(spectrum), std::move(energy)};
}

CorrelationTable build_table(const PreparedRepresentation& zi, const PreparedRepresentation& zj,
                             CorrelationParams params, Edge edge) {
  const ImageGrid& gi = zi.rep.grid;
  const ImageGrid& gj = zj.rep.grid;
  if (!gi.same_shape(gj)) throw std::invalid_argument("build_table: dimension mismatch");
  validate_params(params, gi.width(), gi.height());

  CorrelationTable t;
  t.edge_ = edge;
  t.width_ = gi.width();
  t.height_ = gi.height();
  t.params_ = params;
  t.energy_i_ = zi.energy;
  t.energy_j_ = zj.energy;
  t.degenerate_ = t.energy_i_->total() < CorrelationTable::kMinEnergy ||
                  t.energy_j_->total() < CorrelationTable::kMinEnergy;
  t.numerator_ = correlate_spectra(*zi.spectrum, *zj.spectrum, params.max_shift, params.max_shift);
  return t;
}

CorrelationTable build_table(const Representation& zi, const Representation& zj,
                             CorrelationParams params, Edge edge) {
  if (!zi.grid.same_shape(zj.grid)) throw std::invalid_argument("build_table: dimension mismatch");
  validate_params(params, zi.grid.width(), zi.grid.height());
  return build_table(prepare(zi), prepare(zj), params, edge);
}

long long CorrelationTable::overlap_area(Shift d) const {
  const long long ox = std::max(0, width_ - std::abs(d.dx));
  const long long oy = std::max(0, height_ - std::abs(d.dy));
  return ox * oy;
}

std::pair<double, double> CorrelationTable::overlap_energies(Shift d) const {
  // Pixel r of zeta_i meets pixel r + d of zeta_j. Each overlap rectangle touches a corner of
  // its own grid.
  const int xi0 = std::max(0, -d.dx), xi1 = width_ - std::max(0, d.dx);
  const int yi0 = std::max(0, -d.dy), yi1 = height_ - std::max(0, d.dy);
  return {energy_i_->corner_rect(xi0, yi0, xi1, yi1),
          energy_j_->corner_rect(xi0 + d.dx, yi0 + d.dy, xi1 + d.dx, yi1 + d.dy)};
}

double CorrelationTable::lookup(Shift d) const {
  if (std::abs(d.dx) > params_.max_shift || std::abs(d.dy) > params_.max_shift) return kRejected;
  if (static_cast<double>(overlap_area(d)) <
      params_.min_overlap_frac * static_cast<double>(width_) * height_) {
    return kRejected;
  }
  const auto [ei, ej] = overlap_energies(d);
  if (ei < kMinEnergy || ej < kMinEnergy) return 0.0;
  // Both grids are nonnegative, so the exact coefficient lies in [0, 1]; clamp away FFT
  // round-off.
  const double num = std::max(0.0, numerator_.at(d));
  return std::min(1.0, num / std::sqrt(ei * ej));
}

}  // namespace setreg
