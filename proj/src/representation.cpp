#include "setreg/representation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace setreg {

GaussianKernel::GaussianKernel(double sigma) : sigma_(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("GaussianKernel: sigma must be positive, got " +
                                std::to_string(sigma));
  }
  radius_ = static_cast<int>(std::ceil(3.0 * sigma));
  weights_.resize(2 * static_cast<std::size_t>(radius_) + 1);
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  for (int k = -radius_; k <= radius_; ++k) {
    weights_[k + radius_] = std::exp(-static_cast<double>(k) * k * inv_two_var);
  }
  // Sum symmetric pairs outward-in so that the normalized taps stay exactly mirror-symmetric.
  double total = weights_[radius_];
  for (int k = radius_; k >= 1; --k) total += 2.0 * weights_[radius_ + k];
  for (auto& w : weights_) w /= total;
}

ImageGrid gaussian_blur(const ImageGrid& img, const GaussianKernel& kernel) {
  const int w = img.width();
  const int h = img.height();
  const int r = kernel.radius();
  const auto& taps = kernel.weights();

  // Horizontal pass over an edge-replicated copy of each row.
  ImageGrid tmp(w, h);
  std::vector<double> padded(static_cast<std::size_t>(w) + 2 * r);
  for (int y = 0; y < h; ++y) {
    const auto src = img.row(y);
    for (int i = 0; i < static_cast<int>(padded.size()); ++i) {
      padded[i] = src[std::clamp(i - r, 0, w - 1)];
    }
    auto dst = tmp.row(y);
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      const double* p = &padded[x];
      for (std::size_t k = 0; k < taps.size(); ++k) acc += taps[k] * p[k];
      dst[x] = acc;
    }
  }

  // Vertical pass: accumulate whole clamped rows so the inner loop runs along memory.
  ImageGrid out(w, h);
  for (int y = 0; y < h; ++y) {
    auto dst = out.row(y);
    for (int k = -r; k <= r; ++k) {
      const double wk = taps[k + r];
      const auto src = tmp.row(std::clamp(y + k, 0, h - 1));
      for (int x = 0; x < w; ++x) dst[x] += wk * src[x];
    }
  }
  return out;
}

Representation abs_highpass(const ImageGrid& img, double sigma, std::string source_id) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("abs_highpass: sigma must be positive, got " +
                                std::to_string(sigma));
  }
  const GaussianKernel kernel(sigma);

  const auto px = img.pixels();
  const auto [lo, hi] = std::minmax_element(px.begin(), px.end());
  const double mid = (*lo + *hi) / 2.0;
  ImageGrid centred = img;
  for (auto& v : centred.pixels()) v -= mid;

  ImageGrid zeta = gaussian_blur(centred, kernel);
  const auto c = centred.pixels();
  auto z = zeta.pixels();
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::abs(c[i] - z[i]);
  return {std::move(zeta), sigma, std::move(source_id)};
}

PyramidSchedule::PyramidSchedule(std::vector<double> sigmas) : sigmas_(std::move(sigmas)) {
  if (sigmas_.empty()) throw std::invalid_argument("PyramidSchedule: empty schedule");
  for (std::size_t i = 0; i < sigmas_.size(); ++i) {
    if (!(sigmas_[i] > 0.0) || !std::isfinite(sigmas_[i])) {
      throw std::invalid_argument("PyramidSchedule: sigmas must be positive");
    }
    if (i > 0 && !(sigmas_[i] < sigmas_[i - 1])) {
      throw std::invalid_argument("PyramidSchedule: sigmas must be strictly decreasing");
    }
  }
}

}  // namespace setreg
