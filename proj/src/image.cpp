#include "setreg/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "setreg/errors.hpp"

namespace setreg {

ImageGrid::ImageGrid(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("ImageGrid: dimensions must be positive, got " +
                                std::to_string(width) + "x" + std::to_string(height));
  }
  if (!std::isfinite(fill)) throw std::invalid_argument("ImageGrid: non-finite fill value");
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

ImageGrid::ImageGrid(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("ImageGrid: dimensions must be positive, got " +
                                std::to_string(width) + "x" + std::to_string(height));
  }
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("ImageGrid: data length " + std::to_string(data_.size()) +
                                " does not match " + std::to_string(width) + "x" +
                                std::to_string(height));
  }
  if (!std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); })) {
    throw std::invalid_argument("ImageGrid: non-finite pixel value");
  }
}

ImageSet::ImageSet(std::vector<ImageGrid> images, std::vector<std::string> ids)
    : images_(std::move(images)), ids_(std::move(ids)) {
  if (images_.size() < 2) throw std::invalid_argument("ImageSet: at least two images required");
  if (ids_.size() != images_.size()) {
    throw std::invalid_argument("ImageSet: id count does not match image count");
  }
  for (std::size_t i = 1; i < images_.size(); ++i) {
    if (!images_[i].same_shape(images_[0])) {
      throw std::invalid_argument("ImageSet: image '" + ids_[i] + "' is " +
                                  std::to_string(images_[i].width()) + "x" +
                                  std::to_string(images_[i].height()) + ", expected " +
                                  std::to_string(images_[0].width()) + "x" +
                                  std::to_string(images_[0].height()));
    }
  }
}

ImageSet ImageSet::prefix(std::size_t k) const {
  if (k < 2 || k > images_.size()) {
    throw std::invalid_argument("ImageSet::prefix: subset size " + std::to_string(k) +
                                " outside [2, " + std::to_string(images_.size()) + "]");
  }
  return ImageSet({images_.begin(), images_.begin() + static_cast<std::ptrdiff_t>(k)},
                  {ids_.begin(), ids_.begin() + static_cast<std::ptrdiff_t>(k)});
}

ImageGrid to_grayscale(const RawRaster& raw) {
  if (raw.channels != 1 && raw.channels != 3) {
    throw FormatError("unsupported channel count " + std::to_string(raw.channels) +
                      " (expected 1 or 3)");
  }
  if (raw.bit_depth != 8 && raw.bit_depth != 16) {
    throw FormatError("unsupported bit depth " + std::to_string(raw.bit_depth) +
                      " (expected 8 or 16)");
  }
  const std::size_t pixels = static_cast<std::size_t>(raw.width) * raw.height;
  if (raw.width < 1 || raw.height < 1 || raw.samples.size() != pixels * raw.channels) {
    throw FormatError("raster sample count does not match its dimensions");
  }
  const double full_scale = raw.bit_depth == 8 ? 255.0 : 65535.0;

  std::vector<double> out(pixels);
  if (raw.channels == 1) {
    for (std::size_t i = 0; i < pixels; ++i) out[i] = raw.samples[i] / full_scale;
  } else {
    for (std::size_t i = 0; i < pixels; ++i) {
      const std::uint16_t* px = &raw.samples[3 * i];
      const double luma = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
      out[i] = std::clamp(luma / full_scale, 0.0, 1.0);
    }
  }
  return ImageGrid(raw.width, raw.height, std::move(out));
}

double euclidean_distance(const ImageGrid& a, const ImageGrid& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("euclidean_distance: dimension mismatch");
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  double sum = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = pa[i] - pb[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

ImageGrid integral_image(const ImageGrid& g) {
  ImageGrid s(g.width(), g.height());
  for (int y = 0; y < g.height(); ++y) {
    const auto src = g.row(y);
    auto dst = s.row(y);
    double row_sum = 0.0;
    for (int x = 0; x < g.width(); ++x) {
      row_sum += src[x];
      dst[x] = y > 0 ? row_sum + s(x, y - 1) : row_sum;
    }
  }
  return s;
}

double rect_sum(const ImageGrid& s, int x0, int y0, int x1, int y1) {
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, s.width());
  y1 = std::min(y1, s.height());
  if (x0 >= x1 || y0 >= y1) return 0.0;

  double total = s(x1 - 1, y1 - 1);
  if (x0 > 0) total -= s(x0 - 1, y1 - 1);
  if (y0 > 0) total -= s(x1 - 1, y0 - 1);
  if (x0 > 0 && y0 > 0) total += s(x0 - 1, y0 - 1);
  return total;
}

}  // namespace setreg
