#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace setreg {

/// Integer pixel translation. x grows to the right, y grows downwards.
struct Shift {
  int dx = 0;
  int dy = 0;

  friend constexpr Shift operator+(Shift a, Shift b) { return {a.dx + b.dx, a.dy + b.dy}; }
  friend constexpr Shift operator-(Shift a, Shift b) { return {a.dx - b.dx, a.dy - b.dy}; }
  friend constexpr Shift operator-(Shift a) { return {-a.dx, -a.dy}; }
  friend constexpr bool operator==(Shift, Shift) = default;
};

/// Dense row-major raster of finite double intensities.
class ImageGrid {
 public:
  ImageGrid() = default;
  /// Zero-filled grid. Throws std::invalid_argument for non-positive sizes.
  ImageGrid(int width, int height, double fill = 0.0);
  /// Takes ownership of `data`; its length must be width * height and all values finite.
  ImageGrid(int width, int height, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double operator()(int x, int y) const { return data_[index(x, y)]; }
  double& operator()(int x, int y) { return data_[index(x, y)]; }

  std::span<const double> pixels() const { return data_; }
  std::span<double> pixels() { return data_; }
  std::span<const double> row(int y) const {
    return std::span<const double>(data_).subspan(static_cast<std::size_t>(y) * width_, width_);
  }
  std::span<double> row(int y) {
    return std::span<double>(data_).subspan(static_cast<std::size_t>(y) * width_, width_);
  }

  bool same_shape(const ImageGrid& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Ordered collection of same-sized images with per-image labels.
class ImageSet {
 public:
  ImageSet(std::vector<ImageGrid> images, std::vector<std::string> ids);

  std::size_t size() const { return images_.size(); }
  int width() const { return images_.front().width(); }
  int height() const { return images_.front().height(); }
  const ImageGrid& image(std::size_t i) const { return images_[i]; }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  const std::vector<ImageGrid>& images() const { return images_; }
  const std::vector<std::string>& ids() const { return ids_; }

  /// First `k` images, 2 <= k <= size().
  ImageSet prefix(std::size_t k) const;

 private:
  std::vector<ImageGrid> images_;
  std::vector<std::string> ids_;
};

/// Decoded integer raster as read from disk, before intensity normalization.
struct RawRaster {
  int width = 0;
  int height = 0;
  int channels = 0;   // 1 (gray) or 3 (RGB)
  int bit_depth = 0;  // 8 or 16
  std::vector<std::uint16_t> samples;  // interleaved, row-major
};

/// Luma reduction (0.299, 0.587, 0.114) and rescale to [0, 1].
/// Throws FormatError for channel counts other than 1 or 3 and bit depths other than 8 or 16.
ImageGrid to_grayscale(const RawRaster& raw);

/// sqrt(sum_r (a(r) - b(r))^2). Throws std::invalid_argument on shape mismatch.
double euclidean_distance(const ImageGrid& a, const ImageGrid& b);

/// Summed-area table: S(x, y) = sum of g(u, v) over u <= x, v <= y.
ImageGrid integral_image(const ImageGrid& g);

/// Sum of the source pixels with x0 <= x < x1 and y0 <= y < y1, read from an integral image.
/// Empty rectangles sum to zero. Rectangles touching the top-left corner cost no arithmetic,
/// any other rectangle at most three additions/subtractions.
double rect_sum(const ImageGrid& integral, int x0, int y0, int x1, int y1);

}  // namespace setreg
