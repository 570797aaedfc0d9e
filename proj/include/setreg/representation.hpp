#pragma once

#include <string>
#include <vector>

#include "setreg/image.hpp"

namespace setreg {

/// Normalized, symmetric 1D Gaussian taps truncated at ceil(3 sigma).
class GaussianKernel {
 public:
  /// Throws std::invalid_argument unless sigma is finite and > 0.
  explicit GaussianKernel(double sigma);

  double sigma() const { return sigma_; }
  int radius() const { return radius_; }
  /// 2 * radius + 1 taps; weights()[radius] is the centre tap.
  const std::vector<double>& weights() const { return weights_; }

 private:
  double sigma_;
  int radius_;
  std::vector<double> weights_;
};

/// Separable Gaussian blur (horizontal pass, then vertical) with edge replication.
ImageGrid gaussian_blur(const ImageGrid& img, const GaussianKernel& kernel);

/// ABS-HP image: |I - I * G(sigma)|, tagged with the sigma that produced it.
struct Representation {
  ImageGrid grid;
  double sigma = 0.0;
  std::string source_id;
};

/// Computes |img - gaussian_blur(img)|. Throws std::invalid_argument if sigma <= 0.
///
/// The input is centred on its midrange before filtering. This does not change the result
/// beyond rounding, but makes the output bitwise identical for `img` and `c - img` whenever
/// `c - img` is exactly representable.
Representation abs_highpass(const ImageGrid& img, double sigma, std::string source_id = {});

/// Coarse-to-fine list of sigmas; strictly decreasing and positive.
class PyramidSchedule {
 public:
  PyramidSchedule() : PyramidSchedule(std::vector<double>{40.0, 20.0, 8.0, 3.0}) {}
  /// Throws std::invalid_argument on an empty, non-positive or non-decreasing list.
  explicit PyramidSchedule(std::vector<double> sigmas);

  const std::vector<double>& sigmas() const { return sigmas_; }

 private:
  std::vector<double> sigmas_;
};

}  // namespace setreg
