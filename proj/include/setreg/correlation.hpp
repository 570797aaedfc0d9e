#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "setreg/image.hpp"
#include "setreg/representation.hpp"

namespace setreg {

/// Values indexed by integer shift (dx, dy) with |dx| <= reach_x and |dy| <= reach_y.
class ShiftTable {
 public:
  ShiftTable() = default;
  ShiftTable(int reach_x, int reach_y);

  int reach_x() const { return reach_x_; }
  int reach_y() const { return reach_y_; }
  int columns() const { return 2 * reach_x_ + 1; }
  int rows() const { return 2 * reach_y_ + 1; }

  bool contains(Shift s) const {
    return s.dx >= -reach_x_ && s.dx <= reach_x_ && s.dy >= -reach_y_ && s.dy <= reach_y_;
  }
  double at(Shift s) const { return values_[index(s)]; }
  double& at(Shift s) { return values_[index(s)]; }

 private:
  std::size_t index(Shift s) const {
    return static_cast<std::size_t>(s.dy + reach_y_) * columns() +
           static_cast<std::size_t>(s.dx + reach_x_);
  }

  int reach_x_ = 0;
  int reach_y_ = 0;
  std::vector<double> values_;
};

/// Smallest integer >= n whose prime factors are all in {2, 3, 5, 7}.
int next_smooth_size(int n);

/// Real-to-complex 2D spectrum of a zero-padded grid.
struct Spectrum {
  int padded_width = 0;
  int padded_height = 0;
  std::vector<std::complex<double>> coefficients;  // padded_height x (padded_width / 2 + 1)
};

/// Spectrum of `g` zero-padded to padded_width x padded_height.
Spectrum forward_spectrum(const ImageGrid& g, int padded_width, int padded_height);

/// Full cross-correlation rho(d) = sum_r a(r) * b(r + d) for every shift with
/// |dx| <= w - 1, |dy| <= h - 1, via the convolution theorem on zero-padded grids.
/// Throws std::invalid_argument on a shape mismatch.
ShiftTable cross_correlate_full(const ImageGrid& a, const ImageGrid& b);
ShiftTable cross_correlate_full(const Representation& a, const Representation& b);

struct CorrelationParams {
  int max_shift = 128;
  double min_overlap_frac = 0.25;
};

/// Summed-area tables of one grid accumulated from each of its four corners. Any rectangle
/// touching a corner of the grid is then a single read, with no cancellation error.
class CornerSums {
 public:
  CornerSums() = default;
  explicit CornerSums(const ImageGrid& g);

  /// Sum over x0 <= x < x1, y0 <= y < y1. Empty rectangles give 0; a non-empty rectangle must
  /// touch a corner of the grid (std::invalid_argument otherwise).
  double corner_rect(int x0, int y0, int x1, int y1) const;
  double total() const { return top_left_(width_ - 1, height_ - 1); }

 private:
  int width_ = 0;
  int height_ = 0;
  ImageGrid top_left_, top_right_, bottom_left_, bottom_right_;  // mirrored accumulation frames
};

/// A representation together with the data every table built from it needs: its spectrum
/// and the corner sums of its squared values.
struct PreparedRepresentation {
  Representation rep;
  std::shared_ptr<const Spectrum> spectrum;
  std::shared_ptr<const CornerSums> energy;
};

PreparedRepresentation prepare(Representation rep);

struct Edge {
  int from = 0;
  int to = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Normalized cross-correlation of one ordered image pair, precomputed for O(1) lookups.
class CorrelationTable {
 public:
  /// Returned for shifts outside the search window or with too little overlap.
  static constexpr double kRejected = -1.0;
  /// Overlap energies below this make the coefficient uninformative (lookup returns 0).
  static constexpr double kMinEnergy = 1e-12;

  /// Normalized coefficient for shift d, or kRejected / 0 as described above.
  double lookup(Shift d) const;

  /// Raw numerator sum_r zeta_i(r) * zeta_j(r + d) for an in-window shift.
  double numerator(Shift d) const { return numerator_.at(d); }
  /// Overlap energies (sum of squares) of zeta_i and zeta_j for shift d.
  std::pair<double, double> overlap_energies(Shift d) const;
  /// Number of pixels shared by the two grids under shift d.
  long long overlap_area(Shift d) const;

  Edge edge() const { return edge_; }
  int width() const { return width_; }
  int height() const { return height_; }
  int max_shift() const { return params_.max_shift; }
  double min_overlap_frac() const { return params_.min_overlap_frac; }
  /// True when either representation carries (numerically) no energy at all.
  bool degenerate() const { return degenerate_; }

 private:
  friend CorrelationTable build_table(const PreparedRepresentation&,
                                      const PreparedRepresentation&, CorrelationParams, Edge);
  CorrelationTable() = default;

  Edge edge_;
  int width_ = 0;
  int height_ = 0;
  CorrelationParams params_;
  bool degenerate_ = false;
  ShiftTable numerator_;  // cropped to the search window
  std::shared_ptr<const CornerSums> energy_i_;
  std::shared_ptr<const CornerSums> energy_j_;
};

/// Throws std::invalid_argument on shape mismatch, max_shift outside [0, min(w, h)) or
/// min_overlap_frac outside (0, 1].
CorrelationTable build_table(const PreparedRepresentation& zi, const PreparedRepresentation& zj,
                             CorrelationParams params, Edge edge = {});
CorrelationTable build_table(const Representation& zi, const Representation& zj,
                             CorrelationParams params, Edge edge = {});

}  // namespace setreg
