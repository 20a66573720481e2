#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace shapelab {

/// Axis-aligned box with per-axis sample counts. Nodes are placed on
/// [lo + eps, hi - eps] with eps = margin * (hi - lo), so singular loci on the
/// box faces are never sampled.
struct GridDomain {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<int> count;
  double margin = 0.05;

  int dim() const { return static_cast<int>(lo.size()); }
  /// Throws ValidationError unless lo+eps < hi-eps and count >= 8 on every axis.
  void validate() const;
};

using Index = std::array<int, 3>;

/// Uniform tensor grid of dimension 1..3, stored row-major (axis 0 slowest).
class Grid {
 public:
  Grid() = default;
  Grid(std::vector<double> origin, std::vector<double> step, std::vector<int> count);
  static Grid from_domain(const GridDomain& domain);

  int dim() const { return static_cast<int>(count_.size()); }
  int count(int axis) const { return count_[axis]; }
  double step(int axis) const { return step_[axis]; }
  double origin(int axis) const { return origin_[axis]; }
  double last(int axis) const { return origin_[axis] + step_[axis] * (count_[axis] - 1); }
  double coord(int axis, int i) const { return origin_[axis] + step_[axis] * i; }
  const std::vector<int>& counts() const { return count_; }

  std::size_t size() const { return size_; }
  std::size_t stride(int axis) const { return stride_[axis]; }
  std::size_t flat(const Index& idx) const;
  Index unflatten(std::size_t flat) const;
  /// Coordinates of a node; `out` must hold dim() values.
  void point(std::size_t flat, double* out) const;
  std::vector<double> point(std::size_t flat) const;
  bool on_boundary(const Index& idx, int width = 1) const;

  /// Same box with (count-1)*factor+1 nodes per axis.
  Grid refined(int factor) const;
  /// Grid over the remaining axes after removing `axis`.
  Grid without_axis(int axis) const;

  std::string describe() const;
  friend bool operator==(const Grid& a, const Grid& b);

 private:
  std::vector<double> origin_;
  std::vector<double> step_;
  std::vector<int> count_;
  std::vector<std::size_t> stride_;
  std::size_t size_ = 0;
};

}  // namespace shapelab
