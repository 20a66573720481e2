#include "shapelab/grid.hpp"

#include <sstream>

#include "shapelab/errors.hpp"

namespace shapelab {

void GridDomain::validate() const {
  if (lo.empty() || lo.size() > 3) throw ValidationError("grid dimension must be 1, 2 or 3");
  if (hi.size() != lo.size() || count.size() != lo.size())
    throw ValidationError("grid domain: lo, hi and count must have the same length");
  if (!(margin >= 0.0 && margin < 0.5)) throw ValidationError("grid domain: margin must lie in [0, 0.5)");
  for (std::size_t a = 0; a < lo.size(); ++a) {
    const double eps = margin * (hi[a] - lo[a]);
    if (!(lo[a] + eps < hi[a] - eps))
      throw ValidationError("grid domain: empty interval on axis " + std::to_string(a + 1));
    if (count[a] < 8) throw ValidationError("grid domain: axis " + std::to_string(a + 1) + " needs at least 8 nodes");
  }
}

Grid::Grid(std::vector<double> origin, std::vector<double> step, std::vector<int> count)
    : origin_(std::move(origin)), step_(std::move(step)), count_(std::move(count)) {
  if (count_.empty() || count_.size() > 3 || origin_.size() != count_.size() || step_.size() != count_.size())
    throw ValidationError("grid: inconsistent axis data");
  stride_.assign(count_.size(), 1);
  size_ = 1;
  for (int a = static_cast<int>(count_.size()) - 1; a >= 0; --a) {
    if (count_[a] < 1) throw ValidationError("grid: empty axis");
    stride_[a] = size_;
    size_ *= static_cast<std::size_t>(count_[a]);
  }
}

Grid Grid::from_domain(const GridDomain& d) {
  d.validate();
  std::vector<double> origin, step;
  for (int a = 0; a < d.dim(); ++a) {
    const double eps = d.margin * (d.hi[a] - d.lo[a]);
    origin.push_back(d.lo[a] + eps);
    step.push_back((d.hi[a] - d.lo[a] - 2 * eps) / (d.count[a] - 1));
  }
  return Grid(origin, step, d.count);
}

std::size_t Grid::flat(const Index& idx) const {
  std::size_t f = 0;
  for (int a = 0; a < dim(); ++a) f += stride_[a] * static_cast<std::size_t>(idx[a]);
  return f;
}

Index Grid::unflatten(std::size_t f) const {
  Index idx{0, 0, 0};
  for (int a = 0; a < dim(); ++a) {
    idx[a] = static_cast<int>(f / stride_[a]);
    f %= stride_[a];
  }
  return idx;
}

void Grid::point(std::size_t f, double* out) const {
  const Index idx = unflatten(f);
  for (int a = 0; a < dim(); ++a) out[a] = coord(a, idx[a]);
}

std::vector<double> Grid::point(std::size_t f) const {
  std::vector<double> p(dim());
  point(f, p.data());
  return p;
}

bool Grid::on_boundary(const Index& idx, int width) const {
  for (int a = 0; a < dim(); ++a)
    if (idx[a] < width || idx[a] >= count_[a] - width) return true;
  return false;
}

Grid Grid::refined(int factor) const {
  std::vector<double> step = step_;
  std::vector<int> count = count_;
  for (int a = 0; a < dim(); ++a) {
    step[a] /= factor;
    count[a] = (count[a] - 1) * factor + 1;
  }
  return Grid(origin_, step, count);
}

Grid Grid::without_axis(int axis) const {
  std::vector<double> o, s;
  std::vector<int> c;
  for (int a = 0; a < dim(); ++a) {
    if (a == axis) continue;
    o.push_back(origin_[a]);
    s.push_back(step_[a]);
    c.push_back(count_[a]);
  }
  return Grid(o, s, c);
}

std::string Grid::describe() const {
  std::ostringstream os;
  for (int a = 0; a < dim(); ++a) {
    if (a) os << " x ";
    os << count_[a] << " on [" << origin_[a] << ", " << last(a) << "]";
  }
  return os.str();
}

bool operator==(const Grid& a, const Grid& b) {
  return a.origin_ == b.origin_ && a.step_ == b.step_ && a.count_ == b.count_;
}

}  // namespace shapelab
