#include "sticky/zeroset.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <queue>

namespace sticky {

double ZeroPrimitive::distance(const Vec& x) const {
  switch (kind) {
    case Kind::kPoint: return (x - center).norm();
    case Kind::kPlane: return std::abs(normal.dot(x) - offset);
    case Kind::kSphere: return std::abs((x - center).norm() - radius);
  }
  return std::numeric_limits<double>::infinity();
}

int ZeroPrimitive::side(const Vec& x) const {
  switch (kind) {
    case Kind::kPoint:
      if (x.size() == 1) return x[0] >= center[0] ? 1 : -1;
      return 0;
    case Kind::kPlane: return normal.dot(x) >= offset ? 1 : -1;
    case Kind::kSphere: return (x - center).norm() >= radius ? 1 : -1;
  }
  return 0;
}

std::string ZeroPrimitive::describe() const {
  auto v = [](const Vec& a) {
    std::string s = "(";
    for (Eigen::Index i = 0; i < a.size(); ++i) s += fmt::format("{}{:g}", i ? ", " : "", a[i]);
    return s + ")";
  };
  switch (kind) {
    case Kind::kPoint: return "point " + v(center);
    case Kind::kPlane: return fmt::format("plane n={} c={:g}", v(normal), offset);
    case Kind::kSphere: return fmt::format("sphere {} r={:g}", v(center), radius);
  }
  return {};
}

double ZeroSet::distance(const Vec& x) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& p : primitives) d = std::min(d, p.distance(x));
  return d;
}

// -------------------------------------------------------------------------

ComponentMap::ComponentMap(const DomainGeometry& geom, const ZeroSet& zeros, int cells_per_axis)
    : geom_(&geom), zeros_(zeros), dim_(geom.dim()) {
  n_ = cells_per_axis > 0 ? cells_per_axis : (dim_ == 1 ? 512 : dim_ == 2 ? 128 : 40);
  lo_ = geom.bbox_lo();
  h_ = (geom.bbox_hi() - geom.bbox_lo()) / n_;
  long total = 1;
  for (int i = 0; i < dim_; ++i) total *= n_;
  label_.assign(static_cast<std::size_t>(total), -1);

  const double wall = 0.5 * h_.maxCoeff();
  auto center_of = [&](long idx) {
    Vec x(dim_);
    for (int i = 0; i < dim_; ++i) {
      x[i] = lo_[i] + (static_cast<double>(idx % n_) + 0.5) * h_[i];
      idx /= n_;
    }
    return x;
  };
  std::vector<char> open(static_cast<std::size_t>(total), 0);
  for (long c = 0; c < total; ++c) {
    const Vec x = center_of(c);
    const double f = geom.level(x);
    const double reach = geom.level_gradient(x).norm() * wall;
    open[static_cast<std::size_t>(c)] = (f <= reach) && zeros_.distance(x) > wall;
  }

  std::vector<long> stride(static_cast<std::size_t>(dim_));
  long s = 1;
  for (int i = 0; i < dim_; ++i) stride[static_cast<std::size_t>(i)] = s, s *= n_;

  for (long c = 0; c < total; ++c) {
    if (!open[static_cast<std::size_t>(c)] || label_[static_cast<std::size_t>(c)] >= 0) continue;
    const auto sig = signature(center_of(c));
    const int id = count_++;
    signatures_.push_back(sig);
    std::queue<long> q;
    q.push(c);
    label_[static_cast<std::size_t>(c)] = id;
    while (!q.empty()) {
      const long cur = q.front();
      q.pop();
      for (int axis = 0; axis < dim_; ++axis) {
        const long coord = (cur / stride[static_cast<std::size_t>(axis)]) % n_;
        for (int step : {-1, 1}) {
          if ((step < 0 && coord == 0) || (step > 0 && coord == n_ - 1)) continue;
          const long nb = cur + step * stride[static_cast<std::size_t>(axis)];
          if (!open[static_cast<std::size_t>(nb)] || label_[static_cast<std::size_t>(nb)] >= 0) continue;
          if (signature(center_of(nb)) != sig) continue;
          label_[static_cast<std::size_t>(nb)] = id;
          q.push(nb);
        }
      }
    }
  }
}

long ComponentMap::cell_index(const Vec& x) const {
  long idx = 0;
  long stride = 1;
  for (int i = 0; i < dim_; ++i) {
    long k = static_cast<long>(std::floor((x[i] - lo_[i]) / h_[i]));
    k = std::clamp(k, 0L, static_cast<long>(n_ - 1));
    idx += k * stride;
    stride *= n_;
  }
  return idx;
}

std::vector<int> ComponentMap::signature(const Vec& x) const {
  std::vector<int> sig;
  sig.reserve(zeros_.primitives.size());
  for (const auto& p : zeros_.primitives) sig.push_back(p.side(x));
  return sig;
}

int ComponentMap::component_of(const Vec& x) const {
  if (!geom_->in_closure(x)) return -1;
  if (!zeros_.empty() && zeros_.distance(x) <= 1e-12 * geom_->diameter()) return -1;
  const long c = cell_index(x);
  const int direct = label_[static_cast<std::size_t>(c)];
  const auto sig = signature(x);
  if (direct >= 0 && signatures_[static_cast<std::size_t>(direct)] == sig) return direct;
  // Near walls or the boundary the own cell may be closed: search the
  // neighbourhood for a cell with the same side signature.
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  const int r = 2;
  const long total = static_cast<long>(label_.size());
  std::vector<long> offsets{0};
  long stride = 1;
  for (int i = 0; i < dim_; ++i) {
    std::vector<long> next;
    for (long o : offsets)
      for (int k = -r; k <= r; ++k) next.push_back(o + k * stride);
    offsets.swap(next);
    stride *= n_;
  }
  for (long o : offsets) {
    const long nb = c + o;
    if (nb < 0 || nb >= total) continue;
    const int id = label_[static_cast<std::size_t>(nb)];
    if (id < 0 || signatures_[static_cast<std::size_t>(id)] != sig) continue;
    const double d = static_cast<double>(std::abs(o));
    if (d < best_d) best_d = d, best = id;
  }
  return best;
}

}  // namespace sticky
