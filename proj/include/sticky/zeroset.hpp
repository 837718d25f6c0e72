#pragma once

#include "sticky/geometry.hpp"

#include <string>
#include <vector>

namespace sticky {

/// One primitive of a declared {ϱ = 0} set.
struct ZeroPrimitive {
  enum class Kind { kPoint, kPlane, kSphere };
  Kind kind = Kind::kPoint;
  Vec center;       ///< point / sphere center
  Vec normal;       ///< plane normal (unit)
  double offset = 0.0;  ///< plane: {x : (normal, x) = offset}
  double radius = 0.0;  ///< sphere radius

  double distance(const Vec& x) const;
  /// Side of a separating primitive (+1/−1); 0 for points in d ≥ 2.
  int side(const Vec& x) const;
  std::string describe() const;
};

struct ZeroSet {
  std::vector<ZeroPrimitive> primitives;

  bool empty() const noexcept { return primitives.empty(); }
  double distance(const Vec& x) const;
};

/// Connected components of Ω̄ minus a declared zero set, found by flood fill
/// on a regular grid over the bounding box. Points are first split by the
/// sides of every separating primitive, then grid connectivity merges cells.
class ComponentMap {
 public:
  ComponentMap(const DomainGeometry& geom, const ZeroSet& zeros, int cells_per_axis = 0);

  /// Component id of x, or −1 on the zero set / outside Ω̄.
  int component_of(const Vec& x) const;
  int count() const noexcept { return count_; }

 private:
  long cell_index(const Vec& x) const;
  std::vector<int> signature(const Vec& x) const;

  const DomainGeometry* geom_;
  ZeroSet zeros_;
  int n_;
  int dim_;
  Vec lo_, h_;
  std::vector<int> label_;
  std::vector<std::vector<int>> signatures_;  ///< signature per component
  int count_ = 0;
};

}  // namespace sticky
