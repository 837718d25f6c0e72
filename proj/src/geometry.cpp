#include "sticky/geometry.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <vector>

namespace sticky {

namespace {

// Σ ((x_i − c_i)/a_i)² − 1: intervals, disks, balls, ellipses, ellipsoids.
class QuadricField final : public ScalarField {
 public:
  QuadricField(Vec center, Vec semi_axes) : c_(std::move(center)), inv2_(semi_axes.array().square().inverse()) {}
  int dim() const override { return static_cast<int>(c_.size()); }
  double value(const Vec& x) const override {
    return ((x - c_).array().square() * inv2_.array()).sum() - 1.0;
  }
  Vec gradient(const Vec& x) const override { return 2.0 * ((x - c_).array() * inv2_.array()).matrix(); }
  Mat hessian(const Vec&) const override { return Mat((2.0 * inv2_).asDiagonal()); }
  std::string describe() const override {
    std::string s = "quadric";
    for (Eigen::Index i = 0; i < c_.size(); ++i) s += fmt::format(" ({:g}, {:g})", c_[i], 1.0 / std::sqrt(inv2_[i]));
    return s;
  }

 private:
  Vec c_;
  Vec inv2_;
};

// r log Σ_i (exp((x_i − 1)/r) + exp((−x_i − 1)/r)): a box [−1,1]^d with
// edges rounded at scale r. Always ≥ max_i |x_i| − 1.
class SmoothBoxField final : public ScalarField {
 public:
  SmoothBoxField(double r, int dim) : r_(r), dim_(dim) {}
  int dim() const override { return dim_; }

  double value(const Vec& x) const override {
    double m;
    const auto terms = args(x, m);
    double s = 0.0;
    for (double t : terms) s += std::exp((t - m) / r_);
    return m + r_ * std::log(s);
  }

  Vec gradient(const Vec& x) const override {
    Vec g;
    Mat h;
    derivs(x, g, h);
    return g;
  }

  Mat hessian(const Vec& x) const override {
    Vec g;
    Mat h;
    derivs(x, g, h);
    return h;
  }

  std::string describe() const override { return fmt::format("smoothbox(r={:g}, d={})", r_, dim_); }

 private:
  std::vector<double> args(const Vec& x, double& m) const {
    std::vector<double> t(static_cast<std::size_t>(2 * dim_));
    m = -1e300;
    for (int i = 0; i < dim_; ++i) {
      t[static_cast<std::size_t>(2 * i)] = x[i] - 1.0;
      t[static_cast<std::size_t>(2 * i + 1)] = -x[i] - 1.0;
      m = std::max({m, x[i] - 1.0, -x[i] - 1.0});
    }
    return t;
  }

  void derivs(const Vec& x, Vec& g, Mat& h) const {
    double m;
    const auto t = args(x, m);
    std::vector<double> w(t.size());
    double s = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) s += (w[k] = std::exp((t[k] - m) / r_));
    g = Vec::Zero(dim_);
    Mat outer = Mat::Zero(dim_, dim_);
    for (int i = 0; i < dim_; ++i) {
      const double wp = w[static_cast<std::size_t>(2 * i)] / s;
      const double wm = w[static_cast<std::size_t>(2 * i + 1)] / s;
      g[i] = wp - wm;
      outer(i, i) = wp + wm;
    }
    h = (outer - g * g.transpose()) / r_;
  }

  double r_;
  int dim_;
};

double norm_or_throw(const Vec& g, const GeometryTolerances& tol) {
  const double gn = g.norm();
  if (gn < tol.grad_floor) throw DegenerateGradient(fmt::format("|grad F| = {:.3e} below floor", gn));
  return gn;
}

void require_on_boundary(const DomainGeometry& geom, const Vec& x) {
  const double f = geom.level(x);
  if (std::abs(f) > geom.tolerances().boundary)
    throw NotOnBoundary(fmt::format("|F(x)| = {:.3e} exceeds boundary tolerance {:.3e}", std::abs(f),
                                    geom.tolerances().boundary));
}

std::vector<double> parse_args(std::string_view spec, std::string_view head) {
  std::vector<double> out;
  if (spec.size() == head.size()) return out;
  if (spec[head.size()] != '(' || spec.back() != ')')
    throw ParseError(fmt::format("malformed surface '{}'", spec), 1, static_cast<int>(head.size()) + 1);
  std::string_view inner = spec.substr(head.size() + 1, spec.size() - head.size() - 2);
  std::size_t pos = 0;
  while (pos <= inner.size()) {
    const std::size_t comma = std::min(inner.find(',', pos), inner.size());
    std::string token(inner.substr(pos, comma - pos));
    token.erase(std::remove_if(token.begin(), token.end(), ::isspace), token.end());
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (token.empty() || *end != '\0')
      throw ParseError(fmt::format("bad numeric argument '{}' in '{}'", token, spec), 1,
                       static_cast<int>(head.size() + 2 + pos));
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

GeometryPtr quadric(Vec center, Vec axes, std::string name) {
  const int d = static_cast<int>(center.size());
  for (int i = 0; i < d; ++i)
    if (!(axes[i] > 0.0)) throw ParseError(fmt::format("non-positive extent in '{}'", name), 1, 1);
  auto field = std::make_shared<QuadricField>(center, axes);
  return std::make_shared<DomainGeometry>(field, center - axes, center + axes, std::move(name), center);
}

}  // namespace

// -------------------------------------------------------------------------

DomainGeometry::DomainGeometry(FieldPtr level, Vec bbox_lo, Vec bbox_hi, std::string name, Vec center)
    : level_(std::move(level)),
      lo_(std::move(bbox_lo)),
      hi_(std::move(bbox_hi)),
      center_(std::move(center)),
      name_(std::move(name)),
      dim_(level_->dim()) {
  if (dim_ < 1 || dim_ > kMaxDim) throw ValidationError(fmt::format("dimension {} not supported", dim_));
  if (lo_.size() != dim_ || hi_.size() != dim_ || center_.size() != dim_)
    throw ValidationError("bounding box / center dimension mismatch");
  if ((hi_.array() <= lo_.array()).any()) throw ValidationError("empty bounding box");
  const double diam = diameter();
  tol_.boundary = 1e-9 * diam;
  tol_.fd_step = 1e-4 * diam;
  tol_.projection_basin = 0.25 * diam;
  if (dim_ == 1) {
    Vec dir(1);
    dir[0] = -1.0;
    ends_.first = center_[0] - ray_radius(dir);
    dir[0] = 1.0;
    ends_.second = center_[0] + ray_radius(dir);
  }
}

std::shared_ptr<const DomainGeometry> DomainGeometry::with_tolerances(const GeometryTolerances& tol) const {
  auto copy = std::make_shared<DomainGeometry>(*this);
  if (tol.boundary > 0) copy->tol_.boundary = tol.boundary;
  if (tol.fd_step > 0) copy->tol_.fd_step = tol.fd_step;
  if (tol.grad_floor > 0) copy->tol_.grad_floor = tol.grad_floor;
  if (tol.projection_basin > 0) copy->tol_.projection_basin = tol.projection_basin;
  if (tol.max_newton > 0) copy->tol_.max_newton = tol.max_newton;
  return copy;
}

std::pair<double, double> DomainGeometry::interval() const {
  if (dim_ != 1) throw ValidationError("interval() requires d = 1");
  return ends_;
}

double DomainGeometry::ray_radius(const Vec& dir) const {
  auto along = [&](double t) -> double { return level(center_ + t * dir); };
  if (along(0.0) >= 0.0) throw ValidationError("star center is not inside the domain");
  const double reach = diameter();
  // March outwards to bracket the first sign change, then bisect.
  const int n = 64;
  double lo = 0.0;
  double hi = -1.0;
  for (int k = 1; k <= n; ++k) {
    const double t = reach * k / n;
    if (along(t) >= 0.0) {
      hi = t;
      break;
    }
    lo = t;
  }
  if (hi < 0.0) throw ValidationError("ray does not leave the bounding box");
  for (int it = 0; it < 200 && hi - lo > 1e-15 * reach; ++it) {
    const double mid = 0.5 * (lo + hi);
    (along(mid) < 0.0 ? lo : hi) = mid;
  }
  // Polish with Newton along the ray.
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 3; ++it) {
    const Vec p = center_ + t * dir;
    const double slope = level_gradient(p).dot(dir);
    if (std::abs(slope) < tol_.grad_floor) break;
    const double next = t - level(p) / slope;
    if (next < lo || next > hi) break;
    t = next;
  }
  return t;
}

Vec DomainGeometry::normal_field(const Vec& x) const {
  const Vec g = level_gradient(x);
  return g / norm_or_throw(g, tol_);
}

Mat DomainGeometry::projection_field(const Vec& x) const {
  const Vec n = normal_field(x);
  return Mat::Identity(dim_, dim_) - n * n.transpose();
}

double DomainGeometry::curvature_field(const Vec& x) const {
  if (dim_ == 1) return 0.0;
  const Vec g = level_gradient(x);
  const double gn = norm_or_throw(g, tol_);
  const Vec n = g / gn;
  const Mat H = level_hessian(x);
  // Tr(P H)/|∇F| with P = E − n nᵀ.
  return (H.trace() - n.dot(H * n)) / gn;
}

// -------------------------------------------------------------------------

Vec outward_normal(const DomainGeometry& geom, const Vec& x) {
  require_on_boundary(geom, x);
  return geom.normal_field(x);
}

Mat tangent_projection(const DomainGeometry& geom, const Vec& x) {
  require_on_boundary(geom, x);
  return geom.projection_field(x);
}

double mean_curvature(const DomainGeometry& geom, const Vec& x) {
  require_on_boundary(geom, x);
  return geom.curvature_field(x);
}

BoundaryFrame boundary_frame(const DomainGeometry& geom, const Vec& x) {
  require_on_boundary(geom, x);
  BoundaryFrame f;
  f.point = x;
  f.normal = geom.normal_field(x);
  f.projection = Mat::Identity(geom.dim(), geom.dim()) - f.normal * f.normal.transpose();
  f.curvature = geom.curvature_field(x);
  return f;
}

Vec surface_gradient(const DomainGeometry& geom, const ScalarField& f, const Vec& x) {
  return tangent_projection(geom, x) * f.gradient(x);
}

double laplace_beltrami(const DomainGeometry& geom, const ScalarField& f, const Vec& x) {
  const BoundaryFrame fr = boundary_frame(geom, x);
  return (fr.projection * f.hessian(x)).trace() - fr.curvature * fr.normal.dot(f.gradient(x));
}

Vec curvature_identity_residual(const DomainGeometry& geom, const Vec& x, double h) {
  require_on_boundary(geom, x);
  if (h <= 0.0) h = geom.tolerances().fd_step;
  const int d = geom.dim();
  const Mat P = geom.projection_field(x);
  // dP[j] = ∂_j P by central differences.
  std::vector<Mat> dP(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    dP[static_cast<std::size_t>(j)] = (geom.projection_field(xp) - geom.projection_field(xm)) / (2.0 * h);
  }
  Vec r = Vec::Zero(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) r[i] += P(j, k) * dP[static_cast<std::size_t>(j)](i, k);
  return r + geom.curvature_field(x) * geom.normal_field(x);
}

double fd_mean_curvature(const DomainGeometry& geom, const Vec& x, double h) {
  require_on_boundary(geom, x);
  if (h <= 0.0) h = geom.tolerances().fd_step;
  const int d = geom.dim();
  if (d == 1) return 0.0;
  Mat J(d, d);  // J(i, j) = ∂_j n_i
  for (int j = 0; j < d; ++j) {
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    J.col(j) = (geom.normal_field(xp) - geom.normal_field(xm)) / (2.0 * h);
  }
  return (geom.projection_field(x) * J).trace();
}

Vec project_to_boundary(const DomainGeometry& geom, const Vec& x) {
  const auto& tol = geom.tolerances();
  const double target = 1e-3 * tol.boundary;
  Vec y = x;
  for (int it = 0; it <= tol.max_newton; ++it) {
    const double f = geom.level(y);
    if (std::abs(f) <= target) return y;
    if (it == tol.max_newton) break;
    const Vec g = geom.level_gradient(y);
    const double g2 = g.squaredNorm();
    if (g2 < tol.grad_floor * tol.grad_floor)
      throw ProjectionDiverged("degenerate gradient during boundary projection");
    const double dist = std::abs(f) / std::sqrt(g2);
    if (dist > tol.projection_basin)
      throw ProjectionDiverged(fmt::format("point {:.3e} away from boundary, outside projection basin", dist));
    y -= (f / g2) * g;
  }
  throw ProjectionDiverged(fmt::format("no convergence after {} Newton steps", tol.max_newton));
}

GeometryPtr make_zoo_geometry(std::string_view spec) {
  auto head_is = [&](std::string_view head) {
    return spec.substr(0, head.size()) == head && (spec.size() == head.size() || spec[head.size()] == '(');
  };
  auto vec = [](std::initializer_list<double> xs) {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
  };
  const std::string name(spec);

  if (head_is("interval")) {
    const auto a = parse_args(spec, "interval");
    double lo = 0.0, hi = 1.0;
    if (a.size() == 1) hi = a[0];
    else if (a.size() == 2) lo = a[0], hi = a[1];
    else if (!a.empty()) throw ParseError("interval takes at most two arguments", 1, 1);
    if (!(hi > lo)) throw ParseError("interval requires a < b", 1, 1);
    return quadric(vec({0.5 * (lo + hi)}), vec({0.5 * (hi - lo)}), name);
  }
  if (head_is("disk")) {
    const auto a = parse_args(spec, "disk");
    const double r = a.empty() ? 1.0 : a.at(0);
    return quadric(vec({0, 0}), vec({r, r}), name);
  }
  if (head_is("ball3")) {
    const auto a = parse_args(spec, "ball3");
    const double r = a.empty() ? 1.0 : a.at(0);
    return quadric(vec({0, 0, 0}), vec({r, r, r}), name);
  }
  if (head_is("ellipse")) {
    const auto a = parse_args(spec, "ellipse");
    if (a.size() != 2) throw ParseError("ellipse(a,b) takes two arguments", 1, 1);
    return quadric(vec({0, 0}), vec({a[0], a[1]}), name);
  }
  if (head_is("ellipsoid")) {
    const auto a = parse_args(spec, "ellipsoid");
    if (a.size() != 3) throw ParseError("ellipsoid(a,b,c) takes three arguments", 1, 1);
    return quadric(vec({0, 0, 0}), vec({a[0], a[1], a[2]}), name);
  }
  if (head_is("smoothbox")) {
    const auto a = parse_args(spec, "smoothbox");
    if (a.empty() || a.size() > 2) throw ParseError("smoothbox(r[,d]) takes one or two arguments", 1, 1);
    const double r = a[0];
    const int d = a.size() == 2 ? static_cast<int>(a[1]) : 3;
    if (d < 2 || d > kMaxDim) throw ParseError("smoothbox dimension must be 2 or 3", 1, 1);
    if (!(r > 0.0) || r * std::log(2.0 * d) >= 1.0)
      throw ParseError("smoothbox rounding r must satisfy 0 < r log(2d) < 1", 1, 1);
    auto field = std::make_shared<SmoothBoxField>(r, d);
    return std::make_shared<DomainGeometry>(field, Vec::Constant(d, -1.0), Vec::Constant(d, 1.0), name,
                                            Vec::Zero(d));
  }
  throw ParseError(fmt::format("unknown surface '{}'", spec), 1, 1);
}

GeometryPtr make_expression_geometry(std::string_view level, int dim, const Vec& bbox_lo, const Vec& bbox_hi,
                                     std::optional<Vec> center) {
  auto field = expression_field(level, dim);
  Vec c = center ? *center : Vec(0.5 * (bbox_lo + bbox_hi));
  return std::make_shared<DomainGeometry>(field, bbox_lo, bbox_hi, std::string(level), c);
}

}  // namespace sticky
