#include "sticky/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace sticky {

QuadratureSpec QuadratureSpec::coarsened() const {
  QuadratureSpec c = *this;
  c.angular = std::max(8, angular / 2);
  c.polar = std::max(4, polar / 2);
  c.radial = std::max(4, radial / 2);
  return c;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[static_cast<std::size_t>(i)] = -x;
    nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    weights[static_cast<std::size_t>(i)] = w;
    weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
}

namespace {

void add_ray(const DomainGeometry& geom, const Vec& dir, double dir_weight, const std::vector<double>& gx,
             const std::vector<double>& gw, QuadratureRule& rule) {
  const int d = geom.dim();
  const double R = geom.ray_radius(dir);
  for (std::size_t k = 0; k < gx.size(); ++k) {
    const double r = 0.5 * R * (gx[k] + 1.0);
    const double w = 0.5 * R * gw[k] * std::pow(r, d - 1) * dir_weight;
    rule.volume.push_back({geom.center() + r * dir, w});
  }
  const Vec xb = geom.center() + R * dir;
  const double cos_angle = dir.dot(geom.normal_field(xb));
  if (cos_angle <= 0.0) throw ValidationError("domain is not star-shaped about its center");
  const double jac = std::pow(R, d - 1) / cos_angle;
  rule.surface_jacobian_max = std::max(rule.surface_jacobian_max, jac);
  rule.surface.push_back({xb, jac * dir_weight});
}

}  // namespace

QuadratureRule build_quadrature(const DomainGeometry& geom, const QuadratureSpec& spec) {
  QuadratureRule rule;
  std::vector<double> gx, gw;
  gauss_legendre(spec.radial, gx, gw);
  const int d = geom.dim();

  if (d == 1) {
    const auto [a, b] = geom.interval();
    for (std::size_t k = 0; k < gx.size(); ++k) {
      Vec x(1);
      x[0] = 0.5 * (a + b) + 0.5 * (b - a) * gx[k];
      rule.volume.push_back({x, 0.5 * (b - a) * gw[k]});
    }
    Vec xa(1), xb(1);
    xa[0] = a;
    xb[0] = b;
    rule.surface.push_back({xa, 1.0});
    rule.surface.push_back({xb, 1.0});
    rule.surface_jacobian_max = 1.0;
    return rule;
  }

  if (d == 2) {
    const int m = spec.angular;
    for (int k = 0; k < m; ++k) {
      const double th = 2.0 * std::numbers::pi * (k + 0.5) / m;
      Vec dir(2);
      dir << std::cos(th), std::sin(th);
      add_ray(geom, dir, 2.0 * std::numbers::pi / m, gx, gw, rule);
    }
    return rule;
  }

  std::vector<double> cx, cw;
  gauss_legendre(spec.polar, cx, cw);
  const int m = spec.angular;
  for (std::size_t i = 0; i < cx.size(); ++i) {
    const double ct = cx[i];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (int k = 0; k < m; ++k) {
      const double ph = 2.0 * std::numbers::pi * (k + 0.5) / m;
      Vec dir(3);
      dir << st * std::cos(ph), st * std::sin(ph), ct;
      add_ray(geom, dir, cw[i] * 2.0 * std::numbers::pi / m, gx, gw, rule);
    }
  }
  return rule;
}

}  // namespace sticky
