#pragma once

#include "sticky/geometry.hpp"

#include <vector>

namespace sticky {

struct QuadNode {
  Vec x;
  double w = 0.0;
};

/// Node counts for the radial rules. `angular` is the number of θ (d = 2) or
/// φ (d = 3) trapezoid nodes, `polar` the Gauss–Legendre nodes in cos θ
/// (d = 3 only), `radial` the Gauss–Legendre nodes along each ray (or on the
/// interval when d = 1).
struct QuadratureSpec {
  int angular = 256;
  int polar = 64;
  int radial = 48;
  double rel_tol = 1e-6;  ///< coarse/fine disagreement tolerated by mu_masses

  QuadratureSpec coarsened() const;
};

/// Volume nodes integrate against λ on Ω, surface nodes against σ on Γ
/// (counting measure on the two endpoints when d = 1).
struct QuadratureRule {
  std::vector<QuadNode> volume;
  std::vector<QuadNode> surface;
  /// Largest R^{d−1}/(ω·n) over the surface nodes: the density of σ with
  /// respect to the direction measure dω, used as a sampling envelope.
  double surface_jacobian_max = 0.0;
};

/// Gauss–Legendre nodes and weights on [−1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Radial rule about geom.center(); requires a star-shaped domain. Angular
/// nodes sit at half steps, so coordinate planes through the center carry no
/// nodes.
QuadratureRule build_quadrature(const DomainGeometry& geom, const QuadratureSpec& spec);

}  // namespace sticky
