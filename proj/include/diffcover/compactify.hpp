#pragma once

// Compactification models with concrete extended coordinates:
//
//   one_point          R^n cup {Delta}; cone coordinates (rho, rho(1-rho) x^)
//                      with rho = (2/pi) atan|x|, Delta = (1, 0). All
//                      directions collapse as rho -> 1; distance to Delta
//                      scales like pi/2 - atan|x|.
//   sphere_at_infinity R^n cup S^{n-1}; open-ball coordinates x/(1+|x|).
//                      Escaping sequences converge to their limit direction.
//   cylinder_ends      R x S^1 with a circle added at each end; coordinates
//                      (a/(1+|a|), cos theta, sin theta).
//
// The radial maps are rational rather than tanh so they stay strictly
// monotone in double precision out to huge radii. The extended metric is
// Euclidean on the embedded coordinates.

#include <cmath>
#include <stdexcept>

#include "diffcover/linalg.hpp"

namespace diffcover {

enum class CompactKind { kOnePoint, kSphereAtInfinity, kCylinderEnds };

inline const char* to_string(CompactKind k) {
  switch (k) {
    case CompactKind::kOnePoint: return "one_point";
    case CompactKind::kSphereAtInfinity: return "sphere_at_infinity";
    case CompactKind::kCylinderEnds: return "cylinder_ends";
  }
  return "?";
}

struct Compactification {
  CompactKind kind = CompactKind::kOnePoint;
  int dim = 0;      // coordinates of M
  int ext_dim = 0;  // coordinates of the extended space

  static Compactification one_point(int n) {
    return {CompactKind::kOnePoint, n, n + 1};
  }
  static Compactification sphere_at_infinity(int n) {
    return {CompactKind::kSphereAtInfinity, n, n};
  }
  // M = R x S^1 as (axial, angle) pairs.
  static Compactification cylinder_ends() {
    return {CompactKind::kCylinderEnds, 2, 3};
  }

  Vec embed(const Vec& x) const {
    if (!x.all_finite())
      throw std::invalid_argument("compactify: non-finite point");
    switch (kind) {
      case CompactKind::kOnePoint: {
        double r = x.norm();
        double rho = (2.0 / M_PI) * std::atan(r);
        Vec e = Vec::zero(dim + 1);
        e[0] = rho;
        if (r > 0.0) {
          double w = rho * (1.0 - rho) / r;
          for (int i = 0; i < dim; ++i) e[i + 1] = w * x[i];
        }
        return e;
      }
      case CompactKind::kSphereAtInfinity:
        return x * (1.0 / (1.0 + x.norm()));
      case CompactKind::kCylinderEnds: {
        double a = x[0], th = x[1];
        return Vec{a / (1.0 + std::abs(a)), std::cos(th), std::sin(th)};
      }
    }
    return Vec{};
  }

  double metric(const Vec& a, const Vec& b) const { return (a - b).norm(); }

  // The boundary point approached along the escape route through x:
  // Delta for one_point, the limit direction for the sphere model, the
  // matching end circle point for the cylinder.
  Vec boundary_limit(const Vec& x) const {
    switch (kind) {
      case CompactKind::kOnePoint:
        return delta();
      case CompactKind::kSphereAtInfinity:
        return x.normalized();
      case CompactKind::kCylinderEnds:
        return Vec{x[0] >= 0.0 ? 1.0 : -1.0, std::cos(x[1]), std::sin(x[1])};
    }
    return Vec{};
  }

  // The added point of the one-point model.
  Vec delta() const {
    if (kind != CompactKind::kOnePoint)
      throw std::invalid_argument("delta: only defined for one_point");
    Vec e = Vec::zero(dim + 1);
    e[0] = 1.0;
    return e;
  }

  bool is_boundary(const Vec& ext, double tol = 1e-9) const {
    switch (kind) {
      case CompactKind::kOnePoint: return ext[0] >= 1.0 - tol;
      case CompactKind::kSphereAtInfinity: return ext.norm() >= 1.0 - tol;
      case CompactKind::kCylinderEnds: return std::abs(ext[0]) >= 1.0 - tol;
    }
    return false;
  }
};

inline Vec compactify(const Vec& x, const Compactification& model) {
  return model.embed(x);
}

}  // namespace diffcover
