#pragma once

#include "spheresteer/geom3d.hpp"

namespace spheresteer {

/// A point x ∈ ℝ³ lifted to (x₁, x₂, x₃, −1, −½‖x‖²).
struct EmbeddedPoint {
  Vec5 v;
};

/// Raw sphere parameters (s₁..s₅). Normalized spheres have s₅ = 1 and read
/// (c₁, c₂, c₃, ½(‖c‖² − r²), 1).
struct Sphere {
  Vec5 v;

  friend bool operator==(const Sphere& a, const Sphere& b) { return a.v == b.v; }
};

/// Center and squared radius of a normalized sphere. `radius_sq` is negative
/// for imaginary spheres.
struct SphereGeometry {
  Vec3 center;
  double radius_sq;
};

struct NormalizedSphere {
  double gamma;
  Sphere sphere;
};

EmbeddedPoint embed_point(const Vec3& x);

Sphere sphere_from_geometry(const Vec3& center, double radius);

/// Plain 5D dot product. For a normalized sphere this is −½‖x − c‖² + ½r².
inline double activation(const EmbeddedPoint& x, const Sphere& s) { return x.v.dot(s.v); }

/// Scale threshold below which a sphere counts as a plane: 1e-9·max(1, ‖(s₁..s₄)‖).
double min_gamma(const Sphere& s);

/// Splits off γ = s₅. Throws DegenerateScale when |s₅| ≤ min_gamma(s).
NormalizedSphere normalize_sphere(const Sphere& s);

/// Geometry of a normalized sphere (s₅ assumed 1).
SphereGeometry sphere_geometry(const Sphere& normalized);

inline EmbeddedPoint rotate(const Rotation5& r, const EmbeddedPoint& x) { return {r.apply(x.v)}; }
inline Sphere rotate(const Rotation5& r, const Sphere& s) { return {r.apply(s.v)}; }

}  // namespace spheresteer
