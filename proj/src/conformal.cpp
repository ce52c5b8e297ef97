#include "spheresteer/conformal.hpp"

#include "spheresteer/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spheresteer {

EmbeddedPoint embed_point(const Vec3& x) {
  Vec5 v;
  v << x.x(), x.y(), x.z(), -1.0, -0.5 * x.squaredNorm();
  return {v};
}

Sphere sphere_from_geometry(const Vec3& center, double radius) {
  Vec5 v;
  v << center.x(), center.y(), center.z(), 0.5 * (center.squaredNorm() - radius * radius), 1.0;
  return {v};
}

double min_gamma(const Sphere& s) {
  return 1e-9 * std::max(1.0, s.v.head<4>().norm());
}

NormalizedSphere normalize_sphere(const Sphere& s) {
  const double gamma = s.v[4];
  if (!(std::abs(gamma) > min_gamma(s))) {
    std::ostringstream msg;
    msg << "sphere scale " << gamma << " is below " << min_gamma(s)
        << " (the classifier is a plane)";
    throw Error(ErrorCode::DegenerateScale, msg.str());
  }
  Vec5 v = s.v / gamma;
  v[4] = 1.0;
  return {gamma, Sphere{v}};
}

SphereGeometry sphere_geometry(const Sphere& normalized) {
  const Vec3 c = normalized.v.head<3>() / normalized.v[4];
  return {c, c.squaredNorm() - 2.0 * normalized.v[3] / normalized.v[4]};
}

}  // namespace spheresteer
