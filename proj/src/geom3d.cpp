#include "spheresteer/geom3d.hpp"

#include "spheresteer/error.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace spheresteer {

namespace {

Mat3 cross_matrix(const Vec3& v) {
  Mat3 k;
  k << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return k;
}

}  // namespace

double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Rotation3 Rotation3::from_matrix(const Mat3& m) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::InvalidRotation, "matrix has non-finite entries");
  }
  const double ortho = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = m.determinant();
  if (ortho > kRotationTolerance || std::abs(det - 1.0) > kRotationTolerance) {
    std::ostringstream msg;
    msg << "not in SO(3): max|mᵀm - I| = " << ortho << ", det = " << det;
    throw Error(ErrorCode::InvalidRotation, msg.str());
  }
  return Rotation3(m, Unchecked{});
}

Rotation3 Rotation3::about_axis(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (!(n > kDirectionEpsilon)) {
    throw Error(ErrorCode::DegenerateDirection, "rotation axis has zero length");
  }
  const Mat3 k = cross_matrix(axis / n);
  const Mat3 m = Mat3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * (k * k);
  return Rotation3(m, Unchecked{});
}

Rotation4::Rotation4(const Rotation3& r) : m_(Mat4::Identity()) {
  m_.topLeftCorner<3, 3>() = r.matrix();
}

Rotation5::Rotation5(const Rotation3& r) : m_(Mat5::Identity()) {
  m_.topLeftCorner<3, 3>() = r.matrix();
}

Rotation4 lift4(const Rotation3& r) { return Rotation4(r); }
Rotation5 lift5(const Rotation3& r) { return Rotation5(r); }

Rotation3 geodesic_rotation(const Vec3& from, const Vec3& to) {
  const double nf = from.norm();
  const double nt = to.norm();
  if (!(nf > kDirectionEpsilon) || !(nt > kDirectionEpsilon)) {
    throw Error(ErrorCode::DegenerateDirection, "geodesic rotation needs two non-zero directions");
  }
  const Vec3 a = from / nf;
  const Vec3 b = to / nt;
  const Vec3 v = a.cross(b);
  const double s = v.norm();
  const double c = a.dot(b);

  if (c < 0.0 && s <= kDirectionEpsilon) {
    // Antiparallel: half turn about an axis orthogonal to `a`.
    Eigen::Index least = 0;
    a.cwiseAbs().minCoeff(&least);
    const Vec3 axis = a.cross(Vec3::Unit(least)).normalized();
    return Rotation3::from_matrix(2.0 * axis * axis.transpose() - Mat3::Identity());
  }

  const Mat3 k = cross_matrix(v);
  Mat3 m;
  if (c >= 0.0) {
    // Rodrigues with sinθ = s and (1 - cosθ)/s² = 1/(1 + c); exact at s = 0.
    m = Mat3::Identity() + k + (k * k) / (1.0 + c);
  } else {
    const double angle = std::atan2(s, c);
    const Mat3 ku = k / s;
    m = Mat3::Identity() + std::sin(angle) * ku + (1.0 - std::cos(angle)) * (ku * ku);
  }
  return Rotation3::from_matrix(m);
}

Rotation3 sample_rotation(Rng& rng) {
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  const double u3 = uniform01(rng);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  const Eigen::Quaterniond q(b * std::cos(two_pi * u3), a * std::sin(two_pi * u2),
                             a * std::cos(two_pi * u2), b * std::sin(two_pi * u3));
  return Rotation3::from_matrix(q.normalized().toRotationMatrix());
}

PointCloud rotate_cloud(const Rotation3& r, std::span<const Vec3> points) {
  PointCloud out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(r.apply(p));
  return out;
}

}  // namespace spheresteer
