#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace spheresteer {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat5 = Eigen::Matrix<double, 5, 5>;

using PointCloud = std::vector<Vec3>;

// All sampling in the library goes through this engine so that a seed fully
// determines every experiment on any platform.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of one engine draw.
double uniform01(Rng& rng);

/// Degeneracy threshold for directions and anchor triangles, in dataset units.
inline constexpr double kDirectionEpsilon = 1e-9;

/// Tolerance used to validate orthogonality and determinant of rotations.
inline constexpr double kRotationTolerance = 1e-12;

/// An element of SO(3). Construction validates mᵀm = I and det m = +1.
class Rotation3 {
 public:
  Rotation3() : m_(Mat3::Identity()) {}

  static Rotation3 identity() { return Rotation3(); }

  /// Throws InvalidRotation when `m` is not special orthogonal to tolerance.
  static Rotation3 from_matrix(const Mat3& m);

  /// Right-handed rotation by `angle` radians about `axis` (normalized here).
  static Rotation3 about_axis(const Vec3& axis, double angle);

  const Mat3& matrix() const noexcept { return m_; }
  Rotation3 transpose() const { return Rotation3(m_.transpose(), Unchecked{}); }
  Vec3 apply(const Vec3& x) const { return m_ * x; }

  friend Rotation3 operator*(const Rotation3& a, const Rotation3& b) {
    return Rotation3(a.m_ * b.m_, Unchecked{});
  }
  friend bool operator==(const Rotation3& a, const Rotation3& b) { return a.m_ == b.m_; }

 private:
  struct Unchecked {};
  Rotation3(const Mat3& m, Unchecked) : m_(m) {}

  Mat3 m_;
};

/// Projective (homogeneous) representation diag(R, 1).
class Rotation4 {
 public:
  explicit Rotation4(const Rotation3& r);
  const Mat4& matrix() const noexcept { return m_; }

 private:
  Mat4 m_;
};

/// Conformal representation diag(R, 1, 1) acting on embedded points and spheres.
class Rotation5 {
 public:
  explicit Rotation5(const Rotation3& r);
  const Mat5& matrix() const noexcept { return m_; }
  Vec5 apply(const Vec5& v) const { return m_ * v; }

 private:
  Mat5 m_;
};

Rotation4 lift4(const Rotation3& r);
Rotation5 lift5(const Rotation3& r);

/// Minimal-angle rotation taking the direction of `from` onto the direction of `to`.
///
/// Antiparallel inputs rotate by π about `from × e`, where `e` is the standard
/// basis vector least aligned with `from` (lowest index on ties).
/// Throws DegenerateDirection if either norm is at most kDirectionEpsilon.
Rotation3 geodesic_rotation(const Vec3& from, const Vec3& to);

/// Haar-uniform rotation from a uniformly sampled unit quaternion.
Rotation3 sample_rotation(Rng& rng);

PointCloud rotate_cloud(const Rotation3& r, std::span<const Vec3> points);

}  // namespace spheresteer
