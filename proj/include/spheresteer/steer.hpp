#pragma once

#include "spheresteer/conformal.hpp"
#include "spheresteer/mlgp.hpp"

#include <array>
#include <memory>
#include <span>
#include <vector>

namespace spheresteer {

using BankMatrix = Eigen::Matrix<double, 4, 5>;

/// Regular-tetrahedron basis. `matrix` holds the homogeneous vertex
/// coordinates ½(vertex, 1) column-wise and is orthogonal; its first column
/// is m₁ = (½, ½, ½, ½).
struct TetraBasis {
  Mat4 matrix;
  std::array<Vec3, 4> vertices;

  static const TetraBasis& canonical();

  Vec4 m1() const { return matrix.col(0); }
};

/// Geodesic rotation from (1,1,1) to tetrahedron vertex i + 1; identity for i = 0.
/// Throws InvalidArgument for i > 3.
Rotation3 tetra_rotation(std::size_t i);

/// Four tetrahedron-rotated copies of one normalized sphere.
///
/// Row i is lift5(R_Oᵀ R_Ti R_O)·S where R_O takes the sphere center direction
/// onto (1,1,1). Origin-centered spheres (‖c‖ ≤ kDirectionEpsilon) use R_O = I,
/// and all four rows coincide.
struct FilterBank {
  BankMatrix rows;
  Rotation3 origin_rotation;
  std::array<Rotation3, 4> tetra_rotations;
  double gamma = 1.0;

  Sphere normalized_source() const { return {rows.row(0).transpose()}; }

  friend bool operator==(const FilterBank&, const FilterBank&) = default;
};

/// Throws DegenerateScale (from normalize_sphere) for plane-like spheres.
FilterBank build_filter_bank(const Sphere& raw);

/// y = B·X, equivariant to rotations of the input point.
inline Vec4 bank_forward(const FilterBank& bank, const EmbeddedPoint& x) { return bank.rows * x.v; }

/// V_R = Mᵀ·lift4(R_O)·lift4(R)·lift4(R_O)ᵀ·M, the representation of R in the
/// bank output space.
Mat4 rotation_rep(const FilterBank& bank, const Rotation3& r,
                  const TetraBasis& basis = TetraBasis::canonical());

/// Inverse of rotation_rep: upper-left 3×3 block of R_Oᵀ·M·V·Mᵀ·R_O.
Mat3 rotation_from_rep(const FilterBank& bank, const Mat4& v,
                       const TetraBasis& basis = TetraBasis::canonical());

/// v(R) = Mᵀ·(lift4(R_O)·lift4(R)·lift4(R_O)ᵀ·m₁), the first column of V_R.
Vec4 interp_coeffs(const FilterBank& bank, const Rotation3& r,
                   const TetraBasis& basis = TetraBasis::canonical());

/// γ·⟨v, B·X_rot⟩: the steered response of one raw sphere.
inline double steer_activation(const FilterBank& bank, double gamma, const Vec4& v,
                               const EmbeddedPoint& x_rot) {
  return gamma * v.dot(bank_forward(bank, x_rot));
}

/// Steerable counterpart of a frozen ancestor MLGP. Banks are shared and
/// immutable; only the interpolation coefficients change with the rotation.
class SteerableModel {
 public:
  using BankGrid = std::vector<std::vector<FilterBank>>;  // [hidden unit][point]
  using CoeffGrid = std::vector<std::vector<Vec4>>;

  SteerableModel(std::shared_ptr<const BankGrid> banks, OutputLayer output, CoeffGrid coeffs,
                 std::string units);

  const BankGrid& banks() const { return *banks_; }
  const FilterBank& bank(std::size_t h, std::size_t k) const { return (*banks_)[h][k]; }
  double gamma(std::size_t h, std::size_t k) const { return bank(h, k).gamma; }
  const OutputLayer& output() const { return output_; }
  const CoeffGrid& coeffs() const { return coeffs_; }
  const std::string& units() const { return units_; }

  std::size_t hidden_units() const { return banks_->size(); }
  std::size_t points_per_shape() const { return banks_->empty() ? 0 : banks_->front().size(); }
  std::size_t classes() const { return output_.size(); }

  /// Copy of this model with the given coefficients (same bank storage).
  SteerableModel with_coeffs(CoeffGrid coeffs) const;

  friend bool operator==(const SteerableModel& a, const SteerableModel& b);

 private:
  std::shared_ptr<const BankGrid> banks_;
  OutputLayer output_;
  CoeffGrid coeffs_;
  std::string units_;
};

/// Banks every hidden sphere, copies the output layer and sets all
/// coefficients to (1,0,0,0). Throws DegenerateScale naming the (h, k) sphere.
SteerableModel build_steerable(const MLGPParams& ancestor);

/// Coefficients v^k(R) for every bank.
SteerableModel set_rotation(const SteerableModel& model, const Rotation3& r);

/// Hidden layer from the steered banks, output layer as in the ancestor.
/// Throws ShapeMismatch when the cloud size differs from K.
ForwardTrace steerable_forward(const SteerableModel& model, std::span<const Vec3> cloud);

std::size_t steerable_predict(const SteerableModel& model, std::span<const Vec3> cloud);

}  // namespace spheresteer
