#include "spheresteer/steer.hpp"

#include "spheresteer/error.hpp"

#include <sstream>

namespace spheresteer {

const TetraBasis& TetraBasis::canonical() {
  static const TetraBasis basis = [] {
    TetraBasis b;
    b.vertices = {Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)};
    for (int j = 0; j < 4; ++j) {
      b.matrix.col(j) << 0.5 * b.vertices[static_cast<std::size_t>(j)], 0.5;
    }
    return b;
  }();
  return basis;
}

Rotation3 tetra_rotation(std::size_t i) {
  if (i > 3) throw Error(ErrorCode::InvalidArgument, "tetrahedron vertex index must be 0..3");
  if (i == 0) return Rotation3::identity();
  const auto& v = TetraBasis::canonical().vertices;
  return geodesic_rotation(v[0], v[i]);
}

namespace {

const std::array<Rotation3, 4>& tetra_rotations() {
  static const std::array<Rotation3, 4> rs = {tetra_rotation(0), tetra_rotation(1),
                                              tetra_rotation(2), tetra_rotation(3)};
  return rs;
}

// lift4(R_O)·lift4(R)·lift4(R_O)ᵀ, the rotation expressed in the bank frame.
Mat4 conjugated(const FilterBank& bank, const Rotation3& r) {
  const Rotation3 c = bank.origin_rotation * r * bank.origin_rotation.transpose();
  return lift4(c).matrix();
}

}  // namespace

FilterBank build_filter_bank(const Sphere& raw) {
  const NormalizedSphere ns = normalize_sphere(raw);
  FilterBank bank;
  bank.gamma = ns.gamma;
  bank.tetra_rotations = tetra_rotations();

  const Vec3 center = ns.sphere.v.head<3>();
  bank.origin_rotation = center.norm() > kDirectionEpsilon
                             ? geodesic_rotation(center, TetraBasis::canonical().vertices[0])
                             : Rotation3::identity();

  const Rotation3& ro = bank.origin_rotation;
  for (int i = 0; i < 4; ++i) {
    const Rotation3 q = ro.transpose() * bank.tetra_rotations[static_cast<std::size_t>(i)] * ro;
    bank.rows.row(i) = lift5(q).apply(ns.sphere.v).transpose();
  }
  // Row 0 is the source sphere itself (R_T0 = I), kept exact.
  bank.rows.row(0) = ns.sphere.v.transpose();
  return bank;
}

Mat4 rotation_rep(const FilterBank& bank, const Rotation3& r, const TetraBasis& basis) {
  return basis.matrix.transpose() * conjugated(bank, r) * basis.matrix;
}

Mat3 rotation_from_rep(const FilterBank& bank, const Mat4& v, const TetraBasis& basis) {
  const Mat4 ro = lift4(bank.origin_rotation).matrix();
  const Mat4 r = ro.transpose() * basis.matrix * v * basis.matrix.transpose() * ro;
  return r.topLeftCorner<3, 3>();
}

Vec4 interp_coeffs(const FilterBank& bank, const Rotation3& r, const TetraBasis& basis) {
  return basis.matrix.transpose() * (conjugated(bank, r) * basis.m1());
}

SteerableModel::SteerableModel(std::shared_ptr<const BankGrid> banks, OutputLayer output,
                               CoeffGrid coeffs, std::string units)
    : banks_(std::move(banks)), output_(std::move(output)), coeffs_(std::move(coeffs)),
      units_(std::move(units)) {
  if (!banks_) throw Error(ErrorCode::InvalidArgument, "steerable model needs banks");
  if (coeffs_.size() != banks_->size()) {
    throw Error(ErrorCode::ShapeMismatch, "coefficient grid does not match the bank grid");
  }
  for (std::size_t h = 0; h < banks_->size(); ++h) {
    if ((*banks_)[h].size() != points_per_shape() || coeffs_[h].size() != points_per_shape()) {
      throw Error(ErrorCode::ShapeMismatch, "ragged bank or coefficient grid");
    }
  }
  for (const auto& s : output_) {
    if (s.size() != static_cast<Eigen::Index>(banks_->size() + 2)) {
      throw Error(ErrorCode::ShapeMismatch, "output sphere length must be H + 2");
    }
  }
}

SteerableModel SteerableModel::with_coeffs(CoeffGrid coeffs) const {
  return SteerableModel(banks_, output_, std::move(coeffs), units_);
}

bool operator==(const SteerableModel& a, const SteerableModel& b) {
  if (a.units_ != b.units_ || a.banks() != b.banks() || a.coeffs_ != b.coeffs_ ||
      a.output_.size() != b.output_.size()) {
    return false;
  }
  for (std::size_t c = 0; c < a.output_.size(); ++c) {
    if (a.output_[c].size() != b.output_[c].size() || a.output_[c] != b.output_[c]) return false;
  }
  return true;
}

SteerableModel build_steerable(const MLGPParams& ancestor) {
  ancestor.validate();
  auto grid = std::make_shared<SteerableModel::BankGrid>();
  grid->resize(ancestor.hidden.size());
  for (std::size_t h = 0; h < ancestor.hidden.size(); ++h) {
    const auto& spheres = ancestor.hidden[h].spheres;
    (*grid)[h].reserve(spheres.size());
    for (std::size_t k = 0; k < spheres.size(); ++k) {
      try {
        (*grid)[h].push_back(build_filter_bank(spheres[k]));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateScale) throw;
        std::ostringstream msg;
        msg << "hidden unit " << h << ", point " << k << ": " << e.detail();
        throw Error(ErrorCode::DegenerateScale, msg.str());
      }
    }
  }
  SteerableModel::CoeffGrid coeffs(ancestor.hidden.size(),
                                   std::vector<Vec4>(ancestor.points_per_shape(), Vec4::UnitX()));
  return SteerableModel(std::move(grid), ancestor.output, std::move(coeffs), ancestor.units);
}

SteerableModel set_rotation(const SteerableModel& model, const Rotation3& r) {
  SteerableModel::CoeffGrid coeffs(model.hidden_units());
  for (std::size_t h = 0; h < model.hidden_units(); ++h) {
    coeffs[h].reserve(model.points_per_shape());
    for (const auto& bank : model.banks()[h]) coeffs[h].push_back(interp_coeffs(bank, r));
  }
  return model.with_coeffs(std::move(coeffs));
}

ForwardTrace steerable_forward(const SteerableModel& model, std::span<const Vec3> cloud) {
  const std::size_t k_points = model.points_per_shape();
  if (cloud.size() != k_points) {
    std::ostringstream msg;
    msg << "cloud has " << cloud.size() << " points, model expects " << k_points;
    throw Error(ErrorCode::ShapeMismatch, msg.str());
  }
  std::vector<EmbeddedPoint> embedded;
  embedded.reserve(cloud.size());
  for (const auto& x : cloud) embedded.push_back(embed_point(x));

  Eigen::VectorXd h(static_cast<Eigen::Index>(model.hidden_units()));
  for (std::size_t i = 0; i < model.hidden_units(); ++i) {
    double z = 0.0;
    for (std::size_t k = 0; k < k_points; ++k) {
      const FilterBank& bank = model.bank(i, k);
      z += steer_activation(bank, bank.gamma, model.coeffs()[i][k], embedded[k]);
    }
    h[static_cast<Eigen::Index>(i)] = z;
  }
  return output_forward(model.output(), std::move(h));
}

std::size_t steerable_predict(const SteerableModel& model, std::span<const Vec3> cloud) {
  return argmax(steerable_forward(model, cloud).logits);
}

}  // namespace spheresteer
