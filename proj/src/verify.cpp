#include "spheresteer/verify.hpp"

#include "spheresteer/error.hpp"
#include "spheresteer/number_format.hpp"
#include "spheresteer/train.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace spheresteer {

namespace {

// ---- random inputs ---------------------------------------------------------

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

Vec3 random_point(Rng& rng, double half_width = 2.0) {
  return {uniform(rng, -half_width, half_width), uniform(rng, -half_width, half_width),
          uniform(rng, -half_width, half_width)};
}

Vec3 random_unit(Rng& rng) {
  const double z = uniform(rng, -1.0, 1.0);
  const double phi = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double s = std::sqrt(1.0 - z * z);
  return {s * std::cos(phi), s * std::sin(phi), z};
}

// Normalized sphere whose center lies at distance [0.25, 2.5] from the origin;
// radius² in [−1, 4], so imaginary spheres are exercised as well.
Sphere random_normalized_sphere(Rng& rng) {
  const Vec3 c = random_unit(rng) * uniform(rng, 0.25, 2.5);
  const double r2 = uniform(rng, -1.0, 4.0);
  Sphere s;
  s.v << c, 0.5 * (c.squaredNorm() - r2), 1.0;
  return s;
}

double random_gamma(Rng& rng) {
  const double g = uniform(rng, 0.2, 2.0);
  return uniform01(rng) < 0.5 ? -g : g;
}

Sphere random_raw_sphere(Rng& rng) {
  Sphere s = random_normalized_sphere(rng);
  s.v *= random_gamma(rng);
  return s;
}

PointCloud random_cloud(Rng& rng, std::size_t k, double half_width) {
  PointCloud pc;
  for (std::size_t i = 0; i < k; ++i) pc.push_back(random_point(rng, half_width));
  return pc;
}

// Small MLGP with well-scaled spheres: hidden spheres have centers in
// [−1, 1]³, output components are U(−out_scale, out_scale).
MLGPParams random_mlgp(Rng& rng, std::size_t k, std::size_t h, std::size_t c, double out_scale) {
  MLGPParams p = MLGPParams::zeros(k, h, c);
  for (auto& neuron : p.hidden) {
    for (auto& s : neuron.spheres) {
      const Vec3 center = random_point(rng, 1.0);
      const double r2 = uniform(rng, 0.0, 1.0);
      s.v << center, 0.5 * (center.squaredNorm() - r2), 1.0;
      s.v *= random_gamma(rng) * 0.5;
    }
  }
  for (auto& o : p.output) {
    for (Eigen::Index i = 0; i < o.size(); ++i) o[i] = uniform(rng, -out_scale, out_scale);
  }
  return p;
}

// ---- formatting helpers for counterexamples ----------------------------------

template <typename Derived>
std::string fmt(const Eigen::MatrixBase<Derived>& m) {
  std::string out = "[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r) out += m.cols() > 1 ? "; " : ", ";
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ", ";
      out += format_shortest(m(r, c));
    }
  }
  return out + "]";
}

std::string fmt(const Rotation3& r) { return fmt(r.matrix()); }

double max_abs(const auto& m) { return m.cwiseAbs().maxCoeff(); }

double rotation_defect(const Rotation3& r) {
  const Mat3& m = r.matrix();
  return std::max(max_abs(m.transpose() * m - Mat3::Identity()), std::abs(m.determinant() - 1.0));
}

// ---- properties ----------------------------------------------------------------

struct TrialContext {
  Rng& rng;
  const TetraBasis& basis;
  std::ostringstream inputs;
};

using TrialFn = std::function<double(TrialContext&, int trial)>;

struct PropertySpec {
  const char* name;
  double tolerance;
  TrialFn trial;
};

double conformal_isometry(TrialContext& t, int) {
  const Vec3 x = random_point(t.rng);
  const Sphere s = random_raw_sphere(t.rng);
  const Rotation3 r = sample_rotation(t.rng);
  t.inputs << "x=" << fmt(x) << " S=" << fmt(s.v) << " R=" << fmt(r);
  const Rotation5 r5 = lift5(r);
  const double embed_err = max_abs(embed_point(r.apply(x)).v - r5.apply(embed_point(x).v));
  const double act_err = std::abs(activation(rotate(r5, embed_point(x)), rotate(r5, s)) -
                                  activation(embed_point(x), s));
  return std::max(embed_err, act_err);
}

double activation_formula(TrialContext& t, int) {
  const Vec3 x = random_point(t.rng);
  const Vec3 y = random_point(t.rng);
  const Vec3 c = random_point(t.rng);
  const double radius = uniform(t.rng, 0.0, 2.0);
  t.inputs << "x=" << fmt(x) << " y=" << fmt(y) << " c=" << fmt(c) << " r=" << format_shortest(radius);
  // A point is the zero-radius sphere at its location.
  const double dist = std::abs(-2.0 * activation(embed_point(x), sphere_from_geometry(y, 0.0)) -
                               (x - y).squaredNorm());
  const double sphere = std::abs(activation(embed_point(x), sphere_from_geometry(c, radius)) -
                                 (-0.5 * (x - c).squaredNorm() + 0.5 * radius * radius));
  return std::max(dist, sphere);
}

double activation_homogeneity(TrialContext& t, int) {
  const Vec3 x = random_point(t.rng);
  const Sphere s = random_normalized_sphere(t.rng);
  const double gamma = uniform(t.rng, -3.0, 3.0);
  t.inputs << "x=" << fmt(x) << " S=" << fmt(s.v) << " gamma=" << format_shortest(gamma);
  const double lhs = activation(embed_point(x), Sphere{gamma * s.v});
  const double rhs = gamma * activation(embed_point(x), s);
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
}

// Energy of the activation, as a function of the rotation angle about a fixed
// axis, in DFT frequencies |k| ≥ 2, relative to the total energy.
double spectral_degree_one(TrialContext& t, int) {
  const Vec3 x = random_point(t.rng);
  const Sphere s = random_normalized_sphere(t.rng);
  const Vec3 axis = random_unit(t.rng);
  t.inputs << "x=" << fmt(x) << " S=" << fmt(s.v) << " axis=" << fmt(axis);
  constexpr int n = 64;
  std::array<double, n> g{};
  for (int j = 0; j < n; ++j) {
    const Rotation3 r = Rotation3::about_axis(axis, 2.0 * std::numbers::pi * j / n);
    g[static_cast<std::size_t>(j)] = activation(embed_point(x), rotate(lift5(r), s));
  }
  double total = 0.0;
  double high = 0.0;
  for (int k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (int j = 0; j < n; ++j) acc += g[static_cast<std::size_t>(j)] * std::polar(1.0, -2.0 * std::numbers::pi * j * k / n);
    const double e = std::norm(acc);
    total += e;
    if (k >= 2 && k <= n - 2) high += e;
  }
  return total > 0.0 ? high / total : 0.0;
}

double lift_homomorphism(TrialContext& t, int) {
  const Rotation3 a = sample_rotation(t.rng);
  const Rotation3 b = sample_rotation(t.rng);
  t.inputs << "R1=" << fmt(a) << " R2=" << fmt(b);
  const double e4 = max_abs(lift4(a * b).matrix() - lift4(a).matrix() * lift4(b).matrix());
  const double e5 = max_abs(lift5(a * b).matrix() - lift5(a).matrix() * lift5(b).matrix());
  return std::max(e4, e5);
}

double geodesic_alignment(TrialContext& t, int trial) {
  const Vec3 a = random_point(t.rng);
  // Every tenth trial is antiparallel to exercise the π-rotation branch.
  const Vec3 b = trial % 10 == 0 ? Vec3(-uniform(t.rng, 0.5, 2.0) * a) : random_point(t.rng);
  t.inputs << "from=" << fmt(a) << " to=" << fmt(b);
  const Rotation3 r = geodesic_rotation(a, b);
  return std::max(max_abs(r.apply(a.normalized()) - b.normalized()), rotation_defect(r));
}

double haar_sample_validity(TrialContext& t, int) {
  const Rotation3 r = sample_rotation(t.rng);
  t.inputs << "R=" << fmt(r);
  return rotation_defect(r);
}

double bank_equivariance(TrialContext& t, int) {
  const Sphere s = random_raw_sphere(t.rng);
  const Rotation3 r = sample_rotation(t.rng);
  const Vec3 x = random_point(t.rng);
  t.inputs << "S=" << fmt(s.v) << " R=" << fmt(r) << " x=" << fmt(x);
  const FilterBank bank = build_filter_bank(s);
  const EmbeddedPoint ex = embed_point(x);
  const Vec4 lhs = bank_forward(bank, rotate(lift5(r), ex));
  const Vec4 rhs = rotation_rep(bank, r, t.basis) * bank_forward(bank, ex);
  return max_abs(lhs - rhs);
}

double bank_structure(TrialContext& t, int trial) {
  Sphere s = random_raw_sphere(t.rng);
  // Every fifth trial uses an origin-centered sphere, whose rows must coincide.
  const bool centered = trial % 5 == 0;
  if (centered) s.v.head<3>().setZero();
  t.inputs << "S=" << fmt(s.v);
  const FilterBank bank = build_filter_bank(s);
  const NormalizedSphere ns = normalize_sphere(s);
  double err = max_abs(bank.rows.row(0).transpose() - ns.sphere.v);
  err = std::max(err, std::abs(bank.gamma - ns.gamma));
  for (int i = 1; i < 4; ++i) {
    const Rotation3& ro = bank.origin_rotation;
    const Rotation3 q = ro.transpose() * tetra_rotation(static_cast<std::size_t>(i)) * ro;
    err = std::max(err, max_abs(bank.rows.row(i).transpose() - lift5(q).apply(ns.sphere.v)));
    if (centered) err = std::max(err, max_abs(bank.rows.row(i) - bank.rows.row(0)));
  }
  return err;
}

// Condition number of the bank; rank 4 means it stays finite and moderate.
double bank_rank(TrialContext& t, int) {
  const Sphere s = random_raw_sphere(t.rng);
  t.inputs << "S=" << fmt(s.v);
  const FilterBank bank = build_filter_bank(s);
  const Eigen::JacobiSVD<BankMatrix> svd(bank.rows);
  const Vec4 sv = svd.singularValues();
  return sv[3] > 0.0 ? sv[0] / sv[3] : std::numeric_limits<double>::infinity();
}

double interpolation_exactness(TrialContext& t, int) {
  const Sphere s = random_raw_sphere(t.rng);
  t.inputs << "S=" << fmt(s.v);
  const FilterBank bank = build_filter_bank(s);
  const Rotation3& ro = bank.origin_rotation;
  double err = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const Rotation3 r = ro.transpose() * tetra_rotation(i) * ro;
    const Vec4 v = interp_coeffs(bank, r, t.basis);
    err = std::max(err, max_abs(v - Vec4::Unit(static_cast<Eigen::Index>(i))));
  }
  return err;
}

double steering_identity(TrialContext& t, int) {
  const Sphere s = random_raw_sphere(t.rng);
  const Rotation3 r = sample_rotation(t.rng);
  const Vec3 x = random_point(t.rng);
  t.inputs << "S=" << fmt(s.v) << " R=" << fmt(r) << " x=" << fmt(x);
  const FilterBank bank = build_filter_bank(s);
  const Vec4 v = interp_coeffs(bank, r, t.basis);
  const double steered = steer_activation(bank, bank.gamma, v, embed_point(r.apply(x)));
  return std::abs(steered - activation(embed_point(x), s));
}

double coefficient_unit_norm(TrialContext& t, int) {
  const Sphere s = random_raw_sphere(t.rng);
  const Rotation3 r = sample_rotation(t.rng);
  t.inputs << "S=" << fmt(s.v) << " R=" << fmt(r);
  return std::abs(interp_coeffs(build_filter_bank(s), r, t.basis).norm() - 1.0);
}

double coefficient_partition_of_unity(TrialContext& t, int) {
  const Sphere s = random_raw_sphere(t.rng);
  const Rotation3 r = sample_rotation(t.rng);
  t.inputs << "S=" << fmt(s.v) << " R=" << fmt(r);
  return std::abs(interp_coeffs(build_filter_bank(s), r, t.basis).sum() - 1.0);
}

double representation_round_trip(TrialContext& t, int) {
  const Sphere s = random_raw_sphere(t.rng);
  const Rotation3 r = sample_rotation(t.rng);
  t.inputs << "S=" << fmt(s.v) << " R=" << fmt(r);
  const FilterBank bank = build_filter_bank(s);
  return (rotation_from_rep(bank, rotation_rep(bank, r, t.basis), t.basis) - r.matrix()).norm();  // Frobenius
}

double representation_homomorphism(TrialContext& t, int) {
  const Sphere s = random_raw_sphere(t.rng);
  const Rotation3 a = sample_rotation(t.rng);
  const Rotation3 b = sample_rotation(t.rng);
  t.inputs << "S=" << fmt(s.v) << " R1=" << fmt(a) << " R2=" << fmt(b);
  const FilterBank bank = build_filter_bank(s);
  return max_abs(rotation_rep(bank, a * b, t.basis) -
                 rotation_rep(bank, a, t.basis) * rotation_rep(bank, b, t.basis));
}

double coefficient_equivariance(TrialContext& t, int) {
  const Sphere s = random_raw_sphere(t.rng);
  const Rotation3 r1 = sample_rotation(t.rng);
  const Rotation3 r2 = sample_rotation(t.rng);
  t.inputs << "S=" << fmt(s.v) << " R1=" << fmt(r1) << " R2=" << fmt(r2);
  const FilterBank bank = build_filter_bank(s);
  return max_abs(interp_coeffs(bank, r2 * r1, t.basis) -
                 rotation_rep(bank, r2, t.basis) * interp_coeffs(bank, r1, t.basis));
}

// Steered model with explicitly computed coefficients, so a corrupted basis
// reaches the model-level checks as well.
SteerableModel steer_with_basis(const SteerableModel& m, const Rotation3& r, const TetraBasis& basis) {
  SteerableModel::CoeffGrid coeffs(m.hidden_units());
  for (std::size_t h = 0; h < m.hidden_units(); ++h) {
    for (std::size_t k = 0; k < m.points_per_shape(); ++k) {
      coeffs[h].push_back(interp_coeffs(m.bank(h, k), r, basis));
    }
  }
  return m.with_coeffs(std::move(coeffs));
}

double hidden_steering(TrialContext& t, int) {
  const MLGPParams p = random_mlgp(t.rng, 4, 3, 3, 0.5);
  const PointCloud cloud = random_cloud(t.rng, 4, 1.5);
  const Rotation3 r = sample_rotation(t.rng);
  t.inputs << "params=" << fmt(flatten(p)) << " R=" << fmt(r);
  const SteerableModel m = steer_with_basis(build_steerable(p), r, t.basis);
  const Eigen::VectorXd want = mlgp_forward(p, cloud).hidden_pre;
  const Eigen::VectorXd got = steerable_forward(m, rotate_cloud(r, cloud)).hidden_pre;
  return max_abs(got - want) / std::max(1.0, max_abs(want));
}

double model_invariance(TrialContext& t, int) {
  const MLGPParams p = random_mlgp(t.rng, 4, 3, 3, 0.5);
  const PointCloud cloud = random_cloud(t.rng, 4, 1.5);
  const Rotation3 r = sample_rotation(t.rng);
  t.inputs << "params=" << fmt(flatten(p)) << " R=" << fmt(r);
  const SteerableModel m = steer_with_basis(build_steerable(p), r, t.basis);
  const Eigen::VectorXd want = mlgp_forward(p, cloud).logits;
  const Eigen::VectorXd got = steerable_forward(m, rotate_cloud(r, cloud)).logits;
  return max_abs(got - want) / std::max(1.0, max_abs(want));
}

// Rotating the input together with every hidden sphere leaves the ancestor unchanged.
double hidden_layer_invariance(TrialContext& t, int) {
  const MLGPParams p = random_mlgp(t.rng, 4, 3, 3, 0.5);
  const PointCloud cloud = random_cloud(t.rng, 4, 1.5);
  const Rotation3 r = sample_rotation(t.rng);
  t.inputs << "params=" << fmt(flatten(p)) << " R=" << fmt(r);
  MLGPParams q = p;
  const Rotation5 r5 = lift5(r);
  for (auto& neuron : q.hidden) {
    for (auto& s : neuron.spheres) s = rotate(r5, s);
  }
  const Eigen::VectorXd want = mlgp_forward(p, cloud).hidden_pre;
  const Eigen::VectorXd got = mlgp_forward(q, rotate_cloud(r, cloud)).hidden_pre;
  return max_abs(got - want) / std::max(1.0, max_abs(want));
}

// Worst relative error between the analytic gradient and a central difference
// with step 1e-5. The denominator is max(|analytic|, |numeric|, 1e-4) so that
// coordinates with a vanishing gradient are judged on absolute error.
double gradient_check(TrialContext& t, int) {
  const MLGPParams p = random_mlgp(t.rng, 3, 3, 3, 0.2);
  const PointCloud cloud = random_cloud(t.rng, 3, 1.0);
  const auto label = static_cast<std::size_t>(t.rng() % 3);
  t.inputs << "params=" << fmt(flatten(p)) << " label=" << label;
  const Eigen::VectorXd analytic = flatten(backward(p, cloud, label));
  const Eigen::VectorXd base = flatten(p);
  const double step = 1e-5;
  MLGPParams probe = p;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    Eigen::VectorXd x = base;
    x[i] = base[i] + step;
    unflatten(probe, x);
    const double up = cross_entropy_loss(mlgp_forward(probe, cloud).logits, label);
    x[i] = base[i] - step;
    unflatten(probe, x);
    const double down = cross_entropy_loss(mlgp_forward(probe, cloud).logits, label);
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-4});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

const std::vector<PropertySpec>& specs() {
  static const std::vector<PropertySpec> all = {
      {"conformal_isometry", 1e-10, conformal_isometry},
      {"activation_formula", 1e-10, activation_formula},
      {"activation_homogeneity", 1e-12, activation_homogeneity},
      {"spectral_degree_one", 1e-9, spectral_degree_one},
      {"lift_homomorphism", 1e-12, lift_homomorphism},
      {"geodesic_alignment", 1e-12, geodesic_alignment},
      {"haar_sample_validity", 1e-12, haar_sample_validity},
      {"bank_structure", 1e-12, bank_structure},
      {"bank_rank", 1e8, bank_rank},
      {"bank_equivariance", 1e-10, bank_equivariance},
      {"interpolation_exactness", 1e-12, interpolation_exactness},
      {"steering_identity", 1e-9, steering_identity},
      {"coefficient_unit_norm", 1e-12, coefficient_unit_norm},
      {"coefficient_partition_of_unity", 1e-12, coefficient_partition_of_unity},
      {"representation_round_trip", 1e-10, representation_round_trip},
      {"representation_homomorphism", 1e-12, representation_homomorphism},
      {"coefficient_equivariance", 1e-12, coefficient_equivariance},
      {"hidden_layer_invariance", 1e-10, hidden_layer_invariance},
      {"hidden_steering", 1e-9, hidden_steering},
      {"model_invariance", 1e-9, model_invariance},
      {"gradient_check", 1e-5, gradient_check},
  };
  return all;
}

PropertyResult run_spec(const PropertySpec& spec, std::size_t index, const VerifyOptions& options) {
  if (options.trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be at least 1");
  std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                    static_cast<std::uint32_t>(index)};
  Rng rng(seq);
  PropertyResult result;
  result.name = spec.name;
  result.trials = options.trials;
  result.tolerance = spec.tolerance;
  for (int trial = 0; trial < options.trials; ++trial) {
    TrialContext ctx{rng, options.basis, {}};
    double err = spec.trial(ctx, trial);
    if (std::isnan(err)) err = std::numeric_limits<double>::infinity();
    result.max_error = std::max(result.max_error, err);
    if (!(err < spec.tolerance) && result.passed) {
      result.passed = false;
      result.counterexample = "trial " + std::to_string(trial) + " (seed " + std::to_string(options.seed) +
                              "): error " + format_shortest(err) + " with " + ctx.inputs.str();
    }
  }
  return result;
}

}  // namespace

TetraBasis corrupted_basis() {
  TetraBasis b = TetraBasis::canonical();
  b.matrix.col(1) = -b.matrix.col(1);
  return b;
}

const std::vector<std::string>& property_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& s : specs()) out.emplace_back(s.name);
    return out;
  }();
  return names;
}

VerifyReport run_property_suite(const VerifyOptions& options) {
  VerifyReport report;
  report.seed = options.seed;
  for (std::size_t i = 0; i < specs().size(); ++i) report.properties.push_back(run_spec(specs()[i], i, options));
  return report;
}

PropertyResult run_property(const std::string& name, const VerifyOptions& options) {
  for (std::size_t i = 0; i < specs().size(); ++i) {
    if (name == specs()[i].name) return run_spec(specs()[i], i, options);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown property '" + name + "'");
}

bool VerifyReport::all_passed() const {
  return std::all_of(properties.begin(), properties.end(), [](const auto& p) { return p.passed; });
}

const PropertyResult& VerifyReport::find(const std::string& name) const {
  for (const auto& p : properties) {
    if (p.name == name) return p;
  }
  throw Error(ErrorCode::InvalidArgument, "no property named '" + name + "' in report");
}

nlohmann::json VerifyReport::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["passed"] = all_passed();
  j["properties"] = nlohmann::json::array();
  for (const auto& p : properties) {
    nlohmann::json e = {{"name", p.name},
                        {"trials", p.trials},
                        {"max_error", std::isfinite(p.max_error) ? nlohmann::json(p.max_error) : nlohmann::json("inf")},
                        {"tolerance", p.tolerance},
                        {"passed", p.passed}};
    if (!p.counterexample.empty()) e["counterexample"] = p.counterexample;
    j["properties"].push_back(std::move(e));
  }
  return j;
}

std::string VerifyReport::to_table() const {
  std::ostringstream out;
  out << std::left << std::setw(34) << "property" << std::right << std::setw(8) << "trials" << std::setw(13)
      << "max error" << std::setw(11) << "tolerance" << "  result\n";
  for (const auto& p : properties) {
    out << std::left << std::setw(34) << p.name << std::right << std::setw(8) << p.trials << std::scientific
        << std::setprecision(2) << std::setw(13) << p.max_error << std::setw(11) << p.tolerance
        << (p.passed ? "  PASS" : "  FAIL") << '\n';
    if (!p.passed) out << "    counterexample: " << p.counterexample << '\n';
  }
  return out.str();
}

}  // namespace spheresteer
