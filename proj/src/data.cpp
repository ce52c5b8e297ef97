#include "spheresteer/data.hpp"

#include "spheresteer/error.hpp"
#include "spheresteer/number_format.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace spheresteer {

namespace {

bool is_token(const std::string& s) {
  return !s.empty() && std::none_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

void Dataset::validate() const {
  if (clouds.empty()) throw Error(ErrorCode::InvalidArgument, "dataset has no clouds");
  if (class_names.empty()) throw Error(ErrorCode::InvalidArgument, "dataset has no classes");
  if (points_per_shape == 0) throw Error(ErrorCode::ShapeMismatch, "points_per_shape must be positive");
  if (!is_token(units)) throw Error(ErrorCode::InvalidArgument, "units must be a single token");
  for (const auto& name : class_names) {
    if (!is_token(name)) throw Error(ErrorCode::InvalidArgument, "class name '" + name + "' is not a token");
  }
  for (const auto& c : clouds) {
    if (!is_token(c.id)) throw Error(ErrorCode::InvalidArgument, "cloud id '" + c.id + "' is not a token");
    if (c.points.size() != points_per_shape) {
      std::ostringstream msg;
      msg << "cloud '" << c.id << "' has " << c.points.size() << " points, expected " << points_per_shape;
      throw Error(ErrorCode::ShapeMismatch, msg.str());
    }
    if (c.label >= class_names.size()) {
      std::ostringstream msg;
      msg << "cloud '" << c.id << "' has label " << c.label << " but there are " << class_names.size()
          << " classes";
      throw Error(ErrorCode::BadLabel, msg.str());
    }
    for (const auto& p : c.points) {
      if (!p.allFinite()) throw Error(ErrorCode::NonFinite, "cloud '" + c.id + "' has a non-finite coordinate");
    }
  }
}

Dataset tetris_dataset() {
  using V = Vec3;
  Dataset d;
  d.points_per_shape = 4;
  d.units = "abstract";
  const std::vector<std::pair<std::string, PointCloud>> shapes = {
      {"chiral_shape_1", {V(0, 0, 0), V(0, 0, 1), V(1, 0, 0), V(1, 1, 0)}},
      {"chiral_shape_2", {V(0, 0, 0), V(0, 0, 1), V(1, 0, 0), V(1, -1, 0)}},
      {"square", {V(0, 0, 0), V(1, 0, 0), V(0, 1, 0), V(1, 1, 0)}},
      {"line", {V(0, 0, 0), V(0, 0, 1), V(0, 0, 2), V(0, 0, 3)}},
      {"corner", {V(0, 0, 0), V(0, 0, 1), V(0, 1, 0), V(1, 0, 0)}},
      {"L", {V(0, 0, 0), V(0, 0, 1), V(0, 0, 2), V(0, 1, 0)}},
      {"T", {V(0, 0, 0), V(0, 0, 1), V(0, 0, 2), V(0, 1, 1)}},
      {"zigzag", {V(0, 0, 0), V(1, 0, 0), V(1, 1, 0), V(2, 1, 0)}},
  };
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    d.class_names.push_back(shapes[i].first);
    d.clouds.push_back({shapes[i].second, i, shapes[i].first});
  }
  return d;
}

PointCloud add_uniform_noise(std::span<const Vec3> cloud, double amplitude, Rng& rng) {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    throw Error(ErrorCode::NegativeAmplitude, "noise amplitude must be finite and non-negative");
  }
  PointCloud out(cloud.begin(), cloud.end());
  if (amplitude == 0.0) return out;
  for (auto& p : out) {
    for (Eigen::Index i = 0; i < 3; ++i) {
      // Clamp guards the rounding of (2u - 1)·a + x so |noise| never exceeds a.
      const double n = std::clamp((2.0 * uniform01(rng) - 1.0) * amplitude, -amplitude, amplitude);
      p[i] += n;
    }
  }
  return out;
}

PointCloud canonicalize_pose(std::span<const Vec3> cloud, const AnchorIndices& anchors) {
  const auto [a, b, c] = anchors;
  if (a == b || b == c || a == c) throw Error(ErrorCode::InvalidArgument, "anchor indices must be distinct");
  if (std::max({a, b, c}) >= cloud.size()) throw Error(ErrorCode::InvalidArgument, "anchor index out of range");

  Vec3 centroid = Vec3::Zero();
  for (const auto& p : cloud) centroid += p;
  centroid /= static_cast<double>(cloud.size());

  const Vec3 normal = (cloud[b] - cloud[a]).cross(cloud[c] - cloud[a]);
  if (!(0.5 * normal.norm() >= kDirectionEpsilon)) {
    throw Error(ErrorCode::DegenerateAnchors, "anchor triangle has (near) zero area");
  }
  const Rotation3 r = geodesic_rotation(normal, Vec3::UnitZ());
  PointCloud out;
  out.reserve(cloud.size());
  for (const auto& p : cloud) out.push_back(r.apply(p - centroid));
  return out;
}

Dataset canonicalize_dataset(const Dataset& data, const AnchorIndices& anchors) {
  Dataset out = data;
  for (auto& c : out.clouds) {
    try {
      c.points = canonicalize_pose(c.points, anchors);
    } catch (const Error& e) {
      throw Error(e.code(), "cloud '" + c.id + "': " + e.detail());
    }
  }
  return out;
}

DatasetSplit split_dataset(const Dataset& data, const SplitFractions& fractions, std::uint64_t seed) {
  const double total = fractions.train + fractions.validation + fractions.test;
  if (!(fractions.train >= 0 && fractions.validation >= 0 && fractions.test >= 0 && total > 0)) {
    throw Error(ErrorCode::InvalidArgument, "split fractions must be non-negative with a positive sum");
  }
  std::vector<std::size_t> order(data.clouds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(order[i - 1], order[std::min(j, i - 1)]);
  }
  const double n = static_cast<double>(order.size());
  const auto n_train = static_cast<std::size_t>(std::llround(n * fractions.train / total));
  const auto n_val = std::min(order.size() - n_train,
                              static_cast<std::size_t>(std::llround(n * fractions.validation / total)));

  DatasetSplit split;
  for (Dataset* part : {&split.train, &split.validation, &split.test}) {
    part->class_names = data.class_names;
    part->points_per_shape = data.points_per_shape;
    part->units = data.units;
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    Dataset& dst = i < n_train ? split.train : (i < n_train + n_val ? split.validation : split.test);
    dst.clouds.push_back(data.clouds[order[i]]);
  }
  return split;
}

// ---------------------------------------------------------------------------
// Synthetic skeletons

namespace {

constexpr double deg = std::numbers::pi / 180.0;

struct Pose {
  double torso_pitch = 0;  // forward lean
  std::array<double, 2> shoulder_flex{};   // left, right; 0 = hanging, 90 = forward
  std::array<double, 2> shoulder_abduct{}; // outward from the body
  std::array<double, 2> elbow_flex{};
  std::array<double, 2> hip_flex{};
  std::array<double, 2> knee_flex{};
};

double between(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

Pose sample_pose(std::size_t cls, Rng& rng) {
  Pose p;
  const auto both = [&](std::array<double, 2>& a, double lo, double hi) {
    a = {between(rng, lo, hi), between(rng, lo, hi)};
  };
  both(p.shoulder_abduct, 5, 15);
  both(p.elbow_flex, 5, 20);
  both(p.knee_flex, 0, 10);
  switch (cls) {
    case 0: {  // walk
      const double phase = between(rng, -1, 1);
      p.hip_flex = {25 * phase, -25 * phase};
      p.knee_flex = {between(rng, 5, 30), between(rng, 5, 30)};
      p.shoulder_flex = {-20 * phase, 20 * phase};
      break;
    }
    case 1:  // sit down
      p.torso_pitch = between(rng, 10, 30);
      both(p.hip_flex, 70, 95);
      both(p.knee_flex, 70, 95);
      both(p.shoulder_flex, 10, 35);
      break;
    case 2:  // stand up
      p.torso_pitch = between(rng, 35, 50);
      both(p.hip_flex, 35, 60);
      both(p.knee_flex, 35, 60);
      both(p.shoulder_flex, 30, 60);
      break;
    case 3:  // pick up
      p.torso_pitch = between(rng, 60, 85);
      both(p.hip_flex, 5, 25);
      both(p.knee_flex, 20, 45);
      both(p.shoulder_flex, 50, 80);
      break;
    case 4:  // carry
      p.torso_pitch = between(rng, -5, 5);
      p.hip_flex = {between(rng, -15, 15), between(rng, -15, 15)};
      both(p.shoulder_flex, 25, 45);
      both(p.elbow_flex, 75, 100);
      both(p.shoulder_abduct, 0, 10);
      break;
    case 5:  // throw (right arm overhead)
      p.torso_pitch = between(rng, -10, 5);
      p.shoulder_flex = {between(rng, 20, 50), between(rng, 130, 170)};
      p.elbow_flex = {between(rng, 10, 30), between(rng, 40, 90)};
      p.hip_flex = {between(rng, 10, 25), between(rng, -15, 0)};
      break;
    case 6:  // push
      p.torso_pitch = between(rng, 10, 20);
      both(p.shoulder_flex, 80, 95);
      both(p.elbow_flex, 0, 20);
      p.hip_flex = {between(rng, 15, 30), between(rng, -15, -5)};
      break;
    case 7:  // pull
      p.torso_pitch = between(rng, -12, -3);
      both(p.shoulder_flex, 55, 80);
      both(p.elbow_flex, 60, 100);
      p.hip_flex = {between(rng, -5, 10), between(rng, -25, -10)};
      break;
    case 8:  // wave hands
      both(p.shoulder_flex, 0, 20);
      both(p.shoulder_abduct, 120, 160);
      both(p.elbow_flex, 20, 60);
      break;
    default:  // clap hands
      both(p.shoulder_flex, 60, 80);
      both(p.shoulder_abduct, -20, -8);
      both(p.elbow_flex, 40, 70);
      break;
  }
  return p;
}

// Body frame: x to the subject's left, y up, z forward; hip center at origin.
PointCloud pose_joints(const Pose& p, double scale) {
  const auto rot_x = [](double a) { return Rotation3::about_axis(Vec3::UnitX(), a * deg); };
  const auto rot_z = [](double a) { return Rotation3::about_axis(Vec3::UnitZ(), a * deg); };
  const Vec3 down(0, -1, 0);
  // Pitching forward about +x with a negative angle tips +y toward +z.
  const Rotation3 torso = rot_x(-p.torso_pitch);

  PointCloud j(20, Vec3::Zero());
  j[1] = torso.apply(Vec3(0, 0.22, 0));
  j[2] = torso.apply(Vec3(0, 0.47, 0));
  j[3] = torso.apply(Vec3(0, 0.66, 0));
  for (int side = 0; side < 2; ++side) {
    const double sx = side == 0 ? 1.0 : -1.0;
    const auto s = static_cast<std::size_t>(side);
    const std::size_t base = side == 0 ? 4 : 8;
    const Vec3 shoulder = torso.apply(Vec3(0.18 * sx, 0.44, 0));
    // Abduct sideways about z, then flex forward about x; forearm adds the elbow.
    const Rotation3 upper = torso * rot_x(-p.shoulder_flex[s]) * rot_z(sx * p.shoulder_abduct[s]);
    const Rotation3 lower = upper * rot_x(-p.elbow_flex[s]);
    j[base] = shoulder;
    j[base + 1] = shoulder + 0.28 * upper.apply(down);
    j[base + 2] = j[base + 1] + 0.25 * lower.apply(down);
    j[base + 3] = j[base + 2] + 0.08 * lower.apply(down);

    const std::size_t leg = side == 0 ? 12 : 16;
    const Vec3 hip(0.09 * sx, -0.06, 0);
    const Rotation3 thigh = rot_x(-p.hip_flex[s]);
    const Rotation3 shin = thigh * rot_x(p.knee_flex[s]);
    j[leg] = hip;
    j[leg + 1] = hip + 0.42 * thigh.apply(down);
    j[leg + 2] = j[leg + 1] + 0.40 * shin.apply(down);
    j[leg + 3] = j[leg + 2] + shin.apply(Vec3(0, -0.04, 0.10));
  }
  for (auto& x : j) x *= scale;
  return j;
}

}  // namespace

Dataset synthetic_skeleton_dataset(std::size_t per_class, std::uint64_t seed) {
  Dataset d;
  d.points_per_shape = 20;
  d.units = "m";
  d.class_names = {"walk", "sitDown", "standUp", "pickUp", "carry",
                   "throw", "push", "pull", "waveHands", "clapHands"};
  Rng rng(seed);
  for (std::size_t cls = 0; cls < d.class_names.size(); ++cls) {
    for (std::size_t i = 0; i < per_class; ++i) {
      PointCloud joints = pose_joints(sample_pose(cls, rng), between(rng, 0.9, 1.1));
      for (auto& x : joints) {
        x += Vec3(between(rng, -0.015, 0.015), between(rng, -0.015, 0.015), between(rng, -0.015, 0.015));
      }
      // Face the sensor (body +z toward camera −z) with a heading of up to ±60°
      // and a few degrees of tilt, then place the subject in front of it.
      const Rotation3 facing = Rotation3::about_axis(Vec3::UnitY(), std::numbers::pi);
      const Rotation3 heading = Rotation3::about_axis(Vec3::UnitY(), between(rng, -60, 60) * deg);
      const Rotation3 tilt = Rotation3::about_axis(Vec3::UnitX(), between(rng, -4, 4) * deg) *
                             Rotation3::about_axis(Vec3::UnitZ(), between(rng, -4, 4) * deg);
      const Rotation3 r = tilt * heading * facing;
      const Vec3 offset(between(rng, -1.0, 1.0), between(rng, -0.3, 0.3), between(rng, 2.0, 3.5));
      for (auto& x : joints) x = r.apply(x) + offset;
      std::ostringstream id;
      id << d.class_names[cls] << "_" << i;
      d.clouds.push_back({std::move(joints), cls, id.str()});
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

constexpr std::string_view kDatasetSchema = "spheresteer-dataset";
constexpr int kDatasetVersion = 1;

std::vector<std::string> split_tokens(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << "line " << line << ": " << what;
  throw Error(ErrorCode::ParseError, msg.str());
}

std::size_t parse_count(const std::string& tok, std::size_t line, const char* field) {
  std::size_t value = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    parse_fail(line, std::string(field) + " '" + tok + "' is not a non-negative integer");
  }
  return value;
}

}  // namespace

std::string format_dataset(const Dataset& data) {
  data.validate();
  std::ostringstream out;
  out << kDatasetSchema << ' ' << kDatasetVersion << '\n';
  out << "points_per_shape " << data.points_per_shape << '\n';
  out << "units " << data.units << '\n';
  out << "classes " << data.class_names.size();
  for (const auto& n : data.class_names) out << ' ' << n;
  out << '\n';
  for (const auto& c : data.clouds) {
    out << "cloud " << c.id << ' ' << c.label;
    for (const auto& p : c.points) {
      out << ' ' << format_shortest(p.x()) << ' ' << format_shortest(p.y()) << ' ' << format_shortest(p.z());
    }
    out << '\n';
  }
  return out.str();
}

Dataset parse_dataset(std::string_view text) {
  Dataset d;
  enum class Stage { Schema, Points, Units, Classes, Clouds } stage = Stage::Schema;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto toks = split_tokens(line);
    if (toks.empty() || toks.front().starts_with('#')) continue;

    switch (stage) {
      case Stage::Schema:
        if (toks.size() != 2 || toks[0] != kDatasetSchema) {
          throw Error(ErrorCode::SchemaMismatch, "line " + std::to_string(line_no) + ": expected '" +
                                                     std::string(kDatasetSchema) + " <version>' header");
        }
        if (toks[1] != std::to_string(kDatasetVersion)) {
          throw Error(ErrorCode::SchemaMismatch, "unsupported dataset version " + toks[1]);
        }
        stage = Stage::Points;
        break;
      case Stage::Points:
        if (toks.size() != 2 || toks[0] != "points_per_shape") parse_fail(line_no, "expected 'points_per_shape <K>'");
        d.points_per_shape = parse_count(toks[1], line_no, "points_per_shape");
        if (d.points_per_shape == 0) parse_fail(line_no, "points_per_shape must be positive");
        stage = Stage::Units;
        break;
      case Stage::Units:
        if (toks.size() != 2 || toks[0] != "units") parse_fail(line_no, "expected 'units <token>'");
        d.units = toks[1];
        stage = Stage::Classes;
        break;
      case Stage::Classes: {
        if (toks.size() < 2 || toks[0] != "classes") parse_fail(line_no, "expected 'classes <n> <names...>'");
        const std::size_t n = parse_count(toks[1], line_no, "class count");
        if (n == 0 || toks.size() != n + 2) parse_fail(line_no, "class count does not match the listed names");
        d.class_names.assign(toks.begin() + 2, toks.end());
        stage = Stage::Clouds;
        break;
      }
      case Stage::Clouds: {
        if (toks[0] != "cloud" || toks.size() < 3) parse_fail(line_no, "expected 'cloud <id> <label> <coords...>'");
        const std::string& id = toks[1];
        const std::size_t coords = toks.size() - 3;
        if (coords != 3 * d.points_per_shape) {
          std::ostringstream msg;
          msg << "cloud '" << id << "' has " << coords << " coordinates, expected " << 3 * d.points_per_shape
              << " (K = " << d.points_per_shape << ")";
          parse_fail(line_no, msg.str());
        }
        LabeledCloud c;
        c.id = id;
        c.label = parse_count(toks[2], line_no, "label");
        if (c.label >= d.class_names.size()) {
          parse_fail(line_no, "cloud '" + id + "' label " + toks[2] + " is out of range");
        }
        c.points.resize(d.points_per_shape);
        for (std::size_t k = 0; k < d.points_per_shape; ++k) {
          for (Eigen::Index i = 0; i < 3; ++i) {
            const std::string& tok = toks[3 + 3 * k + static_cast<std::size_t>(i)];
            try {
              c.points[k][i] = parse_double(tok, "coordinate");
            } catch (const Error&) {
              parse_fail(line_no, "cloud '" + id + "' coordinate '" + tok + "' is not a number");
            }
          }
        }
        d.clouds.push_back(std::move(c));
        break;
      }
    }
  }
  if (stage != Stage::Clouds) throw Error(ErrorCode::ParseError, "incomplete dataset header");
  if (d.clouds.empty()) throw Error(ErrorCode::ParseError, "dataset contains no clouds");
  d.validate();
  return d;
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  const std::string text = format_dataset(data);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::InvalidArgument, "failed writing " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open dataset " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_dataset(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

}  // namespace spheresteer
