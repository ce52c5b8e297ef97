#pragma once

#include "spheresteer/geom3d.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace spheresteer {

struct LabeledCloud {
  PointCloud points;
  std::size_t label = 0;
  std::string id;

  friend bool operator==(const LabeledCloud&, const LabeledCloud&) = default;
};

struct Dataset {
  std::vector<LabeledCloud> clouds;
  std::vector<std::string> class_names;
  std::size_t points_per_shape = 0;
  std::string units = "abstract";

  std::size_t classes() const { return class_names.size(); }

  /// Throws ShapeMismatch / BadLabel / InvalidArgument when the invariants
  /// (non-empty, consistent K, labels in range, whitespace-free names) fail.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// The eight 3D Tetris shapes, four points each, in the canonical class order.
Dataset tetris_dataset();

/// Adds independent U(−a, a) noise to every coordinate. a = 0 returns the
/// cloud unchanged without consuming randomness. Throws NegativeAmplitude.
PointCloud add_uniform_noise(std::span<const Vec3> cloud, double amplitude, Rng& rng);

using AnchorIndices = std::array<std::size_t, 3>;

/// Centers the cloud at its centroid and rotates the normal of the anchor
/// triangle onto +z with the geodesic rotation. The in-plane (about z)
/// orientation is left as is. Throws DegenerateAnchors.
PointCloud canonicalize_pose(std::span<const Vec3> cloud, const AnchorIndices& anchors);

Dataset canonicalize_dataset(const Dataset& data, const AnchorIndices& anchors);

struct SplitFractions {
  double train = 0.38;
  double validation = 0.11;
  double test = 0.51;
};

struct DatasetSplit {
  Dataset train;
  Dataset validation;
  Dataset test;
};

/// Seeded shuffle, then consecutive slices sized by the (renormalized)
/// fractions. Each part keeps the parent's class names and units.
DatasetSplit split_dataset(const Dataset& data, const SplitFractions& fractions, std::uint64_t seed);

/// Kinect-style 20-joint skeleton joints (hip center, left hip, right hip).
inline constexpr AnchorIndices kSkeletonHipAnchors = {0, 12, 16};

/// Synthetic stand-in for the skeleton experiment: ten posture classes of
/// 20-joint skeletons in meters, each sample posed with intra-class variation,
/// joint jitter, a random heading and a random placement in front of the
/// sensor. Not canonicalized.
Dataset synthetic_skeleton_dataset(std::size_t per_class, std::uint64_t seed);

// Line-oriented text format, see docs/FORMATS.md. Floats are written in
// shortest round-trip form so files reproduce values bitwise.
void save_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);
std::string format_dataset(const Dataset& data);
Dataset parse_dataset(std::string_view text);

}  // namespace spheresteer
