#include "spheresteer/data.hpp"

#include "spheresteer/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

using namespace spheresteer;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("Tetris shapes") {
  const Dataset d = tetris_dataset();
  CHECK_NOTHROW(d.validate());
  CHECK(d.clouds.size() == 8);
  CHECK(d.points_per_shape == 4);
  CHECK(d.class_names == std::vector<std::string>{"chiral_shape_1", "chiral_shape_2", "square", "line", "corner",
                                                  "L", "T", "zigzag"});
  for (std::size_t i = 0; i < 8; ++i) CHECK(d.clouds[i].label == i);
  CHECK(d.clouds[3].points[3] == Vec3(0, 0, 3));
  SUBCASE("the chiral pair are mirror images") {
    for (std::size_t k = 0; k < 4; ++k) {
      const Vec3 p = d.clouds[0].points[k];
      CHECK(d.clouds[1].points[k] == Vec3(p.x(), -p.y(), p.z()));
    }
  }
}

TEST_CASE("uniform noise") {
  const PointCloud cloud = tetris_dataset().clouds[2].points;
  SUBCASE("zero amplitude is the identity and consumes nothing") {
    Rng rng(5), untouched(5);
    CHECK(add_uniform_noise(cloud, 0.0, rng) == cloud);
    CHECK(rng() == untouched());
  }
  SUBCASE("bounded and centered") {
    Rng rng(8);
    double sum = 0.0, sq = 0.0;
    int n = 0;
    for (int rep = 0; rep < 20000; ++rep) {
      const PointCloud noisy = add_uniform_noise(cloud, 0.3, rng);
      for (std::size_t k = 0; k < cloud.size(); ++k) {
        const Vec3 d = noisy[k] - cloud[k];
        CHECK(d.cwiseAbs().maxCoeff() <= 0.3 + 1e-15);
        sum += d.sum();
        sq += d.squaredNorm();
        n += 3;
      }
    }
    // U(−a, a) has mean 0 and variance a²/3 = 0.03.
    CHECK(std::abs(sum / n) < 5.0 * std::sqrt(0.03 / n));
    CHECK(sq / n == doctest::Approx(0.03).epsilon(0.02));
  }
  SUBCASE("negative amplitude") {
    Rng rng(0);
    CHECK(code_of([&] { add_uniform_noise(cloud, -0.1, rng); }) == ErrorCode::NegativeAmplitude);
  }
}

TEST_CASE("canonicalize_pose") {
  // Anchor normal (1,0,0)×(0,0,1) = (0,−1,0) is turned onto +z. Expected
  // coordinates from scipy's Rotation.align_vectors on the centered points.
  const PointCloud cloud = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 0, 1)};
  const PointCloud out = canonicalize_pose(cloud, {0, 1, 2});
  const double t = 1.0 / 3.0;
  CHECK((out[0] - Vec3(-t, -t, 0)).norm() < 1e-15);
  CHECK((out[1] - Vec3(2 * t, -t, 0)).norm() < 1e-15);
  CHECK((out[2] - Vec3(-t, 2 * t, 0)).norm() < 1e-15);

  SUBCASE("invariant to the input pose up to a rotation about z") {
    Rng rng(12);
    const PointCloud base = {Vec3(0.1, 0.2, 0.3), Vec3(1.4, 0.1, -0.2), Vec3(0.2, 1.1, 0.5), Vec3(0.8, 0.9, 1.7)};
    const PointCloud a = canonicalize_pose(base, {0, 1, 2});
    const PointCloud b = canonicalize_pose(rotate_cloud(sample_rotation(rng), base), {0, 1, 2});
    for (std::size_t k = 0; k < base.size(); ++k) {
      CHECK(a[k].z() == doctest::Approx(b[k].z()).epsilon(1e-12));
      CHECK(a[k].head<2>().norm() == doctest::Approx(b[k].head<2>().norm()).epsilon(1e-12));
    }
  }
  SUBCASE("errors") {
    const PointCloud line = {Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(2, 2, 2)};
    CHECK(code_of([&] { canonicalize_pose(line, {0, 1, 2}); }) == ErrorCode::DegenerateAnchors);
    CHECK(code_of([&] { canonicalize_pose(cloud, {0, 0, 2}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { canonicalize_pose(cloud, {0, 1, 3}); }) == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("split_dataset") {
  const Dataset d = synthetic_skeleton_dataset(10, 3);
  const DatasetSplit s = split_dataset(d, {}, 99);
  CHECK(s.train.clouds.size() == 38);
  CHECK(s.validation.clouds.size() == 11);
  CHECK(s.test.clouds.size() == 51);
  std::set<std::string> ids;
  for (const Dataset* part : {&s.train, &s.validation, &s.test}) {
    CHECK(part->class_names == d.class_names);
    for (const auto& c : part->clouds) ids.insert(c.id);
  }
  CHECK(ids.size() == 100);
  CHECK(split_dataset(d, {}, 99).train == s.train);
  CHECK_FALSE(split_dataset(d, {}, 100).train == s.train);
  CHECK_THROWS_AS(split_dataset(d, {-1, 1, 1}, 0), Error);
}

TEST_CASE("synthetic skeletons") {
  const Dataset d = synthetic_skeleton_dataset(4, 7);
  CHECK_NOTHROW(d.validate());
  CHECK(d.classes() == 10);
  CHECK(d.points_per_shape == 20);
  CHECK(d.units == "m");
  CHECK(d.clouds.size() == 40);
  CHECK(synthetic_skeleton_dataset(4, 7) == d);
  CHECK_FALSE(synthetic_skeleton_dataset(4, 8) == d);
  SUBCASE("hip anchors are well conditioned") {
    for (const auto& c : d.clouds) CHECK_NOTHROW(canonicalize_pose(c.points, kSkeletonHipAnchors));
  }
  SUBCASE("subjects stand in front of the sensor at human scale") {
    for (const auto& c : d.clouds) {
      double top = -1e9, bottom = 1e9;
      for (const auto& p : c.points) {
        top = std::max(top, p.y());
        bottom = std::min(bottom, p.y());
        CHECK(p.z() > 0.5);
      }
      CHECK(top - bottom > 0.6);
      CHECK(top - bottom < 2.5);
    }
  }
}

TEST_CASE("dataset text format") {
  const Dataset d = synthetic_skeleton_dataset(2, 1);
  SUBCASE("round trip is bitwise") { CHECK(parse_dataset(format_dataset(d)) == d); }
  SUBCASE("files round trip") {
    const auto path = std::filesystem::temp_directory_path() / "spheresteer_data_test.txt";
    save_dataset(d, path);
    CHECK(load_dataset(path) == d);
    std::filesystem::remove(path);
  }
  SUBCASE("comments and blank lines") {
    const std::string text =
        "spheresteer-dataset 1\n# a comment\n\npoints_per_shape 1\nunits abstract\nclasses 2 a b\n"
        "cloud p0 1 0.5 -1 0x1p-2\n";
    const Dataset p = parse_dataset(text);
    REQUIRE(p.clouds.size() == 1);
    CHECK(p.clouds[0].label == 1);
    CHECK(p.clouds[0].points[0] == Vec3(0.5, -1, 0.25));
  }
  SUBCASE("malformed input") {
    CHECK(code_of([] { parse_dataset(""); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_dataset("spheresteer-dataset 2\n"); }) == ErrorCode::SchemaMismatch);
    CHECK(code_of([] { parse_dataset("something-else 1\n"); }) == ErrorCode::SchemaMismatch);
    const std::string header = "spheresteer-dataset 1\npoints_per_shape 2\nunits m\nclasses 2 a b\n";
    try {
      parse_dataset(header + "cloud bad7 0 1 2 3\n");
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
      CHECK(e.detail().find("bad7") != std::string::npos);
    }
    CHECK(code_of([&] { parse_dataset(header + "cloud x 0 1 2 3 4 zz\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([&] { parse_dataset(header + "cloud x 5 1 2 3 4 5 6\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { load_dataset("/nonexistent/spheresteer.txt"); }) == ErrorCode::ParseError);
  }
}
