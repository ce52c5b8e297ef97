#include "spheresteer/conformal.hpp"

#include "spheresteer/error.hpp"

#include <doctest.h>

#include <cmath>

using namespace spheresteer;

TEST_CASE("embed_point") {
  Vec5 expected;
  expected << 1, 2, 3, -1, -7;  // −½‖(1,2,3)‖² = −7
  CHECK(embed_point(Vec3(1, 2, 3)).v == expected);
  CHECK(embed_point(Vec3::Zero()).v == (Vec5() << 0, 0, 0, -1, 0).finished());
}

TEST_CASE("sphere_from_geometry") {
  const Sphere s = sphere_from_geometry(Vec3(1, 0, 0), 2.0);
  CHECK(s.v == (Vec5() << 1, 0, 0, -1.5, 1).finished());  // ½(1 − 4) = −1.5
}

TEST_CASE("activation measures signed distance to the sphere") {
  const Sphere s = sphere_from_geometry(Vec3(1, 0, 0), 2.0);
  // −½‖x − c‖² + ½r²: positive inside, zero on, negative outside.
  CHECK(activation(embed_point(Vec3::Zero()), s) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(activation(embed_point(Vec3(3, 0, 0)), s) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(activation(embed_point(Vec3(1, 3, 0)), s) == doctest::Approx(-2.5).epsilon(1e-15));
  // A zero-radius sphere at y gives −½‖x − y‖².
  CHECK(activation(embed_point(Vec3(1, 2, 2)), sphere_from_geometry(Vec3::Zero(), 0.0)) ==
        doctest::Approx(-4.5).epsilon(1e-15));
}

TEST_CASE("normalize_sphere splits off the scale") {
  const Sphere unit = sphere_from_geometry(Vec3(0.5, -1, 2), 0.75);
  SUBCASE("positive scale") {
    const NormalizedSphere ns = normalize_sphere(Sphere{2.0 * unit.v});
    CHECK(ns.gamma == 2.0);
    CHECK(ns.sphere.v == unit.v);
  }
  SUBCASE("negative scale keeps a sphere with s5 = 1") {
    const NormalizedSphere ns = normalize_sphere(Sphere{-0.25 * unit.v});
    CHECK(ns.gamma == -0.25);
    CHECK(ns.sphere.v[4] == 1.0);
    CHECK((ns.sphere.v - unit.v).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("activation is homogeneous in the scale") {
    const Vec3 x(0.3, 0.1, -0.7);
    const NormalizedSphere ns = normalize_sphere(Sphere{-3.5 * unit.v});
    CHECK(activation(embed_point(x), Sphere{-3.5 * unit.v}) ==
          doctest::Approx(ns.gamma * activation(embed_point(x), ns.sphere)).epsilon(1e-14));
  }
  SUBCASE("planes are rejected") {
    Sphere plane{unit.v};
    plane.v[4] = 0.0;
    try {
      normalize_sphere(plane);
      FAIL("expected DegenerateScale");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegenerateScale);
    }
    // The threshold scales with the other components.
    Sphere tiny{Vec5::Zero()};
    tiny.v << 1e6, 0, 0, 0, 1e-4;
    CHECK_THROWS_AS(normalize_sphere(tiny), Error);
    tiny.v[4] = 1e-2;
    CHECK_NOTHROW(normalize_sphere(tiny));
  }
}

TEST_CASE("min_gamma") {
  CHECK(min_gamma(Sphere{Vec5::Zero()}) == 1e-9);
  CHECK(min_gamma(Sphere{(Vec5() << 3, 0, 0, 4, 100).finished()}) == doctest::Approx(5e-9).epsilon(1e-15));
}

TEST_CASE("sphere_geometry recovers center and radius") {
  const SphereGeometry g = sphere_geometry(sphere_from_geometry(Vec3(1, -2, 0.5), 1.5));
  CHECK((g.center - Vec3(1, -2, 0.5)).norm() == 0.0);
  CHECK(g.radius_sq == doctest::Approx(2.25).epsilon(1e-15));
  SUBCASE("imaginary spheres have negative squared radius") {
    Sphere s{(Vec5() << 0, 0, 0, 2, 1).finished()};  // ½(0 − r²) = 2  ⇒  r² = −4
    CHECK(sphere_geometry(s).radius_sq == -4.0);
  }
}

TEST_CASE("rotations act isometrically on points and spheres") {
  Rng rng(5);
  const Rotation3 r = sample_rotation(rng);
  const Rotation5 r5 = lift5(r);
  const Vec3 x(0.2, -1.3, 0.8);
  const Sphere s{(Vec5() << 0.7, 0.1, -0.4, 0.3, -1.2).finished()};
  CHECK((rotate(r5, embed_point(x)).v - embed_point(r.apply(x)).v).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(activation(rotate(r5, embed_point(x)), rotate(r5, s)) ==
        doctest::Approx(activation(embed_point(x), s)).epsilon(1e-14));
}
