#include "spheresteer/experiment.hpp"

#include "spheresteer/error.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace spheresteer;

TEST_CASE("mean_std uses the population deviation") {
  const MeanStd m = mean_std({1, 2, 3, 4});
  CHECK(m.mean == 2.5);
  CHECK(m.std == doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));
  CHECK(mean_std({7}).std == 0.0);
  // 100/102 is not representable; a constant sequence must still be exact.
  const double share = 100.0 * 100.0 / 102.0;
  const MeanStd constant = mean_std(std::vector<double>(1000, share));
  CHECK(constant.mean == share);
  CHECK(constant.std == 0.0);
}

TEST_CASE("known-rotation experiment on Tetris") {
  const MLGPParams& ancestor = spheresteer::testing::trained_tetris().params;
  const SteerableModel steerable = build_steerable(ancestor);
  const Dataset data = tetris_dataset();
  KnownRotationConfig cfg;
  cfg.noise_levels = {0.0, 0.1};
  cfg.runs = 40;
  cfg.seed = 5;
  const ExperimentReport report = known_rotation(steerable, ancestor, data, cfg);
  REQUIRE(report.rows.size() == 2);

  SUBCASE("noise-free runs are exact") {
    const NoiseLevelRow& r = report.rows[0];
    CHECK(r.runs == 40);
    CHECK(r.steerable_accuracy.mean == 100.0);
    CHECK(r.steerable_accuracy.std == 0.0);
    CHECK(r.ancestor_accuracy.mean == 100.0);
    CHECK(r.steerable_l1.mean < 1e-9);
    CHECK(r.ancestor_l1.mean < 1e-9);
  }
  SUBCASE("paired noise keeps both models in lockstep") {
    for (const auto& run : report.runs[1]) CHECK(run.steerable_accuracy == run.ancestor_accuracy);
    CHECK(report.rows[1].mismatched_runs == 0);
    CHECK(report.rows[1].steerable_l1.mean > report.rows[0].steerable_l1.mean);
  }
  SUBCASE("results do not depend on the thread count") {
    KnownRotationConfig single = cfg;
    single.threads = 1;
    KnownRotationConfig many = cfg;
    many.threads = 7;
    CHECK(known_rotation(steerable, ancestor, data, single).to_csv() == report.to_csv());
    CHECK(known_rotation(steerable, ancestor, data, many).to_csv() == report.to_csv());
  }
  SUBCASE("adding a noise level leaves the other levels unchanged") {
    KnownRotationConfig more = cfg;
    more.noise_levels = {0.0, 0.1, 0.3};
    const ExperimentReport r = known_rotation(steerable, ancestor, data, more);
    CHECK(r.rows[1].steerable_l1.mean == report.rows[1].steerable_l1.mean);
  }
  SUBCASE("CSV and JSON carry the same rows") {
    std::istringstream csv(report.to_csv());
    std::string header;
    std::getline(csv, header);
    CHECK(header == kReportCsvHeader);
    const nlohmann::json j = report.to_json();
    REQUIRE(j["rows"].size() == 2);
    CHECK(j["rows"][1]["steerable_l1_mean"].get<double>() == report.rows[1].steerable_l1.mean);
    CHECK(j["columns"].size() == 12);
    for (const auto& col : j["columns"]) CHECK(j["rows"][0].contains(col.get<std::string>()));
  }
}

TEST_CASE("known-rotation preconditions") {
  const MLGPParams& ancestor = spheresteer::testing::trained_tetris().params;
  const SteerableModel steerable = build_steerable(ancestor);
  const Dataset data = tetris_dataset();
  KnownRotationConfig cfg;
  cfg.runs = 2;

  SUBCASE("checkpoints from different ancestors") {
    MLGPParams other = ancestor;
    other.hidden[0].spheres[0].v[0] += 1e-3;
    CHECK_THROWS_AS(known_rotation(build_steerable(other), ancestor, data, cfg), Error);
  }
  SUBCASE("bad arguments") {
    cfg.noise_levels = {-0.1};
    CHECK_THROWS_AS(known_rotation(steerable, ancestor, data, cfg), Error);
    cfg.noise_levels = {0.0};
    cfg.runs = 0;
    CHECK_THROWS_AS(known_rotation(steerable, ancestor, data, cfg), Error);
  }
  SUBCASE("dataset with the wrong K") {
    cfg.noise_levels = {0.0};
    CHECK_THROWS_AS(known_rotation(steerable, ancestor, synthetic_skeleton_dataset(1, 0), cfg), Error);
  }
}
