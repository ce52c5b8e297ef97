#include "spheresteer/train.hpp"

#include "spheresteer/error.hpp"

#include <doctest.h>

#include <cmath>

using namespace spheresteer;

TEST_CASE("cross entropy matches log-sum-exp") {
  // log(e¹ + e² + e³) − z_label, evaluated with numpy.
  const Eigen::Vector3d z(1, 2, 3);
  CHECK(cross_entropy_loss(z, 2) == doctest::Approx(0.4076059644443806).epsilon(1e-15));
  CHECK(cross_entropy_loss(z, 0) == doctest::Approx(2.4076059644443806).epsilon(1e-15));
  SUBCASE("stable for large logits") {
    CHECK(cross_entropy_loss(Eigen::Vector2d(1000, 0), 0) == 0.0);
    CHECK(cross_entropy_loss(Eigen::Vector2d(1000, 0), 1) == doctest::Approx(1000.0));
  }
  SUBCASE("labels out of range") {
    try {
      cross_entropy_loss(z, 3);
      FAIL("expected BadLabel");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BadLabel);
    }
  }
}

TEST_CASE("cross entropy gradient is softmax minus one-hot") {
  const Eigen::VectorXd g = cross_entropy_grad(Eigen::Vector3d(1, 2, 3), 1);
  CHECK(g[0] == doctest::Approx(0.09003057317038046).epsilon(1e-14));
  CHECK(g[1] == doctest::Approx(0.24472847105479767 - 1.0).epsilon(1e-14));
  CHECK(g[2] == doctest::Approx(0.6652409557748219).epsilon(1e-14));
  CHECK(std::abs(g.sum()) < 1e-15);
}

TEST_CASE("backward agrees with central differences") {
  Rng rng(9);
  const MLGPParams p = init_params(3, 4, 3, rng);
  const PointCloud cloud = {Vec3(0.1, 0.9, -0.4), Vec3(-0.5, 0.2, 0.3), Vec3(0.7, -0.8, 0.6)};
  const std::size_t label = 2;
  const Eigen::VectorXd analytic = flatten(backward(p, cloud, label));
  const Eigen::VectorXd base = flatten(p);
  MLGPParams probe = p;
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    Eigen::VectorXd x = base;
    x[i] += 1e-6;
    unflatten(probe, x);
    const double up = cross_entropy_loss(mlgp_forward(probe, cloud).logits, label);
    x[i] = base[i] - 1e-6;
    unflatten(probe, x);
    const double down = cross_entropy_loss(mlgp_forward(probe, cloud).logits, label);
    const double numeric = (up - down) / 2e-6;
    INFO("parameter ", i);
    CHECK(std::abs(analytic[i] - numeric) <= 1e-7 * std::max(1.0, std::abs(numeric)));
  }
}

TEST_CASE("init_params draws within the fan-in bounds") {
  Rng rng(1);
  const MLGPParams p = init_params(4, 5, 8, rng);
  const double hidden_bound = 1.0 / std::sqrt(20.0);
  const double output_bound = 1.0 / std::sqrt(7.0);
  for (const auto& n : p.hidden) {
    for (const auto& s : n.spheres) CHECK(s.v.cwiseAbs().maxCoeff() <= hidden_bound);
  }
  for (const auto& o : p.output) CHECK(o.cwiseAbs().maxCoeff() <= output_bound);
  Rng again(1);
  CHECK(init_params(4, 5, 8, again) == p);
}

TEST_CASE("first Adam step moves each parameter by lr·g/(|g| + eps)") {
  // With bias correction m̂ = g and v̂ = g² after one step.
  MLGPParams p = MLGPParams::zeros(1, 1, 2);
  MLGPParams g = MLGPParams::zeros(1, 1, 2);
  g.hidden[0].spheres[0].v << 0.5, -2, 0, 1e-9, 3;
  g.output[0] = Eigen::Vector3d(1, -1, 0.25);
  g.output[1] = Eigen::Vector3d(0, 0, 0);
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  OptimizerState state = OptimizerState::for_params(p);
  adam_step(p, g, state, cfg);
  CHECK(state.step == 1);
  const Eigen::VectorXd flat = flatten(p);
  const Eigen::VectorXd grad = flatten(g);
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    const double expected = -0.01 * grad[i] / (std::abs(grad[i]) + 1e-8);
    CHECK(flat[i] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("training on the Tetris shapes") {
  const Dataset data = tetris_dataset();
  TrainConfig cfg;
  cfg.seed = 0;
  cfg.epochs = 2000;
  const TrainResult a = train(data, cfg);
  CHECK(a.final_accuracy == 1.0);
  REQUIRE(a.first_perfect_epoch.has_value());
  CHECK(*a.first_perfect_epoch <= 2000);
  CHECK(a.history.size() == 2000);
  CHECK(a.history.front().epoch == 1);
  CHECK(a.final_loss < a.history.front().loss);

  SUBCASE("the same seed reproduces the parameters bitwise") {
    const TrainResult b = train(data, cfg);
    CHECK(b.params == a.params);
    CHECK(b.final_loss == a.final_loss);
  }
  SUBCASE("zero learning rate leaves the initialization untouched") {
    TrainConfig frozen = cfg;
    frozen.learning_rate = 0.0;
    frozen.epochs = 3;
    Rng rng(frozen.seed);
    const MLGPParams init = init_params(4, 5, 8, rng);
    const TrainResult r = train(data, frozen);
    CHECK(flatten(r.params) == flatten(init));
    CHECK(r.history[0].loss == r.history[2].loss);
  }
  SUBCASE("progress callback sees every epoch") {
    TrainConfig short_run = cfg;
    short_run.epochs = 7;
    int calls = 0;
    train(data, short_run, [&](const EpochStats& s) { CHECK(s.epoch == ++calls); });
    CHECK(calls == 7);
  }
}

TEST_CASE("invalid training configurations") {
  TrainConfig cfg;
  cfg.learning_rate = -1e-3;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = TrainConfig{};
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = TrainConfig{};
  cfg.hidden_units = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("divergence is reported instead of clipped") {
  Dataset data = tetris_dataset();
  TrainConfig cfg;
  cfg.learning_rate = 1e300;
  cfg.epochs = 50;
  try {
    train(data, cfg);
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFinite);
  }
}
