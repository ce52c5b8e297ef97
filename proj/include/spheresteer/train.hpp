#pragma once

#include "spheresteer/data.hpp"
#include "spheresteer/mlgp.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace spheresteer {

struct TrainConfig {
  std::size_t hidden_units = 5;
  int epochs = 2000;
  double learning_rate = 0.001;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Adam moment buffers in the flat layout of flatten(MLGPParams).
struct OptimizerState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  long step = 0;

  static OptimizerState for_params(const MLGPParams& p);
};

/// −log softmax(logits)[label], stabilized by subtracting the max logit.
double cross_entropy_loss(const Eigen::VectorXd& logits, std::size_t label);

/// softmax(logits) − onehot(label): the loss gradient w.r.t. the logits.
Eigen::VectorXd cross_entropy_grad(const Eigen::VectorXd& logits, std::size_t label);

/// Exact gradient of cross_entropy_loss ∘ mlgp_forward for one example,
/// returned in the shape of the parameters.
MLGPParams backward(const MLGPParams& p, std::span<const Vec3> cloud, std::size_t label);

struct BatchEvaluation {
  double loss = 0.0;        // mean cross-entropy
  double accuracy = 0.0;    // fraction in [0, 1]
  MLGPParams gradient;      // mean gradient
};

/// Full-batch loss, accuracy and mean gradient, reduced in dataset order.
BatchEvaluation evaluate_batch(const MLGPParams& p, const Dataset& data);

/// Fraction of correctly classified clouds.
double accuracy(const MLGPParams& p, const Dataset& data);

/// Each component i.i.d. U(−1/√fan_in, 1/√fan_in); fan_in = 5K for hidden
/// spheres and H + 2 for output spheres. Hidden spheres are drawn first.
MLGPParams init_params(std::size_t points_per_shape, std::size_t hidden_units, std::size_t classes,
                       Rng& rng);

void adam_step(MLGPParams& p, const MLGPParams& gradient, OptimizerState& state,
               const TrainConfig& config);

struct EpochStats {
  int epoch = 0;  // 1-based; stats are for the parameters entering this epoch
  double loss = 0.0;
  double accuracy = 0.0;
};

struct TrainResult {
  MLGPParams params;
  std::vector<EpochStats> history;
  double final_loss = 0.0;
  double final_accuracy = 0.0;
  /// Number of completed updates after which training accuracy first hit 100%.
  std::optional<int> first_perfect_epoch;
};

using ProgressCallback = std::function<void(const EpochStats&)>;

/// Deterministic full-batch Adam training. Throws NonFinite if the loss
/// becomes NaN or infinite.
TrainResult train(const Dataset& data, const TrainConfig& config, const ProgressCallback& progress = {});

}  // namespace spheresteer
