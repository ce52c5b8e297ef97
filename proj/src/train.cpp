#include "spheresteer/train.hpp"

#include "spheresteer/error.hpp"

#include <cmath>
#include <sstream>

namespace spheresteer {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::InvalidArgument, "learning_rate must be finite and non-negative");
  }
  if (epochs < 1) throw Error(ErrorCode::InvalidArgument, "epochs must be at least 1");
  if (hidden_units < 1) throw Error(ErrorCode::InvalidArgument, "hidden_units must be at least 1");
}

OptimizerState OptimizerState::for_params(const MLGPParams& p) {
  const auto n = static_cast<Eigen::Index>(parameter_count(p));
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0};
}

namespace {

void check_label(const Eigen::VectorXd& logits, std::size_t label) {
  if (label >= static_cast<std::size_t>(logits.size())) {
    std::ostringstream msg;
    msg << "label " << label << " out of range for " << logits.size() << " classes";
    throw Error(ErrorCode::BadLabel, msg.str());
  }
}

}  // namespace

double cross_entropy_loss(const Eigen::VectorXd& logits, std::size_t label) {
  check_label(logits, label);
  const double top = logits.maxCoeff();
  const double log_sum = std::log((logits.array() - top).exp().sum());
  return log_sum - (logits[static_cast<Eigen::Index>(label)] - top);
}

Eigen::VectorXd cross_entropy_grad(const Eigen::VectorXd& logits, std::size_t label) {
  check_label(logits, label);
  Eigen::VectorXd g = (logits.array() - logits.maxCoeff()).exp().matrix();
  g /= g.sum();
  g[static_cast<Eigen::Index>(label)] -= 1.0;
  return g;
}

MLGPParams backward(const MLGPParams& p, std::span<const Vec3> cloud, std::size_t label) {
  const ForwardTrace t = mlgp_forward(p, cloud);
  const Eigen::VectorXd delta = cross_entropy_grad(t.logits, label);
  const auto hidden_units = static_cast<Eigen::Index>(p.hidden.size());

  MLGPParams grad = MLGPParams::zeros(cloud.size(), p.hidden.size(), p.output.size());
  grad.units = p.units;

  Eigen::VectorXd d_embedded = Eigen::VectorXd::Zero(hidden_units + 2);
  for (std::size_t c = 0; c < p.output.size(); ++c) {
    const double dc = delta[static_cast<Eigen::Index>(c)];
    grad.output[c] = dc * t.embedded_hidden;
    d_embedded += dc * p.output[c];
  }

  // embedded_hidden = (h, −1, −½‖h‖²): h_i feeds slot i directly and the last
  // slot through −h_i.
  const double d_norm_slot = d_embedded[hidden_units + 1];
  const Eigen::VectorXd d_hidden = d_embedded.head(hidden_units) - d_norm_slot * t.hidden_pre;

  std::vector<EmbeddedPoint> embedded;
  embedded.reserve(cloud.size());
  for (const auto& x : cloud) embedded.push_back(embed_point(x));
  for (std::size_t h = 0; h < p.hidden.size(); ++h) {
    const double dh = d_hidden[static_cast<Eigen::Index>(h)];
    for (std::size_t k = 0; k < cloud.size(); ++k) {
      grad.hidden[h].spheres[k].v = dh * embedded[k].v;
    }
  }
  return grad;
}

BatchEvaluation evaluate_batch(const MLGPParams& p, const Dataset& data) {
  if (data.clouds.empty()) throw Error(ErrorCode::InvalidArgument, "dataset is empty");
  BatchEvaluation out;
  Eigen::VectorXd grad_sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count(p)));
  std::size_t correct = 0;
  for (const auto& item : data.clouds) {
    const ForwardTrace t = mlgp_forward(p, item.points);
    out.loss += cross_entropy_loss(t.logits, item.label);
    if (argmax(t.logits) == item.label) ++correct;
    grad_sum += flatten(backward(p, item.points, item.label));
  }
  const double n = static_cast<double>(data.clouds.size());
  out.loss /= n;
  out.accuracy = static_cast<double>(correct) / n;
  out.gradient = MLGPParams::zeros(p.points_per_shape(), p.hidden.size(), p.output.size());
  out.gradient.units = p.units;
  unflatten(out.gradient, grad_sum / n);
  return out;
}

double accuracy(const MLGPParams& p, const Dataset& data) {
  if (data.clouds.empty()) throw Error(ErrorCode::InvalidArgument, "dataset is empty");
  std::size_t correct = 0;
  for (const auto& item : data.clouds) {
    if (predict(p, item.points) == item.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.clouds.size());
}

MLGPParams init_params(std::size_t points_per_shape, std::size_t hidden_units, std::size_t classes,
                       Rng& rng) {
  MLGPParams p = MLGPParams::zeros(points_per_shape, hidden_units, classes);
  const auto draw = [&rng](double bound) { return (2.0 * uniform01(rng) - 1.0) * bound; };
  const double hidden_bound = 1.0 / std::sqrt(5.0 * static_cast<double>(points_per_shape));
  for (auto& neuron : p.hidden) {
    for (auto& s : neuron.spheres) {
      for (Eigen::Index i = 0; i < 5; ++i) s.v[i] = draw(hidden_bound);
    }
  }
  const double output_bound = 1.0 / std::sqrt(static_cast<double>(hidden_units + 2));
  for (auto& s : p.output) {
    for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = draw(output_bound);
  }
  return p;
}

void adam_step(MLGPParams& p, const MLGPParams& gradient, OptimizerState& state,
               const TrainConfig& config) {
  const Eigen::VectorXd g = flatten(gradient);
  if (state.first_moment.size() != g.size() || state.second_moment.size() != g.size()) {
    throw Error(ErrorCode::ShapeMismatch, "optimizer state does not match the parameters");
  }
  ++state.step;
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  state.first_moment = b1 * state.first_moment + (1.0 - b1) * g;
  state.second_moment = b2 * state.second_moment + (1.0 - b2) * g.cwiseProduct(g);
  const double step = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(b1, step);
  const double bias2 = 1.0 - std::pow(b2, step);

  Eigen::VectorXd flat = flatten(p);
  const Eigen::ArrayXd denom = (state.second_moment.array() / bias2).sqrt() + config.adam_eps;
  flat.array() -= config.learning_rate * (state.first_moment.array() / bias1) / denom;
  unflatten(p, flat);
}

TrainResult train(const Dataset& data, const TrainConfig& config, const ProgressCallback& progress) {
  config.validate();
  data.validate();

  Rng rng(config.seed);
  TrainResult result;
  result.params = init_params(data.points_per_shape, config.hidden_units, data.classes(), rng);
  result.params.units = data.units;
  OptimizerState state = OptimizerState::for_params(result.params);
  result.history.reserve(static_cast<std::size_t>(config.epochs));

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const BatchEvaluation eval = evaluate_batch(result.params, data);
    if (!std::isfinite(eval.loss)) {
      std::ostringstream msg;
      msg << "loss became " << eval.loss << " at epoch " << epoch;
      throw Error(ErrorCode::NonFinite, msg.str());
    }
    const EpochStats stats{epoch, eval.loss, eval.accuracy};
    result.history.push_back(stats);
    if (!result.first_perfect_epoch && eval.accuracy == 1.0) result.first_perfect_epoch = epoch - 1;
    if (progress) progress(stats);
    adam_step(result.params, eval.gradient, state, config);
  }

  const BatchEvaluation final_eval = evaluate_batch(result.params, data);
  if (!std::isfinite(final_eval.loss)) {
    throw Error(ErrorCode::NonFinite, "loss became non-finite after the last epoch");
  }
  result.final_loss = final_eval.loss;
  result.final_accuracy = final_eval.accuracy;
  if (!result.first_perfect_epoch && final_eval.accuracy == 1.0) {
    result.first_perfect_epoch = config.epochs;
  }
  return result;
}

}  // namespace spheresteer
