#pragma once

#include "spheresteer/conformal.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace spheresteer {

/// Sum of K hypersphere responses, one learned (raw) sphere per input point.
struct GeometricNeuron {
  std::vector<Sphere> spheres;

  friend bool operator==(const GeometricNeuron&, const GeometricNeuron&) = default;
};

/// Hypersphere output neurons over the embedded hidden vector; each sphere has
/// length H + 2.
using OutputLayer = std::vector<Eigen::VectorXd>;

/// Two-layer multilayer geometric perceptron: geometric-neuron hidden layer
/// without activation, then hypersphere output neurons producing logits.
struct MLGPParams {
  std::vector<GeometricNeuron> hidden;
  OutputLayer output;
  std::string units = "abstract";

  static MLGPParams zeros(std::size_t points_per_shape, std::size_t hidden_units,
                          std::size_t classes);

  std::size_t points_per_shape() const { return hidden.empty() ? 0 : hidden.front().spheres.size(); }
  std::size_t hidden_units() const { return hidden.size(); }
  std::size_t classes() const { return output.size(); }

  /// Throws ShapeMismatch unless H ≥ 1, C ≥ 2, every neuron has K spheres and
  /// every output sphere has length H + 2.
  void validate() const;

  friend bool operator==(const MLGPParams& a, const MLGPParams& b);
};

struct ForwardTrace {
  Eigen::VectorXd hidden_pre;       // h
  Eigen::VectorXd embedded_hidden;  // (h, −1, −½‖h‖²)
  Eigen::VectorXd logits;
};

/// Σ_k ⟨embed(x_k), S̃_k⟩ on raw spheres. Throws ShapeMismatch if the cloud
/// does not have one point per sphere.
double geometric_forward(const GeometricNeuron& neuron, std::span<const Vec3> cloud);

Eigen::VectorXd embed_hidden(const Eigen::VectorXd& h);

/// Runs the output layer on an already computed hidden vector.
ForwardTrace output_forward(const OutputLayer& output, Eigen::VectorXd hidden_pre);

ForwardTrace mlgp_forward(const MLGPParams& p, std::span<const Vec3> cloud);

/// Index of the largest logit; ties resolve to the lowest index.
std::size_t argmax(const Eigen::VectorXd& logits);

std::size_t predict(const MLGPParams& p, std::span<const Vec3> cloud);

// Flat parameter layout: hidden spheres in (h, k, component) order, then
// output spheres in (c, component) order.
std::size_t parameter_count(const MLGPParams& p);
Eigen::VectorXd flatten(const MLGPParams& p);
void unflatten(MLGPParams& p, const Eigen::VectorXd& flat);

}  // namespace spheresteer
