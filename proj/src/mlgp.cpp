#include "spheresteer/mlgp.hpp"

#include "spheresteer/error.hpp"

#include <sstream>

namespace spheresteer {

MLGPParams MLGPParams::zeros(std::size_t points_per_shape, std::size_t hidden_units,
                             std::size_t classes) {
  MLGPParams p;
  p.hidden.assign(hidden_units, GeometricNeuron{std::vector<Sphere>(points_per_shape, Sphere{Vec5::Zero()})});
  p.output.assign(classes, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hidden_units + 2)));
  return p;
}

void MLGPParams::validate() const {
  const auto fail = [](const std::string& what) { throw Error(ErrorCode::ShapeMismatch, what); };
  if (hidden.empty()) fail("model needs at least one hidden unit");
  if (output.size() < 2) fail("model needs at least two classes");
  const std::size_t k = points_per_shape();
  if (k == 0) fail("hidden neurons have no spheres");
  for (std::size_t h = 0; h < hidden.size(); ++h) {
    if (hidden[h].spheres.size() != k) {
      std::ostringstream msg;
      msg << "hidden neuron " << h << " has " << hidden[h].spheres.size() << " spheres, expected " << k;
      fail(msg.str());
    }
  }
  for (std::size_t c = 0; c < output.size(); ++c) {
    if (output[c].size() != static_cast<Eigen::Index>(hidden.size() + 2)) {
      std::ostringstream msg;
      msg << "output sphere " << c << " has length " << output[c].size() << ", expected "
          << hidden.size() + 2;
      fail(msg.str());
    }
  }
}

bool operator==(const MLGPParams& a, const MLGPParams& b) {
  if (a.units != b.units || a.hidden != b.hidden || a.output.size() != b.output.size()) return false;
  for (std::size_t c = 0; c < a.output.size(); ++c) {
    if (a.output[c].size() != b.output[c].size() || a.output[c] != b.output[c]) return false;
  }
  return true;
}

double geometric_forward(const GeometricNeuron& neuron, std::span<const Vec3> cloud) {
  if (cloud.size() != neuron.spheres.size()) {
    std::ostringstream msg;
    msg << "cloud has " << cloud.size() << " points, neuron expects " << neuron.spheres.size();
    throw Error(ErrorCode::ShapeMismatch, msg.str());
  }
  double z = 0.0;
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    z += activation(embed_point(cloud[k]), neuron.spheres[k]);
  }
  return z;
}

Eigen::VectorXd embed_hidden(const Eigen::VectorXd& h) {
  const Eigen::Index n = h.size();
  Eigen::VectorXd e(n + 2);
  e.head(n) = h;
  e[n] = -1.0;
  e[n + 1] = -0.5 * h.squaredNorm();
  return e;
}

ForwardTrace output_forward(const OutputLayer& output, Eigen::VectorXd hidden_pre) {
  ForwardTrace t;
  t.embedded_hidden = embed_hidden(hidden_pre);
  t.hidden_pre = std::move(hidden_pre);
  t.logits.resize(static_cast<Eigen::Index>(output.size()));
  for (std::size_t c = 0; c < output.size(); ++c) {
    t.logits[static_cast<Eigen::Index>(c)] = t.embedded_hidden.dot(output[c]);
  }
  return t;
}

ForwardTrace mlgp_forward(const MLGPParams& p, std::span<const Vec3> cloud) {
  Eigen::VectorXd h(static_cast<Eigen::Index>(p.hidden.size()));
  for (std::size_t i = 0; i < p.hidden.size(); ++i) {
    h[static_cast<Eigen::Index>(i)] = geometric_forward(p.hidden[i], cloud);
  }
  return output_forward(p.output, std::move(h));
}

std::size_t argmax(const Eigen::VectorXd& logits) {
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(i);
  }
  return best;
}

std::size_t predict(const MLGPParams& p, std::span<const Vec3> cloud) {
  return argmax(mlgp_forward(p, cloud).logits);
}

std::size_t parameter_count(const MLGPParams& p) {
  std::size_t n = 0;
  for (const auto& neuron : p.hidden) n += 5 * neuron.spheres.size();
  for (const auto& s : p.output) n += static_cast<std::size_t>(s.size());
  return n;
}

Eigen::VectorXd flatten(const MLGPParams& p) {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count(p)));
  Eigen::Index i = 0;
  for (const auto& neuron : p.hidden) {
    for (const auto& s : neuron.spheres) {
      flat.segment<5>(i) = s.v;
      i += 5;
    }
  }
  for (const auto& s : p.output) {
    flat.segment(i, s.size()) = s;
    i += s.size();
  }
  return flat;
}

void unflatten(MLGPParams& p, const Eigen::VectorXd& flat) {
  if (flat.size() != static_cast<Eigen::Index>(parameter_count(p))) {
    throw Error(ErrorCode::ShapeMismatch, "flat parameter vector has the wrong length");
  }
  Eigen::Index i = 0;
  for (auto& neuron : p.hidden) {
    for (auto& s : neuron.spheres) {
      s.v = flat.segment<5>(i);
      i += 5;
    }
  }
  for (auto& s : p.output) {
    s = flat.segment(i, s.size());
    i += s.size();
  }
}

}  // namespace spheresteer
