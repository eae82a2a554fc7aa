#include "pwu/net.hpp"

#include "pwu/errors.hpp"

#include <string>

namespace pwu {

namespace {

void check_finite(const AffineLayer& layer, std::size_t index) {
  if (!layer.weight.allFinite() || !layer.bias.allFinite()) {
    throw ShapeError("layer " + std::to_string(index) + " has non-finite parameters");
  }
}

void check_input(const MlpNetwork& net, const Vec& x) {
  if (net.empty()) {
    throw ShapeError("network has no layers");
  }
  if (x.size() != net.input_dim()) {
    throw ShapeError("input has dimension " + std::to_string(x.size()) + ", network expects " +
                     std::to_string(net.input_dim()));
  }
}

} // namespace

MlpNetwork::MlpNetwork(std::vector<AffineLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) {
    throw ShapeError("network needs at least one layer");
  }
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& layer = layers_[k];
    if (layer.bias.size() != layer.out_dim() || layer.out_dim() == 0 || layer.in_dim() == 0) {
      throw ShapeError("layer " + std::to_string(k) + " has inconsistent weight/bias shapes");
    }
    if (k > 0 && layers_[k - 1].out_dim() != layer.in_dim()) {
      throw ShapeError("layer " + std::to_string(k) + " input dim " +
                       std::to_string(layer.in_dim()) + " does not chain with previous output " +
                       std::to_string(layers_[k - 1].out_dim()));
    }
    check_finite(layer, k);
  }
}

Eigen::Index MlpNetwork::input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }

Eigen::Index MlpNetwork::output_dim() const {
  return layers_.empty() ? 0 : layers_.back().out_dim();
}

std::size_t MlpNetwork::gate_count() const {
  std::size_t n = 0;
  for (std::size_t k = 0; k + 1 < layers_.size(); ++k) {
    n += static_cast<std::size_t>(layers_[k].out_dim());
  }
  return n;
}

std::vector<int> MlpNetwork::hidden_widths() const {
  std::vector<int> widths;
  for (std::size_t k = 0; k + 1 < layers_.size(); ++k) {
    widths.push_back(static_cast<int>(layers_[k].out_dim()));
  }
  return widths;
}

bool MlpNetwork::operator==(const MlpNetwork& other) const {
  if (layers_.size() != other.layers_.size()) {
    return false;
  }
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& a = layers_[k];
    const auto& b = other.layers_[k];
    if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols() ||
        a.weight != b.weight || a.bias != b.bias) {
      return false;
    }
  }
  return true;
}

Vec forward(const MlpNetwork& net, const Vec& x) {
  check_input(net, x);
  Vec h = x;
  const auto& layers = net.layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    Vec z = layers[k].weight * h + layers[k].bias;
    if (k + 1 < layers.size()) {
      h = z.cwiseMax(0.0);
    } else {
      h = std::move(z);
    }
  }
  return h;
}

Mat forward_batch(const MlpNetwork& net, const Mat& xs) {
  if (net.empty() || xs.rows() != net.input_dim()) {
    throw ShapeError("batch rows do not match network input dimension");
  }
  Mat h = xs;
  const auto& layers = net.layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    Mat z = layers[k].weight * h;
    z.colwise() += layers[k].bias;
    if (k + 1 < layers.size()) {
      h = z.cwiseMax(0.0);
    } else {
      h = std::move(z);
    }
  }
  return h;
}

int argmax_label(const Vec& logits) {
  if (logits.size() == 0) {
    throw ShapeError("argmax of empty logit vector");
  }
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) {
      best = i;
    }
  }
  return static_cast<int>(best);
}

int predict(const MlpNetwork& net, const Vec& x) { return argmax_label(forward(net, x)); }

Vec preactivations(const MlpNetwork& net, const Vec& x) {
  check_input(net, x);
  Vec out(static_cast<Eigen::Index>(net.gate_count()));
  Eigen::Index offset = 0;
  Vec h = x;
  const auto& layers = net.layers();
  for (std::size_t k = 0; k + 1 < layers.size(); ++k) {
    Vec z = layers[k].weight * h + layers[k].bias;
    if (!z.allFinite()) {
      throw NumericError("non-finite pre-activation in layer " + std::to_string(k));
    }
    out.segment(offset, z.size()) = z;
    offset += z.size();
    h = z.cwiseMax(0.0);
  }
  return out;
}

ActivationPattern activation_pattern(const MlpNetwork& net, const Vec& x) {
  const Vec z = preactivations(net, x);
  ActivationPattern pattern;
  pattern.owner_shape = net.hidden_widths();
  pattern.signs.resize(static_cast<std::size_t>(z.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    pattern.signs[static_cast<std::size_t>(i)] = z[i] >= 0.0 ? 1 : 0;
  }
  return pattern;
}

Vec Standardization::apply(const Vec& x) const {
  if (x.size() != mean.size()) {
    throw ShapeError("standardization dimension mismatch");
  }
  return (x - mean).cwiseQuotient(scale);
}

FeatureMap FeatureMap::identity(Eigen::Index dim) {
  FeatureMap fm;
  fm.kind = Kind::identity;
  fm.raw_dim = dim;
  return fm;
}

FeatureMap FeatureMap::frozen(MlpNetwork net) {
  FeatureMap fm;
  fm.kind = Kind::frozen_network;
  fm.raw_dim = net.input_dim();
  fm.network = std::move(net);
  return fm;
}

Eigen::Index FeatureMap::feature_dim() const {
  if (kind == Kind::frozen_network) {
    return network ? network->output_dim() : 0;
  }
  return raw_dim;
}

Vec FeatureMap::apply(const Vec& raw) const {
  if (raw.size() != raw_dim) {
    throw ShapeError("raw input has dimension " + std::to_string(raw.size()) +
                     ", feature map expects " + std::to_string(raw_dim));
  }
  Vec x = standardize ? standardize->apply(raw) : raw;
  if (kind == Kind::frozen_network) {
    return forward(*network, x);
  }
  return x;
}

void FeatureMap::validate() const {
  if (kind == Kind::frozen_network) {
    if (!network || network->input_dim() != raw_dim) {
      throw ShapeError("frozen feature map network does not match raw input dimension");
    }
  } else if (network) {
    throw ShapeError("identity feature map must not carry a network");
  }
  if (standardize &&
      (standardize->mean.size() != raw_dim || standardize->scale.size() != raw_dim)) {
    throw ShapeError("standardization statistics do not match raw input dimension");
  }
}

} // namespace pwu
