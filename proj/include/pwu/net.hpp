#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace pwu {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct AffineLayer {
  Mat weight; // out x in
  Vec bias;

  Eigen::Index in_dim() const { return weight.cols(); }
  Eigen::Index out_dim() const { return weight.rows(); }
};

/// Feed-forward network: every layer but the last is followed by a ReLU,
/// the last one produces logits.
class MlpNetwork {
public:
  MlpNetwork() = default;
  explicit MlpNetwork(std::vector<AffineLayer> layers);

  Eigen::Index input_dim() const;
  Eigen::Index output_dim() const;
  std::size_t gate_count() const;
  std::vector<int> hidden_widths() const;
  const std::vector<AffineLayer>& layers() const { return layers_; }
  bool empty() const { return layers_.empty(); }

  bool operator==(const MlpNetwork& other) const;

private:
  std::vector<AffineLayer> layers_;
};

/// One bit per ReLU gate, layer-major. A gate whose pre-activation is
/// exactly zero counts as active.
struct ActivationPattern {
  std::vector<std::uint8_t> signs;
  std::vector<int> owner_shape;

  bool operator==(const ActivationPattern&) const = default;
};

Vec forward(const MlpNetwork& net, const Vec& x);

/// Row-wise forward for a batch stored one sample per column.
Mat forward_batch(const MlpNetwork& net, const Mat& xs);

/// Index of the largest entry; ties go to the smallest index.
int argmax_label(const Vec& logits);

int predict(const MlpNetwork& net, const Vec& x);

ActivationPattern activation_pattern(const MlpNetwork& net, const Vec& x);

/// Hidden pre-activations of every layer, concatenated layer-major.
Vec preactivations(const MlpNetwork& net, const Vec& x);

/// Per-column standardization applied to raw inputs before anything else.
struct Standardization {
  Vec mean;
  Vec scale;

  Vec apply(const Vec& x) const;
};

/// Fixed preprocessing in front of the patched classifier. A frozen network
/// is evaluated with `forward` (linear last layer) and never trained.
struct FeatureMap {
  enum class Kind { identity, frozen_network };

  Kind kind = Kind::identity;
  Eigen::Index raw_dim = 0;
  std::optional<MlpNetwork> network;
  std::optional<Standardization> standardize;

  static FeatureMap identity(Eigen::Index dim);
  static FeatureMap frozen(MlpNetwork net);

  Eigen::Index feature_dim() const;
  Vec apply(const Vec& raw) const;
  void validate() const;
};

} // namespace pwu
