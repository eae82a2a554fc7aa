#pragma once

#include "pwu/net.hpp"
#include "pwu/region.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pwu {

/// Soft indicator of a polytope: 1 on the polytope, 0 once any constraint is violated
/// by at least 1/lambda, linear ramps in between.
struct SupportNetwork {
  RowMat a;
  Vec b;
  double lambda = 1e4;
  std::optional<RegionProvenance> provenance;

  Eigen::Index size() const { return a.rows(); }
};

/// Affine logit offset m(x) = C x + d. A missing C means C = 0.
struct ConfusionNetwork {
  std::optional<Mat> c;
  Vec d;
  int target_label = -1;
  int source_label = -1;

  Vec eval(const Vec& x) const;
  bool constant() const { return !c.has_value(); }
};

struct PatchNetwork {
  ConfusionNetwork confusion;
  std::vector<SupportNetwork> supports;
  double h = 0.0;
};

/// Base classifier plus patches summed onto its logits. Patches, supports
/// and regions all live in feature space z = featuremap(raw input).
struct PatchedModel {
  MlpNetwork base;
  FeatureMap featuremap;
  Box domain;
  std::vector<PatchNetwork> patches;

  static PatchedModel wrap(MlpNetwork base, std::optional<Box> domain = std::nullopt);

  Eigen::Index feature_dim() const { return base.input_dim(); }
  int num_classes() const { return static_cast<int>(base.output_dim()); }
  std::size_t support_count() const;

  /// Logits for a feature vector.
  Vec logits(const Vec& z) const;
  int predict_features(const Vec& z) const { return argmax_label(logits(z)); }
  /// Logits for a raw input (feature map applied first).
  Vec forward(const Vec& raw) const { return logits(featuremap.apply(raw)); }
  int predict(const Vec& raw) const { return argmax_label(forward(raw)); }
  Mat features(const Mat& raw) const;

  void validate() const;
};

} // namespace pwu
