#pragma once

#include "pwu/net.hpp"

#include <optional>
#include <vector>

namespace pwu {

/// Axis-aligned box; bounds every LP so region queries stay finite.
struct Box {
  Vec lo;
  Vec hi;

  Eigen::Index dim() const { return lo.size(); }
  bool contains(const Vec& x, double tol = 0.0) const;
  Vec clamp(const Vec& x) const;
  Vec mid() const { return 0.5 * (lo + hi); }
  Vec half_width() const { return 0.5 * (hi - lo); }
  double diameter() const { return (hi - lo).norm(); }

  static Box unit(Eigen::Index dim);
  /// Column-wise min/max of `points` (one sample per column), padded by
  /// `fraction` of each coordinate's range (at least `fraction` absolute).
  static Box padded(const Mat& points, double fraction = 0.05);
};

/// Which base-network gates produced a region's constraints. Lets a support
/// network be stored as bits and rebuilt exactly from the base weights.
struct RegionProvenance {
  std::vector<std::uint8_t> pattern;
  /// Empty means every gate contributes a constraint.
  std::vector<std::uint8_t> mask;

  bool operator==(const RegionProvenance&) const = default;
};

/// Polytope {x : a_i . x <= b_i} around an anchor, always read together
/// with its domain box.
struct LinearRegion {
  RowMat a;
  Vec b;
  Vec anchor;
  Box domain;
  std::optional<RegionProvenance> provenance;
  /// Gates whose pre-activation was exactly zero at the anchor.
  int boundary_gates = 0;

  Eigen::Index size() const { return a.rows(); }
  Eigen::Index dim() const { return a.cols(); }
  Vec slacks(const Vec& x) const { return b - a * x; }
  bool contains(const Vec& x, double tol = 1e-9) const;
};

/// Logits restricted to a region: W x + v.
struct RegionAffineMap {
  Mat w;
  Vec v;

  Vec apply(const Vec& x) const { return w * x + v; }
};

} // namespace pwu
