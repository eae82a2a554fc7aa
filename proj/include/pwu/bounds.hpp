#pragma once

#include "pwu/net.hpp"
#include "pwu/region.hpp"

#include <vector>

namespace pwu {

/// Pre-activation bounds of every layer over the box center +- radius.
struct BoxBounds {
  Vec center;
  Vec radius;
  /// One entry per layer; the last one holds the logits.
  std::vector<Vec> lower;
  std::vector<Vec> upper;

  const Vec& logit_lower() const { return lower.back(); }
  const Vec& logit_upper() const { return upper.back(); }
};

/// Backward linear relaxation: triangle upper bound for unstable ReLUs,
/// lower slope 0, stable gates passed through exactly.
BoxBounds preactivation_bounds(const MlpNetwork& net, const Vec& center, const Vec& radius);
BoxBounds preactivation_bounds(const MlpNetwork& net, const Vec& center, double radius);

/// Certified lower bounds of logit_y - logit_j (j != y; entry y is +inf)
/// over the box, propagated with the bounds of `bounds`' hidden layers.
Vec margin_lower_bounds(const MlpNetwork& net, const BoxBounds& bounds, int label);

/// Gate is sign-stable over the box: l >= 0 (on) or u < 0 (off).
std::vector<std::uint8_t> stable_gates(const BoxBounds& bounds);

struct RadiusOptions {
  /// Relative bracket tolerance of the binary search.
  double tol = 1e-3;
};

/// Largest symmetric radius (within tol) on which every margin to `label`
/// is certified positive. Searches [0, domain diameter]; returns the
/// certified end of the final bracket.
double robust_radius(const MlpNetwork& net, const Vec& x, int label, const Box& domain,
                     const RadiusOptions& options = {});

/// Region of x keeping only the constraints of gates whose sign is stable
/// over the box of the given radius. Radius 0 reproduces region_of.
LinearRegion relaxed_region(const MlpNetwork& net, const Vec& x, double radius, const Box& domain);

} // namespace pwu
