#pragma once

#include "pwu/net.hpp"
#include "pwu/patched_model.hpp"
#include "pwu/region.hpp"

#include <cstdint>
#include <vector>

namespace pwu {

/// How patch gates enter a region of a patched model.
///  - exact: one constraint per ReLU gate, patches included.
///  - compact: a patch whose supports are all switched off at the anchor
///    contributes a single "stay switched off" constraint per support; the
///    model is still affine on the result, which is a subset of the exact
///    region. Patches touching the anchor are expanded exactly.
enum class RegionMode { exact, compact };

struct RegionTrace {
  LinearRegion region;
  RegionAffineMap map;
  /// Sign bit of every gate visited (exact mode: the full pattern).
  std::vector<std::uint8_t> signs;
};

RegionTrace trace_region(const PatchedModel& model, const Vec& z, RegionMode mode);

/// Linear region of a plain network around x, with one constraint per gate.
LinearRegion region_of(const MlpNetwork& net, const Vec& x, const Box& domain);
LinearRegion region_of(const PatchedModel& model, const Vec& z,
                       RegionMode mode = RegionMode::exact);

/// Rebuild base-network constraints from an activation pattern; `mask`
/// (when non-empty) keeps only the flagged gates.
LinearRegion region_from_pattern(const MlpNetwork& net, const RegionProvenance& provenance,
                                 const Box& domain);

RegionAffineMap region_affine_map(const MlpNetwork& net, const LinearRegion& region);
RegionAffineMap region_affine_map(const PatchedModel& model, const LinearRegion& region,
                                  RegionMode mode = RegionMode::exact);

/// Pattern over every ReLU gate of a patched model, base gates first.
ActivationPattern activation_pattern(const PatchedModel& model, const Vec& z);

/// max of w.x + c over region intersected with its domain box.
double max_affine_over_region(const LinearRegion& region, const Vec& w, double c);

/// Row-wise version sharing one simplex warm start; rows of `w` are objectives.
Vec max_affine_over_region(const LinearRegion& region, const Mat& w, const Vec& c);

struct SampleOptions {
  int burn_in = 20;
  int thinning = 5;
  /// Consecutive zero-length chords tolerated before giving up.
  int max_stalls = 200;
};

/// Hit-and-run walk from the anchor; deterministic for a given seed.
std::vector<Vec> sample_region(const LinearRegion& region, std::size_t n, std::uint64_t seed,
                               const SampleOptions& options = {});

/// Indices of the columns of `points` that lie in the region.
std::vector<int> region_purity(const LinearRegion& region, const Mat& points, double tol = 1e-9);

} // namespace pwu
