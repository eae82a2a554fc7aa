#pragma once

#include "pwu/geometry.hpp"
#include "pwu/patched_model.hpp"

namespace pwu {

double bump(double t, double lambda);

SupportNetwork support_from_region(const LinearRegion& region, double lambda);

/// Value in [0, 1]; exactly 0 as soon as one constraint is violated by 1/lambda.
double support_eval(const SupportNetwork& support, const Vec& x);

/// Smallest slack b_i - a_i.x, stopping early once it drops to `floor`.
double min_slack(const SupportNetwork& support, const Vec& x, double floor);

enum class ConfusionMode { constant, affine };

struct ConfusionOptions {
  ConfusionMode mode = ConfusionMode::constant;
  double epsilon = 1e-3;
};

/// Smallest worst-case offset m over the region such that target_label beats
/// every other logit by at least epsilon everywhere in region n domain box.
ConfusionNetwork optimize_confusion(const RegionAffineMap& map, const LinearRegion& region,
                                    int source_label, int target_label,
                                    const ConfusionOptions& options = {});

/// Upper bound of |m(x)| over the box (max over coordinates).
double compute_h(const ConfusionNetwork& confusion, const Box& domain);

PatchNetwork assemble_patch(ConfusionNetwork confusion, std::vector<SupportNetwork> supports,
                            double h, const Box& domain);

/// max over supports of support_eval.
double patch_gate(const PatchNetwork& patch, const Vec& x);

Vec patch_eval(const PatchNetwork& patch, const Vec& x);

Vec patched_forward(const PatchedModel& model, const Vec& raw);

} // namespace pwu
