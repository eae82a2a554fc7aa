#pragma once

#include "pwu/data.hpp"
#include "pwu/patched_model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pwu {

/// Raw inputs -> predictions (feature map applied by the model).
std::vector<int> predict_all(const PatchedModel& model, const Mat& raw);

/// Percent correct; throws on an empty dataset.
double accuracy(const PatchedModel& model, const Dataset& data);

/// Per-sample softmax cross-entropy.
Vec sample_losses(const PatchedModel& model, const Dataset& data);
double mean_loss(const PatchedModel& model, const Dataset& data);

/// Loss-threshold membership attack: percent of `data` whose loss is <= tau.
double mia_recall(const PatchedModel& model, const Dataset& data, double tau);

struct AccuracyPair {
  double before = 0.0;
  double after = 0.0;
  double delta() const { return before - after; }
};

struct MetricsDelta {
  AccuracyPair tes;
  AccuracyPair res;
  AccuracyPair u;
  /// Class mode: test split into the unlearned class and the rest, plus
  /// training accuracy on the remaining classes.
  std::optional<AccuracyPair> tes_u;
  std::optional<AccuracyPair> tes_r;
  std::optional<AccuracyPair> r;
  std::optional<int> y_unlearn;
};

/// Empty D_U / D_R are allowed (their accuracies are reported as 0).
MetricsDelta unlearn_metrics(const PatchedModel& before, const PatchedModel& after,
                             const Dataset& d_u, const Dataset& d_r, const Dataset& test,
                             std::optional<int> y_unlearn = std::nullopt);

/// CSV with columns metric,before,after,delta (A_tes, A_res, A_u, and the
/// class rows when present).
std::string metrics_csv(const MetricsDelta& m);

} // namespace pwu
