#pragma once

#include "pwu/patched_model.hpp"
#include "pwu/patching.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pwu {

enum class UnlearnMode { single, multipoint, class_ };
enum class UnlearnStatus { converged, not_converged, nothing_to_do };

std::string to_string(UnlearnMode mode);
std::string to_string(UnlearnStatus status);

/// Support sharpness: start at `initial`, multiply by `factor` while guard
/// points sit in the ramp band, never beyond `max`.
struct LambdaPolicy {
  double initial = 1e4;
  double max = 1e8;
  double factor = 10.0;
};

struct UnlearnRequest {
  UnlearnMode mode = UnlearnMode::multipoint;
  /// Points to forget, in feature space, one per column.
  Mat points;
  std::vector<int> labels;
  std::optional<int> y_unlearn;
  double delta = 0.9;
  int k = 1;
  LambdaPolicy lambda;
  double epsilon = 1e-3;
  ConfusionMode confusion = ConfusionMode::constant;
  std::uint64_t seed = 0;
  int max_iterations = 50;
  /// Retained points (feature space, columns) used to pick lambda and to
  /// report points that share a support region. May be empty.
  Mat guard;

  void validate(int num_classes, Eigen::Index dim) const;
};

struct IterationRecord {
  int iteration = 0;
  int clusters = 0;
  int patches = 0;
  int supports = 0;
  int flipped = 0;
  int residual = 0;
  double success = 0.0;
};

struct SupportRecord {
  int iteration = 0;
  int patch = 0;
  /// Index into the request's points.
  int point = 0;
  double lambda = 0.0;
  double radius = 0.0;
  int constraints = 0;
  /// Guard points still inside the ramp band at the final lambda.
  int band = 0;
};

struct UnlearnReport {
  UnlearnMode mode = UnlearnMode::multipoint;
  UnlearnStatus status = UnlearnStatus::nothing_to_do;
  int total = 0;
  double delta = 0.0;
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<int> already_misclassified;
  std::vector<IterationRecord> iterations;
  std::vector<int> flipped;
  std::vector<int> residual;
  double flip_rate = 0.0;
  int patch_count = 0;
  int support_count = 0;
  int failed_clusters = 0;
  std::vector<SupportRecord> supports;
  /// Guard indices lying inside some support region (their outputs may
  /// change; locality claims exclude them).
  std::vector<int> purity;
  /// Guard indices left inside a ramp band at the largest lambda.
  std::vector<int> band;
  /// Wall-clock seconds per phase; kept out of the report text so reports
  /// are reproducible byte for byte.
  std::vector<std::pair<std::string, double>> timings;
};

struct KMeansResult {
  std::vector<int> assignment;
  Mat centers;
  /// Member nearest to each center (-1 for an empty cluster).
  std::vector<int> representatives;
  int iterations = 0;
};

/// k-means++ seeding then Lloyd until the assignment is stable (at most 100
/// rounds); centers are finally snapped to their nearest member.
KMeansResult kmeans(const Mat& points, int k, std::uint64_t seed);

/// Member with the smallest summed Euclidean distance to the others.
int medoid(const Mat& points);

struct UnlearnResult {
  PatchedModel model;
  UnlearnReport report;
};

UnlearnResult unlearn(const PatchedModel& model, const UnlearnRequest& request);

/// Convenience wrapper for one point; `params` supplies everything but the point.
UnlearnResult unlearn_single(const PatchedModel& model, const Vec& z, int label,
                             UnlearnRequest params = {});

/// Line-oriented report: "key,value" header, then [section] blocks of CSV.
std::string report_to_text(const UnlearnReport& report);
UnlearnReport report_from_text(const std::string& text);
std::string timings_csv(const UnlearnReport& report);

} // namespace pwu
