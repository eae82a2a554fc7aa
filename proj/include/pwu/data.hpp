#pragma once

#include "pwu/net.hpp"
#include "pwu/region.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pwu {

enum class Split { train, test };

/// Samples are columns of `x`.
struct Dataset {
  Mat x;
  std::vector<int> y;
  Split split = Split::train;
  int num_classes = 0;

  Eigen::Index size() const { return x.cols(); }
  Eigen::Index dim() const { return x.rows(); }
  Dataset subset(const std::vector<int>& indices) const;
  /// Everything except `indices` (order preserved).
  Dataset without(const std::vector<int>& indices) const;
  void validate() const;
};

/// Train/test pair plus the preprocessing and input box that go with it.
struct DataBundle {
  Dataset train;
  Dataset test;
  std::optional<Standardization> standardize;
  /// Domain box in feature space (after standardization).
  Box domain;
  std::string spec;
};

/// Reads an IDX image/label pair (.gz accepted); pixels scaled to [0, 1].
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Numeric CSV with the label in column `label_column`; raw features.
Dataset load_csv(const std::filesystem::path& path, int label_column, bool header);

/// Column mean / standard deviation of the training features (scale 1 for
/// constant columns).
Standardization fit_standardization(const Dataset& train);

struct BlobOptions {
  int classes = 3;
  int per_class = 250;
  int dim = 2;
  double spread = 0.5;
  std::uint64_t seed = 7;
};

/// Gaussian blobs around means spread evenly on a radius-2 circle in the
/// first two coordinates; stratified 80/20 split.
std::pair<Dataset, Dataset> gen_blobs(const BlobOptions& options);

/// "blobs:classes=3,per_class=250,dim=2,spread=0.5,seed=7"
/// "idx:dir=data/mnist10k"
/// "csv:train=a.csv,test=b.csv,label=0,header=1"
DataBundle load_data(const std::string& spec);

/// Canonical cache format: header "label,f0,f1,..." then shortest
/// round-trip decimal values; reload is bit-exact.
void save_canonical_csv(const Dataset& data, const std::filesystem::path& path);
Dataset load_canonical_csv(const std::filesystem::path& path, Split split = Split::train);

} // namespace pwu
