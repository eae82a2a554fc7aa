#pragma once

#include "pwu/data.hpp"
#include "pwu/net.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace pwu {

struct TrainOptions {
  std::vector<int> widths{16, 16};
  int epochs = 50;
  double lr = 0.05;
  int batch = 32;
  double momentum = 0.9;
  std::uint64_t seed = 1;
};

/// Called after every epoch with (epoch, mean training loss).
using EpochCallback = std::function<void(int, double)>;

/// He-uniform init, minibatch SGD with momentum on softmax cross-entropy.
/// Single-threaded and bit-reproducible for a given seed. `x` holds one
/// feature vector per column.
MlpNetwork train_mlp(const Mat& x, const std::vector<int>& y, int num_classes,
                     const TrainOptions& options, const EpochCallback& on_epoch = {});

MlpNetwork init_mlp(Eigen::Index input_dim, const std::vector<int>& widths, int num_classes,
                    std::uint64_t seed);

/// Row i: cross-entropy of softmax(logits column i) against y[i].
Vec cross_entropy(const Mat& logits, const std::vector<int>& y);

} // namespace pwu
