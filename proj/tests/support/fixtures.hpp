#pragma once

#include "pwu/data.hpp"
#include "pwu/net.hpp"
#include "pwu/patched_model.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace pwu::testing {

/// Random ReLU net with N(0,1) weights and N(0,0.5) biases.
MlpNetwork random_net(std::mt19937_64& rng, Eigen::Index input_dim, const std::vector<int>& widths,
                      int classes);

/// Uniform point in the box.
Vec uniform_in(const Box& box, std::mt19937_64& rng);

/// Symmetric box [-half, half]^dim.
Box centered_box(Eigen::Index dim, double half);

/// The pinned desk fixture: 3 blobs, 250 per class, dim 2, spread 0.5,
/// seed 7; [16,16] net trained 50 epochs (lr 0.05, batch 32, seed 1).
struct BlobFixture {
  DataBundle data;
  PatchedModel model;
};
const BlobFixture& blob_fixture();

/// Features of a whole dataset in model space.
Mat features(const PatchedModel& model, const Dataset& d);

} // namespace pwu::testing
