#include "fixtures.hpp"

#include "pwu/train.hpp"

namespace pwu::testing {

MlpNetwork random_net(std::mt19937_64& rng, Eigen::Index input_dim, const std::vector<int>& widths,
                      int classes) {
  std::normal_distribution<double> w(0.0, 1.0);
  std::normal_distribution<double> b(0.0, 0.5);
  std::vector<AffineLayer> layers;
  Eigen::Index fan_in = input_dim;
  std::vector<int> dims = widths;
  dims.push_back(classes);
  for (int out : dims) {
    AffineLayer l{Mat(out, fan_in), Vec(out)};
    for (Eigen::Index i = 0; i < out; ++i) {
      for (Eigen::Index j = 0; j < fan_in; ++j) {
        l.weight(i, j) = w(rng);
      }
      l.bias[i] = b(rng);
    }
    layers.push_back(std::move(l));
    fan_in = out;
  }
  return MlpNetwork(std::move(layers));
}

Vec uniform_in(const Box& box, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec x(box.dim());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x[i] = box.lo[i] + u(rng) * (box.hi[i] - box.lo[i]);
  }
  return x;
}

Box centered_box(Eigen::Index dim, double half) {
  return Box{Vec::Constant(dim, -half), Vec::Constant(dim, half)};
}

const BlobFixture& blob_fixture() {
  static const BlobFixture fixture = [] {
    BlobFixture f;
    f.data = load_data("blobs:classes=3,per_class=250,dim=2,spread=0.5,seed=7");
    TrainOptions opts;
    opts.widths = {16, 16};
    opts.epochs = 50;
    opts.lr = 0.05;
    opts.batch = 32;
    opts.seed = 1;
    f.model = PatchedModel::wrap(train_mlp(f.data.train.x, f.data.train.y, 3, opts), f.data.domain);
    return f;
  }();
  return fixture;
}

Mat features(const PatchedModel& model, const Dataset& d) { return model.features(d.x); }

} // namespace pwu::testing
