#include "pwu/train.hpp"

#include "pwu/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace pwu {

MlpNetwork init_mlp(Eigen::Index input_dim, const std::vector<int>& widths, int num_classes,
                    std::uint64_t seed) {
  if (input_dim < 1 || num_classes < 2) {
    throw ValidationError("network needs input_dim >= 1 and at least two classes");
  }
  std::mt19937_64 rng(seed);
  std::vector<AffineLayer> layers;
  Eigen::Index fan_in = input_dim;
  auto make = [&](Eigen::Index out) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    AffineLayer layer{Mat(out, fan_in), Vec::Zero(out)};
    for (Eigen::Index i = 0; i < out; ++i) {
      for (Eigen::Index j = 0; j < fan_in; ++j) {
        layer.weight(i, j) = u(rng);
      }
    }
    layers.push_back(std::move(layer));
    fan_in = out;
  };
  for (int w : widths) {
    if (w < 1) {
      throw ValidationError("hidden widths must be positive");
    }
    make(w);
  }
  make(num_classes);
  return MlpNetwork(std::move(layers));
}

Vec cross_entropy(const Mat& logits, const std::vector<int>& y) {
  Vec loss(logits.cols());
  for (Eigen::Index i = 0; i < logits.cols(); ++i) {
    const double top = logits.col(i).maxCoeff();
    const double lse = top + std::log((logits.col(i).array() - top).exp().sum());
    loss[i] = lse - logits(y[static_cast<std::size_t>(i)], i);
  }
  return loss;
}

MlpNetwork train_mlp(const Mat& x, const std::vector<int>& y, int num_classes,
                     const TrainOptions& o, const EpochCallback& on_epoch) {
  if (static_cast<std::size_t>(x.cols()) != y.size() || x.cols() == 0) {
    throw ValidationError("training needs a non-empty feature matrix with one label per column");
  }
  if (o.epochs < 0 || o.batch < 1 || !(o.lr > 0.0) || o.momentum < 0.0 || o.momentum >= 1.0) {
    throw ValidationError("invalid training hyper-parameters");
  }
  for (int label : y) {
    if (label < 0 || label >= num_classes) {
      throw ValidationError("training label out of range");
    }
  }
  MlpNetwork init = init_mlp(x.rows(), o.widths, num_classes, o.seed);
  std::vector<AffineLayer> layers = init.layers();
  const std::size_t depth = layers.size();
  std::vector<Mat> vel_w;
  std::vector<Vec> vel_b;
  for (const auto& l : layers) {
    vel_w.push_back(Mat::Zero(l.weight.rows(), l.weight.cols()));
    vel_b.push_back(Vec::Zero(l.bias.size()));
  }

  std::mt19937_64 shuffle_rng(o.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<int> order(y.size());
  std::iota(order.begin(), order.end(), 0);
  const Eigen::Index n = x.cols();

  std::vector<Mat> acts(depth + 1);
  for (int epoch = 0; epoch < o.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (Eigen::Index start = 0; start < n; start += o.batch) {
      const Eigen::Index bs = std::min<Eigen::Index>(o.batch, n - start);
      Mat& in = acts[0];
      in.resize(x.rows(), bs);
      std::vector<int> yb(static_cast<std::size_t>(bs));
      for (Eigen::Index j = 0; j < bs; ++j) {
        const int idx = order[static_cast<std::size_t>(start + j)];
        in.col(j) = x.col(idx);
        yb[static_cast<std::size_t>(j)] = y[static_cast<std::size_t>(idx)];
      }
      for (std::size_t k = 0; k < depth; ++k) {
        Mat z = layers[k].weight * acts[k];
        z.colwise() += layers[k].bias;
        acts[k + 1] = k + 1 < depth ? Mat(z.cwiseMax(0.0)) : z;
      }
      // softmax gradient
      Mat grad = acts[depth];
      for (Eigen::Index j = 0; j < bs; ++j) {
        const double top = grad.col(j).maxCoeff();
        grad.col(j) = (grad.col(j).array() - top).exp().matrix();
        const double total = grad.col(j).sum();
        const double p_true = grad(yb[static_cast<std::size_t>(j)], j) / total;
        loss_sum -= std::log(std::max(p_true, 1e-300));
        grad.col(j) /= total;
        grad(yb[static_cast<std::size_t>(j)], j) -= 1.0;
      }
      grad /= static_cast<double>(bs);
      for (std::size_t k = depth; k-- > 0;) {
        const Mat gw = grad * acts[k].transpose();
        const Vec gb = grad.rowwise().sum();
        if (k > 0) {
          grad = layers[k].weight.transpose() * grad;
          grad = grad.cwiseProduct((acts[k].array() > 0.0).cast<double>().matrix());
        }
        vel_w[k] = o.momentum * vel_w[k] - o.lr * gw;
        vel_b[k] = o.momentum * vel_b[k] - o.lr * gb;
        layers[k].weight += vel_w[k];
        layers[k].bias += vel_b[k];
      }
    }
    const double mean_loss = loss_sum / static_cast<double>(n);
    if (!std::isfinite(mean_loss)) {
      throw NumericError("training diverged (non-finite loss) in epoch " + std::to_string(epoch));
    }
    if (on_epoch) {
      on_epoch(epoch, mean_loss);
    }
  }
  return MlpNetwork(std::move(layers));
}

} // namespace pwu
