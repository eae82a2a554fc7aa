#include "pwu/evaluation.hpp"

#include "pwu/errors.hpp"
#include "pwu/train.hpp"

#include <cstdio>

namespace pwu {

std::vector<int> predict_all(const PatchedModel& model, const Mat& raw) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(raw.cols()));
  for (Eigen::Index i = 0; i < raw.cols(); ++i) {
    out.push_back(model.predict(raw.col(i)));
  }
  return out;
}

double accuracy(const PatchedModel& model, const Dataset& data) {
  if (data.size() == 0) {
    throw ValidationError("accuracy of an empty dataset is undefined");
  }
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    if (model.predict(data.x.col(i)) == data.y[static_cast<std::size_t>(i)]) {
      ++correct;
    }
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(data.size());
}

Vec sample_losses(const PatchedModel& model, const Dataset& data) {
  Mat logits(model.num_classes(), data.size());
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    logits.col(i) = model.forward(data.x.col(i));
  }
  return cross_entropy(logits, data.y);
}

double mean_loss(const PatchedModel& model, const Dataset& data) {
  if (data.size() == 0) {
    throw ValidationError("mean loss of an empty dataset is undefined");
  }
  return sample_losses(model, data).mean();
}

double mia_recall(const PatchedModel& model, const Dataset& data, double tau) {
  if (data.size() == 0) {
    return 0.0;
  }
  const Vec loss = sample_losses(model, data);
  const auto members = (loss.array() <= tau).count();
  return 100.0 * static_cast<double>(members) / static_cast<double>(data.size());
}

namespace {

AccuracyPair pair_of(const PatchedModel& before, const PatchedModel& after, const Dataset& d) {
  if (d.size() == 0) {
    return {};
  }
  return {accuracy(before, d), accuracy(after, d)};
}

std::vector<int> label_indices(const Dataset& d, int label, bool equal) {
  std::vector<int> idx;
  for (int i = 0; i < d.size(); ++i) {
    if ((d.y[static_cast<std::size_t>(i)] == label) == equal) {
      idx.push_back(i);
    }
  }
  return idx;
}

} // namespace

MetricsDelta unlearn_metrics(const PatchedModel& before, const PatchedModel& after,
                             const Dataset& d_u, const Dataset& d_r, const Dataset& test,
                             std::optional<int> y_unlearn) {
  if (test.size() == 0) {
    throw ValidationError("metrics need a non-empty test set");
  }
  MetricsDelta m;
  m.tes = pair_of(before, after, test);
  m.res = pair_of(before, after, d_r);
  m.u = pair_of(before, after, d_u);
  if (y_unlearn) {
    if (*y_unlearn < 0 || *y_unlearn >= before.num_classes()) {
      throw ValidationError("y_unlearn out of range");
    }
    m.y_unlearn = y_unlearn;
    m.tes_u = pair_of(before, after, test.subset(label_indices(test, *y_unlearn, true)));
    m.tes_r = pair_of(before, after, test.subset(label_indices(test, *y_unlearn, false)));
    m.r = pair_of(before, after, d_r.subset(label_indices(d_r, *y_unlearn, false)));
  }
  return m;
}

std::string metrics_csv(const MetricsDelta& m) {
  std::string out = "metric,before,after,delta\n";
  auto row = [&](const char* name, const AccuracyPair& p) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,%.4f,%.4f,%.4f\n", name, p.before, p.after, p.delta());
    out += buf;
  };
  row("A_tes", m.tes);
  row("A_res", m.res);
  row("A_u", m.u);
  if (m.tes_u) {
    row("A_tes_u", *m.tes_u);
  }
  if (m.tes_r) {
    row("A_tes_r", *m.tes_r);
  }
  if (m.r) {
    row("A_r", *m.r);
  }
  return out;
}

} // namespace pwu
