// Acceptance run: one PASS/FAIL line per criterion. Tolerances and seeds
// are pinned below; the MNIST subset ships in data/mnist10k.

#include "../support/fixtures.hpp"
#include "../support/properties.hpp"

#include "pwu/data.hpp"
#include "pwu/evaluation.hpp"
#include "pwu/model_io.hpp"
#include "pwu/train.hpp"
#include "pwu/unlearning.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace pwu;
namespace fs = std::filesystem;

namespace {

// criterion 1
constexpr int kSingleRequests = 20;
constexpr std::uint64_t kSinglePickSeed = 2024;
constexpr double kSingleSecondsMax = 10.0;
// criteria 2, 3, 6
constexpr int kMnistForget = 100;
constexpr int kMnistK = 4;
constexpr double kMnistDelta = 0.9;
constexpr std::uint64_t kMnistSeed = 11;
constexpr double kMnistFlipMin = 0.9;
constexpr double kMnistDeltaAccMax = 2.0;
constexpr double kMnistTestAccInfo = 94.0;
constexpr double kMnistSecondsMax = 30 * 60;
constexpr double kMiaBeforeMin = 80.0;
constexpr double kMiaAfterMax = 10.0;
// criterion 4
constexpr int kClass = 2;
constexpr double kClassDelta = 0.95;
constexpr double kClassAuAfterMax = 1.0;
constexpr double kClassTesUDropMin = 60.0;
constexpr double kClassTesRDropMax = 5.0;
// criterion 5
constexpr std::uint64_t kPropertySeed = 20240601;
// criterion 7
constexpr int kCurveForget = 60;
constexpr double kCurveDelta = 0.9;
constexpr std::uint64_t kCurveSeed = 3;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

int failures = 0;

void verdict(int id, bool ok, const std::string& title, const std::string& detail) {
  std::printf("[%s] criterion %d: %s -- %s\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += ok ? 0 : 1;
}

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0, double e = 0) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d, e);
  return buf;
}

std::vector<int> pick(int n, int count, std::uint64_t seed) {
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<std::size_t>(count));
  std::sort(all.begin(), all.end());
  return all;
}

UnlearnRequest request_for(const PatchedModel& model, const Dataset& train, const std::vector<int>& ids) {
  UnlearnRequest req;
  const Dataset d_u = train.subset(ids);
  req.points = model.features(d_u.x);
  req.labels = d_u.y;
  req.guard = model.features(train.without(ids).x);
  return req;
}

// ---- 1 ---------------------------------------------------------------------

void criterion_single() {
  const auto& fx = testing::blob_fixture();
  const Dataset& train = fx.data.train;
  const Mat z = fx.model.features(train.x);
  const std::vector<int> before = predict_all(fx.model, train.x);
  const auto n = static_cast<int>(train.size());

  // requests are drawn among correctly classified points
  std::vector<int> eligible;
  for (int i = 0; i < n; ++i) {
    if (before[static_cast<std::size_t>(i)] == train.y[static_cast<std::size_t>(i)]) {
      eligible.push_back(i);
    }
  }
  std::vector<int> ids;
  for (int j : pick(static_cast<int>(eligible.size()), kSingleRequests, kSinglePickSeed)) {
    ids.push_back(eligible[static_cast<std::size_t>(j)]);
  }

  int flipped = 0;
  int changed = 0;
  std::size_t excluded_total = 0;
  double worst_seconds = 0.0;
  for (int id : ids) {
    const auto t0 = Clock::now();
    UnlearnRequest params;
    params.guard = fx.model.features(train.without({id}).x);
    params.seed = static_cast<std::uint64_t>(id);
    const UnlearnResult res = unlearn_single(fx.model, z.col(id), train.y[static_cast<std::size_t>(id)], params);
    worst_seconds = std::max(worst_seconds, seconds_since(t0));
    flipped += res.model.predict_features(z.col(id)) != train.y[static_cast<std::size_t>(id)];
    // guard index g maps back to training index g + (g >= id)
    std::set<int> excluded;
    for (int g : res.report.purity) {
      excluded.insert(g + (g >= id ? 1 : 0));
    }
    excluded_total += excluded.size();
    const std::vector<int> after = predict_all(res.model, train.x);
    for (int i = 0; i < n; ++i) {
      if (i != id && !excluded.count(i) && after[static_cast<std::size_t>(i)] != before[static_cast<std::size_t>(i)]) {
        ++changed;
      }
    }
  }
  const bool ok = flipped == kSingleRequests && changed == 0 && worst_seconds < kSingleSecondsMax;
  verdict(1, ok, "single-point exactness on the blob fixture",
          fmt("flipped %.0f/%.0f, prediction changes on other points %.0f, purity-excluded points %.0f (total over requests), slowest request %.3f s",
              flipped, kSingleRequests, changed, static_cast<double>(excluded_total), worst_seconds));
}

// ---- 2, 3, 6 ---------------------------------------------------------------

struct MnistRun {
  std::string model_json;
  std::string report_text;
  std::string base_json;
};

MnistRun mnist_run(const DataBundle& data, bool score) {
  const auto t_train = Clock::now();
  TrainOptions opts;
  opts.widths = {256, 256};
  opts.epochs = 20;
  opts.lr = 0.05;
  opts.batch = 32;
  opts.seed = 1;
  const PatchedModel base = PatchedModel::wrap(train_mlp(data.train.x, data.train.y, 10, opts), data.domain);
  const double train_seconds = seconds_since(t_train);

  const std::vector<int> ids = pick(static_cast<int>(data.train.size()), kMnistForget, kMnistSeed);
  UnlearnRequest req = request_for(base, data.train, ids);
  req.mode = UnlearnMode::multipoint;
  req.k = kMnistK;
  req.delta = kMnistDelta;
  req.seed = kMnistSeed;
  const auto t0 = Clock::now();
  const UnlearnResult res = unlearn(base, req);
  const double seconds = seconds_since(t0);

  MnistRun run{model_to_json(res.model), report_to_text(res.report), model_to_json(base)};
  if (!score) {
    return run;
  }
  const Dataset d_u = data.train.subset(ids);
  const Dataset d_r = data.train.without(ids);
  const MetricsDelta m = unlearn_metrics(base, res.model, d_u, d_r, data.test);
  const UnlearnReport& r = res.report;
  const bool ok = r.status == UnlearnStatus::converged && static_cast<int>(r.iterations.size()) <= 50 &&
                  r.flip_rate >= kMnistFlipMin && std::abs(m.tes.delta()) <= kMnistDeltaAccMax &&
                  std::abs(m.res.delta()) <= kMnistDeltaAccMax && seconds < kMnistSecondsMax;
  verdict(2, ok, "multipoint unlearning on the MNIST subset",
          fmt("iterations %.0f, flip rate %.4f, dA_tes %.2f, dA_res %.2f, dA_u %.2f", static_cast<double>(r.iterations.size()),
              r.flip_rate, m.tes.delta(), m.res.delta(), m.u.delta()) +
              fmt(", unlearn %.1f s (train %.1f s), base test accuracy %.2f%% (info: >= %.0f expected)", seconds, train_seconds,
                  m.tes.before, kMnistTestAccInfo));

  const double tau = mean_loss(base, data.train);
  const double mia_before = mia_recall(base, d_u, tau);
  const double mia_after = mia_recall(res.model, d_u, tau);
  verdict(3, mia_before >= kMiaBeforeMin && mia_after <= kMiaAfterMax, "membership inference on the unlearned points",
          fmt("recall before %.2f%%, after %.2f%% (threshold tau = %.5f)", mia_before, mia_after, tau));
  return run;
}

void criteria_mnist() {
  const fs::path dir = fs::path(PWU_SOURCE_DIR) / "data" / "mnist10k";
  const DataBundle data = load_data("idx:dir=" + dir.string());
  const MnistRun first = mnist_run(data, true);
  const MnistRun second = mnist_run(data, false);
  const bool same_base = first.base_json == second.base_json;
  const bool same_model = first.model_json == second.model_json;
  const bool same_report = first.report_text == second.report_text;
  verdict(6, same_base && same_model && same_report, "determinism of the MNIST run",
          std::string("trained model ") + (same_base ? "identical" : "DIFFERS") + ", patched model file " +
              (same_model ? "identical" : "DIFFERS") + fmt(" (%.0f bytes), report ", static_cast<double>(first.model_json.size())) +
              (same_report ? "identical" : "DIFFERS"));
}

// ---- 4 ---------------------------------------------------------------------

void criterion_class() {
  const auto& fx = testing::blob_fixture();
  const Dataset& train = fx.data.train;
  std::vector<int> ids;
  for (int i = 0; i < static_cast<int>(train.size()); ++i) {
    if (train.y[static_cast<std::size_t>(i)] == kClass) {
      ids.push_back(i);
    }
  }
  UnlearnRequest req = request_for(fx.model, train, ids);
  req.mode = UnlearnMode::class_;
  req.y_unlearn = kClass;
  req.delta = kClassDelta;
  req.seed = 5;
  const UnlearnResult res = unlearn(fx.model, req);
  const MetricsDelta m = unlearn_metrics(fx.model, res.model, train.subset(ids), train.without(ids), fx.data.test, kClass);
  const bool ok = m.u.after <= kClassAuAfterMax && m.tes_u->delta() >= kClassTesUDropMin &&
                  m.tes_r->delta() <= kClassTesRDropMax;
  verdict(4, ok, "class unlearning on the blob fixture",
          fmt("A_u %.2f -> %.2f, A_tes_u %.2f -> %.2f", m.u.before, m.u.after, m.tes_u->before, m.tes_u->after) +
              fmt(", A_tes_r drop %.2f, A_r drop %.2f, patches %.0f", m.tes_r->delta(), m.r->delta(),
                  static_cast<double>(res.report.patch_count)));
}

// ---- 5 ---------------------------------------------------------------------

void criterion_properties() {
  const int n = testing::kPropertyCases;
  std::vector<testing::PropertyResult> all{
      testing::prop_region(n, kPropertySeed + 1),  testing::prop_support(n, kPropertySeed + 2),
      testing::prop_patch_locality(n, kPropertySeed + 3), testing::prop_confusion(n, kPropertySeed + 4),
      testing::prop_bounds(n, kPropertySeed + 5),  testing::prop_lp_2d(n, kPropertySeed + 6)};
  bool ok = true;
  std::ostringstream detail;
  for (const auto& r : all) {
    ok = ok && r.ok() && r.cases >= n;
    detail << "\n    " << (r.ok() ? "ok  " : "FAIL") << " " << r.name << ": " << r.cases << " cases, " << r.failures
           << " failures" << (r.first_failure.empty() ? "" : " (first: " + r.first_failure + ")");
  }
  verdict(5, ok, "property suites", fmt("%.0f suites", static_cast<double>(all.size())) + detail.str());
}

// ---- 7 ---------------------------------------------------------------------

void criterion_curves(const fs::path& out_dir) {
  const auto& fx = testing::blob_fixture();
  const Dataset& train = fx.data.train;
  const std::vector<int> ids = pick(static_cast<int>(train.size()), kCurveForget, kCurveSeed);
  std::ostringstream csv;
  csv << "k,iteration,accuracy_u,residual,success\n";
  bool ok = true;
  std::ostringstream detail;
  for (int k = 2; k <= 5; ++k) {
    UnlearnRequest req = request_for(fx.model, train, ids);
    req.mode = UnlearnMode::multipoint;
    req.k = k;
    req.delta = kCurveDelta;
    req.seed = kCurveSeed;
    const UnlearnResult res = unlearn(fx.model, req);
    const UnlearnReport& r = res.report;
    int residual = r.total - static_cast<int>(r.already_misclassified.size());
    csv << k << ",0," << 100.0 * residual / r.total << "," << residual << "," << 1.0 - double(residual) / r.total << "\n";
    bool monotone = true;
    for (const IterationRecord& it : r.iterations) {
      monotone = monotone && it.residual <= residual;
      residual = it.residual;
      csv << k << "," << it.iteration << "," << 100.0 * it.residual / r.total << "," << it.residual << "," << it.success
          << "\n";
    }
    const bool reached = !r.iterations.empty() && residual <= (1.0 - kCurveDelta) * r.total;
    ok = ok && monotone && reached;
    detail << " K=" << k << ": " << r.iterations.size() << " it, final residual " << residual << "/" << r.total
           << (monotone ? "" : " NOT MONOTONE") << (reached ? "" : " ABOVE 1-delta") << ";";
  }
  const fs::path path = out_dir / "convergence_curves.csv";
  std::ofstream(path) << csv.str();
  ok = ok && fs::file_size(path) > 0;
  verdict(7, ok, "convergence curves for K in {2,3,4,5}", "plot data in " + path.string() + ";" + detail.str());
}

} // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  const fs::path out_dir = argc > 1 ? fs::path(argv[1]) : fs::current_path();
  fs::create_directories(out_dir);
  const std::vector<std::pair<int, std::function<void()>>> runs{
      {1, criterion_single},
      {4, criterion_class},
      {5, criterion_properties},
      {7, [&] { criterion_curves(out_dir); }},
      {2, criteria_mnist}, // also reports 3 and 6
  };
  for (const auto& [id, run] : runs) {
    try {
      run();
    } catch (const std::exception& e) {
      verdict(id, false, "aborted", e.what());
    }
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
