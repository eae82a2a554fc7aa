#include <doctest.h>

#include "../support/fixtures.hpp"

#include "pwu/errors.hpp"
#include "pwu/geometry.hpp"
#include "pwu/model_io.hpp"
#include "pwu/unlearning.hpp"

#include <set>

using namespace pwu;

namespace {

Mat cols(std::initializer_list<std::pair<double, double>> pts) {
  Mat m(2, static_cast<Eigen::Index>(pts.size()));
  Eigen::Index j = 0;
  for (auto [a, b] : pts) {
    m(0, j) = a;
    m(1, j) = b;
    ++j;
  }
  return m;
}

const testing::BlobFixture& fx() { return testing::blob_fixture(); }

Mat train_features() { return testing::features(fx().model, fx().data.train); }

} // namespace

TEST_CASE("k-means on two separated pairs") {
  const Mat pts = cols({{0, 0}, {0, 0.1}, {10, 10}, {10, 10.1}});
  const KMeansResult km = kmeans(pts, 2, 3);
  CHECK(km.assignment[0] == km.assignment[1]);
  CHECK(km.assignment[2] == km.assignment[3]);
  CHECK(km.assignment[0] != km.assignment[2]);
  // both members of a pair are equidistant from its mean
  const int near_origin = km.representatives[static_cast<std::size_t>(km.assignment[0])];
  const int far = km.representatives[static_cast<std::size_t>(km.assignment[2])];
  CHECK((near_origin == 0 || near_origin == 1));
  CHECK((far == 2 || far == 3));
  CHECK(kmeans(pts, 2, 3).assignment == km.assignment);
}

TEST_CASE("k-means edge cases") {
  const Mat pts = cols({{0, 0}, {1, 0}, {5, 0}});
  const KMeansResult one = kmeans(pts, 1, 0);
  // mean (2,0) -> nearest member is (1,0)
  CHECK(one.representatives == std::vector<int>{1});
  const KMeansResult all = kmeans(pts, 3, 0);
  std::set<int> reps(all.representatives.begin(), all.representatives.end());
  CHECK(reps == std::set<int>{0, 1, 2});
  CHECK_THROWS_AS(kmeans(pts, 4, 0), ValidationError);
}

TEST_CASE("medoid") {
  CHECK(medoid(cols({{0, 0}, {1, 0}, {5, 0}})) == 1);
  CHECK(medoid(cols({{3, 3}})) == 0);
}

TEST_CASE("request validation") {
  UnlearnRequest r;
  r.points = cols({{0, 0}});
  r.labels = {0};
  CHECK_NOTHROW(r.validate(3, 2));
  r.delta = 0.0;
  CHECK_THROWS_AS(r.validate(3, 2), ValidationError);
  r.delta = 0.9;
  r.k = 0;
  CHECK_THROWS_AS(r.validate(3, 2), ValidationError);
  r.k = 1;
  r.mode = UnlearnMode::class_;
  CHECK_THROWS_AS(r.validate(3, 2), ValidationError); // y_unlearn missing
  r.y_unlearn = 1;
  CHECK_THROWS_AS(r.validate(3, 2), ValidationError); // label mismatch
  r.y_unlearn = 0;
  CHECK_NOTHROW(r.validate(3, 2));
  CHECK_THROWS_AS(r.validate(3, 3), ShapeError);
}

TEST_CASE("single-point unlearning flips the point and nothing else") {
  const PatchedModel& model = fx().model;
  const Mat z = train_features();
  const auto& y = fx().data.train.y;
  UnlearnRequest params;
  params.guard = z;
  params.seed = 4;
  const int idx = 17;
  REQUIRE(model.predict_features(z.col(idx)) == y[idx]);
  const UnlearnResult res = unlearn_single(model, z.col(idx), y[idx], params);
  CHECK(res.report.status == UnlearnStatus::converged);
  CHECK(res.model.predict_features(z.col(idx)) != y[idx]);
  std::set<int> excluded(res.report.purity.begin(), res.report.purity.end());
  excluded.insert(res.report.band.begin(), res.report.band.end());
  CHECK(excluded.count(idx) == 1);
  int changed = 0;
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    if (i != idx && !excluded.count(static_cast<int>(i))) {
      changed += res.model.logits(z.col(i)) != model.logits(z.col(i));
    }
  }
  CHECK(changed == 0);
}

TEST_CASE("already misclassified points are a no-op") {
  const PatchedModel& model = fx().model;
  const Vec z = train_features().col(0);
  const int wrong = (model.predict_features(z) + 1) % 3;
  const UnlearnResult res = unlearn_single(model, z, wrong);
  CHECK(res.report.status == UnlearnStatus::nothing_to_do);
  CHECK(res.model.patches.empty());
  CHECK(res.report.flip_rate == 1.0);
  CHECK(res.report.iterations.empty());
}

TEST_CASE("duplicates are reported as purity findings") {
  const PatchedModel& model = fx().model;
  const Mat z = train_features();
  Mat guard(2, 3);
  guard.col(0) = z.col(5);
  guard.col(1) = z.col(5);
  guard.col(2) = z.col(300);
  UnlearnRequest params;
  params.guard = guard;
  const UnlearnResult res = unlearn_single(model, z.col(5), fx().data.train.y[5], params);
  CHECK(std::set<int>(res.report.purity.begin(), res.report.purity.end()).count(1) == 1);
}

TEST_CASE("multipoint with one point reduces to single") {
  const PatchedModel& model = fx().model;
  const Mat z = train_features();
  UnlearnRequest req;
  req.mode = UnlearnMode::multipoint;
  req.points = z.col(42);
  req.labels = {fx().data.train.y[42]};
  req.k = 1;
  req.seed = 9;
  req.guard = z;
  const UnlearnResult multi = unlearn(model, req);
  const UnlearnResult single = unlearn_single(model, z.col(42), req.labels[0], req);
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    CHECK(multi.model.logits(z.col(i)) == single.model.logits(z.col(i)));
  }
}

TEST_CASE("multipoint accounting and determinism") {
  const PatchedModel& model = fx().model;
  const Mat z = train_features();
  const auto& y = fx().data.train.y;
  UnlearnRequest req;
  req.mode = UnlearnMode::multipoint;
  std::vector<int> ids;
  for (int i = 0; i < 30; ++i) {
    ids.push_back(i * 19 % static_cast<int>(z.cols()));
  }
  req.points = Mat(2, static_cast<Eigen::Index>(ids.size()));
  for (std::size_t j = 0; j < ids.size(); ++j) {
    req.points.col(static_cast<Eigen::Index>(j)) = z.col(ids[j]);
    req.labels.push_back(y[static_cast<std::size_t>(ids[j])]);
  }
  req.k = 3;
  req.delta = 0.9;
  req.seed = 5;
  req.guard = z;
  const UnlearnResult a = unlearn(model, req);
  const UnlearnReport& rep = a.report;
  CHECK(rep.status == UnlearnStatus::converged);
  CHECK(rep.flip_rate > 0.9);
  CHECK(rep.flipped.size() + rep.residual.size() == ids.size());
  std::set<int> all(rep.flipped.begin(), rep.flipped.end());
  all.insert(rep.residual.begin(), rep.residual.end());
  CHECK(all.size() == ids.size());
  for (int i : rep.flipped) {
    CHECK(a.model.predict_features(req.points.col(i)) != req.labels[static_cast<std::size_t>(i)]);
  }
  double last = 0.0;
  for (const IterationRecord& r : rep.iterations) {
    CHECK(r.success >= last);
    last = r.success;
  }
  // only the final iteration may exceed delta
  for (std::size_t i = 0; i + 1 < rep.iterations.size(); ++i) {
    CHECK(rep.iterations[i].success <= req.delta);
  }

  const UnlearnResult b = unlearn(model, req);
  CHECK(model_to_json(a.model) == model_to_json(b.model));
  CHECK(report_to_text(a.report) == report_to_text(b.report));
}

TEST_CASE("non-convergence is reported with partial results") {
  const PatchedModel& model = fx().model;
  const Mat z = train_features();
  UnlearnRequest req;
  req.mode = UnlearnMode::multipoint;
  // one cluster spanning every class cannot flip all of them with one shift
  req.points = Mat(2, 20);
  for (int j = 0; j < 20; ++j) {
    const int i = j * 29 % static_cast<int>(z.cols());
    req.points.col(j) = z.col(i);
    req.labels.push_back(fx().data.train.y[static_cast<std::size_t>(i)]);
  }
  req.k = 1;
  req.delta = 1.0;
  req.max_iterations = 1;
  req.seed = 2;
  const UnlearnResult res = unlearn(model, req);
  CHECK(res.report.iterations.size() == 1);
  REQUIRE_FALSE(res.report.residual.empty());
  CHECK(res.report.status == UnlearnStatus::not_converged);
  CHECK(res.report.flipped.size() + res.report.residual.size() == 20);
  CHECK(res.report.patch_count == 1);
}

TEST_CASE("class mode on a single member") {
  const PatchedModel& model = fx().model;
  const Mat z = train_features();
  const int y = fx().data.train.y[8];
  UnlearnRequest req;
  req.mode = UnlearnMode::class_;
  req.points = z.col(8);
  req.labels = {y};
  req.y_unlearn = y;
  req.seed = 1;
  const UnlearnResult res = unlearn(model, req);
  CHECK(res.report.status == UnlearnStatus::converged);
  CHECK(res.model.predict_features(z.col(8)) != y);
  REQUIRE(res.report.supports.size() == 1);
  CHECK(res.report.supports[0].radius > 0.0);
}

TEST_CASE("report text round-trip") {
  UnlearnReport r;
  r.mode = UnlearnMode::class_;
  r.status = UnlearnStatus::converged;
  r.total = 3;
  r.delta = 0.95;
  r.k = 1;
  r.seed = 77;
  r.already_misclassified = {2};
  r.iterations.push_back({1, 1, 1, 2, 3, 0, 1.0});
  r.flipped = {0, 1, 2};
  r.flip_rate = 1.0;
  r.patch_count = 1;
  r.support_count = 2;
  r.supports.push_back({1, 0, 0, 1e5, 0.125, 32, 0});
  r.supports.push_back({1, 0, 1, 1e4, 0.1 + 0.2, 32, 1});
  r.purity = {4, 9};
  r.band = {9};
  r.timings = {{"confusion", 1.5}};
  const std::string text = report_to_text(r);
  const UnlearnReport back = report_from_text(text);
  CHECK(report_to_text(back) == text);
  CHECK(back.supports[1].radius == 0.1 + 0.2);
  CHECK(back.timings.empty()); // timings live in a sidecar
  CHECK(timings_csv(r).find("confusion") != std::string::npos);
  CHECK_THROWS_AS(report_from_text("garbage"), ParseError);
}
