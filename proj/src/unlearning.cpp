#include "pwu/unlearning.hpp"

#include "pwu/bounds.hpp"
#include "pwu/errors.hpp"
#include "pwu/geometry.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace pwu {

std::string to_string(UnlearnMode mode) {
  switch (mode) {
  case UnlearnMode::single:
    return "single";
  case UnlearnMode::multipoint:
    return "multipoint";
  case UnlearnMode::class_:
    return "class";
  }
  return "?";
}

std::string to_string(UnlearnStatus status) {
  switch (status) {
  case UnlearnStatus::converged:
    return "converged";
  case UnlearnStatus::not_converged:
    return "not_converged";
  case UnlearnStatus::nothing_to_do:
    return "nothing_to_do";
  }
  return "?";
}

void UnlearnRequest::validate(int num_classes, Eigen::Index dim) const {
  if (points.cols() == 0) {
    throw ValidationError("unlearn request has no points");
  }
  if (points.rows() != dim) {
    throw ShapeError("unlearn points have dimension " + std::to_string(points.rows()) +
                     ", model features have " + std::to_string(dim));
  }
  if (static_cast<std::size_t>(points.cols()) != labels.size()) {
    throw ValidationError("unlearn request needs one label per point");
  }
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw ValidationError("unlearn label " + std::to_string(y) + " out of range");
    }
  }
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw ValidationError("delta must lie in (0, 1]");
  }
  if (k < 1) {
    throw ValidationError("cluster count K must be at least 1");
  }
  if (max_iterations < 1) {
    throw ValidationError("max_iterations must be positive");
  }
  if (!(epsilon > 0.0)) {
    throw ValidationError("margin epsilon must be positive");
  }
  if (!(lambda.initial > 0.0) || lambda.max < lambda.initial || !(lambda.factor > 1.0)) {
    throw ValidationError("lambda policy needs 0 < initial <= max and factor > 1");
  }
  if (guard.cols() > 0 && guard.rows() != dim) {
    throw ShapeError("guard points have the wrong dimension");
  }
  if (mode == UnlearnMode::single && points.cols() != 1) {
    throw ValidationError("single mode takes exactly one point");
  }
  if (mode == UnlearnMode::class_) {
    if (!y_unlearn) {
      throw ValidationError("class mode needs y_unlearn");
    }
    for (int y : labels) {
      if (y != *y_unlearn) {
        throw ValidationError("class mode: every point must carry label y_unlearn=" +
                              std::to_string(*y_unlearn));
      }
    }
  }
}

// ---- clustering ----------------------------------------------------------

namespace {

int nearest(const Mat& centers, const Vec& x) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centers.cols(); ++c) {
    const double d = (centers.col(c) - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

} // namespace

KMeansResult kmeans(const Mat& points, int k, std::uint64_t seed) {
  const Eigen::Index n = points.cols();
  if (k < 1) {
    throw ValidationError("k-means needs K >= 1");
  }
  if (k > n) {
    throw ValidationError("k-means: K=" + std::to_string(k) + " exceeds the " +
                          std::to_string(n) + " available points");
  }
  std::mt19937_64 rng(seed);
  KMeansResult r;
  r.centers.resize(points.rows(), k);
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  {
    std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
    const Eigen::Index f = first(rng);
    r.centers.col(0) = points.col(f);
    chosen[static_cast<std::size_t>(f)] = 1;
  }
  std::vector<double> dist(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    dist[static_cast<std::size_t>(i)] = (points.col(i) - r.centers.col(0)).squaredNorm();
  }
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : dist) {
      total += d;
    }
    Eigen::Index pick = -1;
    if (total > 0.0) {
      std::discrete_distribution<Eigen::Index> dd(dist.begin(), dist.end());
      pick = dd(rng);
    } else {
      // every point coincides with a center: take the first unused one
      for (Eigen::Index i = 0; i < n && pick < 0; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) {
          pick = i;
        }
      }
    }
    chosen[static_cast<std::size_t>(pick)] = 1;
    r.centers.col(c) = points.col(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      dist[static_cast<std::size_t>(i)] =
          std::min(dist[static_cast<std::size_t>(i)], (points.col(i) - r.centers.col(c)).squaredNorm());
    }
  }

  r.assignment.assign(static_cast<std::size_t>(n), -1);
  for (int round = 0; round < 100; ++round) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int a = nearest(r.centers, points.col(i));
      if (a != r.assignment[static_cast<std::size_t>(i)]) {
        r.assignment[static_cast<std::size_t>(i)] = a;
        changed = true;
      }
    }
    r.iterations = round + 1;
    if (!changed) {
      break;
    }
    Mat sums = Mat::Zero(points.rows(), k);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int a = r.assignment[static_cast<std::size_t>(i)];
      sums.col(a) += points.col(i);
      ++counts[static_cast<std::size_t>(a)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        r.centers.col(c) = sums.col(c) / counts[static_cast<std::size_t>(c)];
      }
    }
  }

  r.representatives.assign(static_cast<std::size_t>(k), -1);
  std::vector<double> best(static_cast<std::size_t>(k), std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < n; ++i) {
    const int a = r.assignment[static_cast<std::size_t>(i)];
    const double d = (points.col(i) - r.centers.col(a)).squaredNorm();
    if (d < best[static_cast<std::size_t>(a)]) {
      best[static_cast<std::size_t>(a)] = d;
      r.representatives[static_cast<std::size_t>(a)] = static_cast<int>(i);
    }
  }
  return r;
}

int medoid(const Mat& points) {
  if (points.cols() == 0) {
    throw ValidationError("medoid of an empty set");
  }
  int best = 0;
  double best_sum = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      sum += (points.col(i) - points.col(j)).norm();
    }
    if (sum < best_sum) {
      best_sum = sum;
      best = static_cast<int>(i);
    }
  }
  return best;
}

// ---- the loop --------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

class PhaseTimer {
public:
  void add(const std::string& phase, Clock::time_point start) {
    totals_[phase] += std::chrono::duration<double>(Clock::now() - start).count();
  }
  std::vector<std::pair<std::string, double>> list() const {
    return {totals_.begin(), totals_.end()};
  }

private:
  std::map<std::string, double> totals_;
};

/// Min slack per guard column, computed a block of constraints at a time and
/// abandoning columns once they fall to `floor`.
Vec guard_min_slack(const RowMat& a, const Vec& b, const Mat& guard, double floor) {
  const Eigen::Index n = guard.cols();
  Vec lowest = Vec::Constant(n, std::numeric_limits<double>::infinity());
  std::vector<Eigen::Index> live(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    live[static_cast<std::size_t>(i)] = i;
  }
  constexpr Eigen::Index kBlock = 32;
  for (Eigen::Index start = 0; start < a.rows() && !live.empty(); start += kBlock) {
    const Eigen::Index rows = std::min(kBlock, a.rows() - start);
    Mat cols(guard.rows(), static_cast<Eigen::Index>(live.size()));
    for (std::size_t j = 0; j < live.size(); ++j) {
      cols.col(static_cast<Eigen::Index>(j)) = guard.col(live[j]);
    }
    const Mat prod = a.middleRows(start, rows) * cols;
    std::vector<Eigen::Index> still;
    for (std::size_t j = 0; j < live.size(); ++j) {
      const Eigen::Index g = live[j];
      for (Eigen::Index r = 0; r < rows; ++r) {
        lowest[g] = std::min(lowest[g], b[start + r] - prod(r, static_cast<Eigen::Index>(j)));
      }
      if (lowest[g] > floor) {
        still.push_back(g);
      }
    }
    live.swap(still);
  }
  return lowest;
}

struct LambdaChoice {
  double lambda = 0.0;
  std::vector<int> inside;
  std::vector<int> band;
};

LambdaChoice choose_lambda(const LinearRegion& region, const Mat& guard, const LambdaPolicy& policy) {
  LambdaChoice out;
  out.lambda = policy.initial;
  if (guard.cols() == 0) {
    return out;
  }
  const Vec ms = guard_min_slack(region.a, region.b, guard, -1.0 / policy.initial);
  std::vector<int> candidates;
  for (Eigen::Index i = 0; i < ms.size(); ++i) {
    if (ms[i] >= 0.0) {
      out.inside.push_back(static_cast<int>(i));
    } else if (ms[i] > -1.0 / policy.initial) {
      candidates.push_back(static_cast<int>(i));
    }
  }
  SupportNetwork probe = support_from_region(region, policy.initial);
  auto in_band = [&](double lambda) {
    probe.lambda = lambda;
    std::vector<int> band;
    for (int g : candidates) {
      if (support_eval(probe, guard.col(g)) > 0.0) {
        band.push_back(g);
      }
    }
    return band;
  };
  out.band = in_band(out.lambda);
  while (!out.band.empty() && out.lambda * policy.factor <= policy.max) {
    out.lambda *= policy.factor;
    out.band = in_band(out.lambda);
  }
  return out;
}

struct Cluster {
  int representative = -1; // index into request points
  std::vector<int> members;
};

} // namespace

UnlearnResult unlearn(const PatchedModel& model, const UnlearnRequest& req) {
  model.validate();
  req.validate(model.num_classes(), model.feature_dim());
  const int classes = model.num_classes();
  const int total = static_cast<int>(req.points.cols());

  UnlearnResult result{model, {}};
  PatchedModel& current = result.model;
  UnlearnReport& rep = result.report;
  rep.mode = req.mode;
  rep.total = total;
  rep.delta = req.delta;
  rep.k = req.mode == UnlearnMode::multipoint ? req.k : 1;
  rep.seed = req.seed;

  PhaseTimer timer;
  std::mt19937_64 label_rng(req.seed);
  std::set<int> purity;
  std::set<int> band;

  std::vector<int> residual;
  for (int i = 0; i < total; ++i) {
    if (current.predict_features(req.points.col(i)) != req.labels[static_cast<std::size_t>(i)]) {
      rep.already_misclassified.push_back(i);
    } else {
      residual.push_back(i);
    }
  }
  if (residual.empty()) {
    rep.status = UnlearnStatus::nothing_to_do;
    for (int i = 0; i < total; ++i) {
      rep.flipped.push_back(i);
    }
    rep.flip_rate = 1.0;
    rep.timings = timer.list();
    spdlog::warn("all {} requested points are already misclassified; nothing to unlearn", total);
    return result;
  }
  const std::vector<int> targets = residual;

  rep.status = UnlearnStatus::not_converged;
  for (int it = 1; it <= req.max_iterations; ++it) {
    // 1. representatives
    auto t0 = Clock::now();
    std::vector<Cluster> clusters;
    if (req.mode == UnlearnMode::class_) {
      Mat pts(req.points.rows(), static_cast<Eigen::Index>(residual.size()));
      for (std::size_t j = 0; j < residual.size(); ++j) {
        pts.col(static_cast<Eigen::Index>(j)) = req.points.col(residual[j]);
      }
      clusters.push_back({residual[static_cast<std::size_t>(medoid(pts))], residual});
    } else {
      const int k = std::min<int>(rep.k, static_cast<int>(residual.size()));
      Mat pts(req.points.rows(), static_cast<Eigen::Index>(residual.size()));
      for (std::size_t j = 0; j < residual.size(); ++j) {
        pts.col(static_cast<Eigen::Index>(j)) = req.points.col(residual[j]);
      }
      const KMeansResult km = kmeans(pts, k, req.seed * 1000003ULL + static_cast<std::uint64_t>(it));
      for (int c = 0; c < k; ++c) {
        if (km.representatives[static_cast<std::size_t>(c)] < 0) {
          continue;
        }
        Cluster cl;
        cl.representative = residual[static_cast<std::size_t>(km.representatives[static_cast<std::size_t>(c)])];
        for (std::size_t j = 0; j < residual.size(); ++j) {
          if (km.assignment[j] == c) {
            cl.members.push_back(residual[j]);
          }
        }
        clusters.push_back(std::move(cl));
      }
    }
    timer.add("cluster", t0);

    // 2. one patch per cluster, all against the iteration-start snapshot
    const PatchedModel snapshot = current;
    std::vector<PatchNetwork> new_patches;
    int new_supports = 0;
    for (const Cluster& cl : clusters) {
      const int y_c = req.labels[static_cast<std::size_t>(cl.representative)];
      std::uniform_int_distribution<int> pick(0, classes - 2);
      int y_hat = pick(label_rng);
      if (y_hat >= y_c) {
        ++y_hat;
      }
      const Vec z_c = req.points.col(cl.representative);

      t0 = Clock::now();
      ConfusionNetwork conf;
      try {
        const RegionTrace trace = trace_region(snapshot, z_c, RegionMode::compact);
        timer.add("region", t0);
        t0 = Clock::now();
        conf = optimize_confusion(trace.map, trace.region, y_c, y_hat, {req.confusion, req.epsilon});
        timer.add("confusion", t0);
      } catch (const NumericError& e) {
        spdlog::warn("iteration {}: confusion for point {} failed ({}); cluster deferred", it,
                     cl.representative, e.what());
        ++rep.failed_clusters;
        continue;
      } catch (const EmptyRegionError& e) {
        spdlog::warn("iteration {}: empty region at point {} ({}); cluster deferred", it,
                     cl.representative, e.what());
        ++rep.failed_clusters;
        continue;
      }

      t0 = Clock::now();
      std::vector<SupportNetwork> supports;
      for (int member : cl.members) {
        const Vec z = req.points.col(member);
        const Vec trial = snapshot.logits(z) + conf.eval(z);
        if (argmax_label(trial) == req.labels[static_cast<std::size_t>(member)]) {
          continue; // stays in the residual set
        }
        SupportRecord sr;
        sr.iteration = it;
        sr.patch = static_cast<int>(current.patches.size() + new_patches.size());
        sr.point = member;
        LinearRegion region;
        if (req.mode == UnlearnMode::class_) {
          const int y = req.labels[static_cast<std::size_t>(member)];
          if (predict(snapshot.base, z) == y) {
            sr.radius = robust_radius(snapshot.base, z, y, snapshot.domain);
          }
          region = relaxed_region(snapshot.base, z, sr.radius, snapshot.domain);
        } else {
          region = region_of(snapshot.base, z, snapshot.domain);
        }
        const LambdaChoice lc = choose_lambda(region, req.guard, req.lambda);
        purity.insert(lc.inside.begin(), lc.inside.end());
        band.insert(lc.band.begin(), lc.band.end());
        sr.lambda = lc.lambda;
        sr.constraints = static_cast<int>(region.size());
        sr.band = static_cast<int>(lc.band.size());
        supports.push_back(support_from_region(region, lc.lambda));
        rep.supports.push_back(sr);
      }
      timer.add("support", t0);
      if (supports.empty()) {
        continue;
      }
      new_supports += static_cast<int>(supports.size());
      const double h = compute_h(conf, snapshot.domain);
      new_patches.push_back(assemble_patch(std::move(conf), std::move(supports), h, snapshot.domain));
    }
    const int added = static_cast<int>(new_patches.size());
    for (auto& p : new_patches) {
      current.patches.push_back(std::move(p));
    }

    // 3. verify every target on the deployed model
    t0 = Clock::now();
    residual.clear();
    for (int i : targets) {
      if (current.predict_features(req.points.col(i)) == req.labels[static_cast<std::size_t>(i)]) {
        residual.push_back(i);
      }
    }
    timer.add("verify", t0);

    IterationRecord rec;
    rec.iteration = it;
    rec.clusters = static_cast<int>(clusters.size());
    rec.patches = added;
    rec.supports = new_supports;
    rec.residual = static_cast<int>(residual.size());
    rec.flipped = total - rec.residual;
    rec.success = 1.0 - static_cast<double>(residual.size()) / static_cast<double>(total);
    rep.iterations.push_back(rec);
    spdlog::info("iteration {}: {} clusters, {} patches, residual {}/{} (success {:.4f})", it,
                 rec.clusters, added, rec.residual, total, rec.success);
    if (residual.empty() || rec.success > req.delta) {
      rep.status = UnlearnStatus::converged;
      break;
    }
  }

  rep.residual = residual;
  std::vector<char> in_residual(static_cast<std::size_t>(total), 0);
  for (int i : residual) {
    in_residual[static_cast<std::size_t>(i)] = 1;
  }
  for (int i = 0; i < total; ++i) {
    if (!in_residual[static_cast<std::size_t>(i)]) {
      rep.flipped.push_back(i);
    }
  }
  rep.flip_rate = static_cast<double>(rep.flipped.size()) / static_cast<double>(total);
  rep.patch_count = static_cast<int>(current.patches.size() - model.patches.size());
  rep.support_count = static_cast<int>(rep.supports.size());
  rep.purity.assign(purity.begin(), purity.end());
  rep.band.assign(band.begin(), band.end());
  rep.timings = timer.list();
  if (rep.status == UnlearnStatus::not_converged) {
    spdlog::warn("unlearning stopped after {} iterations with flip rate {:.4f} <= delta {}",
                 req.max_iterations, rep.flip_rate, req.delta);
  }
  return result;
}

UnlearnResult unlearn_single(const PatchedModel& model, const Vec& z, int label,
                             UnlearnRequest params) {
  params.mode = UnlearnMode::single;
  params.points = z;
  params.labels = {label};
  params.k = 1;
  return unlearn(model, params);
}

// ---- report text -----------------------------------------------------------

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) {
      out += ',';
    }
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) {
      out.push_back(std::stoi(item));
    }
  }
  return out;
}

std::vector<std::string> split_cells(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(item);
  }
  return out;
}

} // namespace

std::string report_to_text(const UnlearnReport& r) {
  std::ostringstream o;
  o << "# pwu unlearn report v1\n";
  o << "mode," << to_string(r.mode) << "\n";
  o << "status," << to_string(r.status) << "\n";
  o << "total," << r.total << "\n";
  o << "delta," << fmt_double(r.delta) << "\n";
  o << "k," << r.k << "\n";
  o << "seed," << r.seed << "\n";
  o << "iterations," << r.iterations.size() << "\n";
  o << "flip_rate," << fmt_double(r.flip_rate) << "\n";
  o << "patch_count," << r.patch_count << "\n";
  o << "support_count," << r.support_count << "\n";
  o << "failed_clusters," << r.failed_clusters << "\n";
  o << "already_misclassified," << join(r.already_misclassified) << "\n";
  o << "residual," << join(r.residual) << "\n";
  o << "purity," << join(r.purity) << "\n";
  o << "band," << join(r.band) << "\n";
  o << "[iterations]\n";
  o << "iteration,clusters,patches,supports,flipped,residual,success\n";
  for (const auto& it : r.iterations) {
    o << it.iteration << ',' << it.clusters << ',' << it.patches << ',' << it.supports << ','
      << it.flipped << ',' << it.residual << ',' << fmt_double(it.success) << "\n";
  }
  o << "[supports]\n";
  o << "iteration,patch,point,lambda,radius,constraints,band\n";
  for (const auto& s : r.supports) {
    o << s.iteration << ',' << s.patch << ',' << s.point << ',' << fmt_double(s.lambda) << ','
      << fmt_double(s.radius) << ',' << s.constraints << ',' << s.band << "\n";
  }
  return o.str();
}

UnlearnReport report_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "# pwu unlearn report v1") {
    throw ParseError("not a pwu unlearn report (bad first line)");
  }
  UnlearnReport r;
  std::string section;
  bool header_pending = false;
  int lineno = 1;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) {
        continue;
      }
      if (line.front() == '[') {
        section = line;
        header_pending = true;
        continue;
      }
      if (header_pending) {
        header_pending = false;
        continue;
      }
      if (section.empty()) {
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos) {
          throw ParseError("report line " + std::to_string(lineno) + " has no value");
        }
        const std::string key = line.substr(0, comma);
        const std::string value = line.substr(comma + 1);
        if (key == "mode") {
          r.mode = value == "single" ? UnlearnMode::single
                   : value == "class" ? UnlearnMode::class_
                                      : UnlearnMode::multipoint;
        } else if (key == "status") {
          r.status = value == "converged"       ? UnlearnStatus::converged
                     : value == "nothing_to_do" ? UnlearnStatus::nothing_to_do
                                                : UnlearnStatus::not_converged;
        } else if (key == "total") {
          r.total = std::stoi(value);
        } else if (key == "delta") {
          r.delta = std::stod(value);
        } else if (key == "k") {
          r.k = std::stoi(value);
        } else if (key == "seed") {
          r.seed = std::stoull(value);
        } else if (key == "flip_rate") {
          r.flip_rate = std::stod(value);
        } else if (key == "patch_count") {
          r.patch_count = std::stoi(value);
        } else if (key == "support_count") {
          r.support_count = std::stoi(value);
        } else if (key == "failed_clusters") {
          r.failed_clusters = std::stoi(value);
        } else if (key == "already_misclassified") {
          r.already_misclassified = split_ints(value);
        } else if (key == "residual") {
          r.residual = split_ints(value);
        } else if (key == "purity") {
          r.purity = split_ints(value);
        } else if (key == "band") {
          r.band = split_ints(value);
        }
        continue;
      }
      const auto c = split_cells(line);
      if (section == "[iterations]" && c.size() == 7) {
        r.iterations.push_back({std::stoi(c[0]), std::stoi(c[1]), std::stoi(c[2]), std::stoi(c[3]),
                                std::stoi(c[4]), std::stoi(c[5]), std::stod(c[6])});
      } else if (section == "[supports]" && c.size() == 7) {
        r.supports.push_back({std::stoi(c[0]), std::stoi(c[1]), std::stoi(c[2]), std::stod(c[3]),
                              std::stod(c[4]), std::stoi(c[5]), std::stoi(c[6])});
      } else {
        throw ParseError("malformed report line " + std::to_string(lineno));
      }
    }
  } catch (const std::logic_error& e) {
    throw ParseError("malformed number in report line " + std::to_string(lineno) + ": " + e.what());
  }
  std::set<int> residual(r.residual.begin(), r.residual.end());
  for (int i = 0; i < r.total; ++i) {
    if (residual.count(i) == 0) {
      r.flipped.push_back(i);
    }
  }
  return r;
}

std::string timings_csv(const UnlearnReport& report) {
  std::string out = "phase,seconds\n";
  for (const auto& [phase, seconds] : report.timings) {
    out += phase + "," + fmt_double(seconds) + "\n";
  }
  return out;
}

} // namespace pwu
