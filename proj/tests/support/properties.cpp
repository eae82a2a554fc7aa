#include "properties.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include "pwu/bounds.hpp"
#include "pwu/errors.hpp"
#include "pwu/geometry.hpp"
#include "pwu/linprog.hpp"
#include "pwu/patching.hpp"

#include <cmath>
#include <sstream>

namespace pwu::testing {

namespace {

std::vector<int> random_widths(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> depth(1, 2);
  std::uniform_int_distribution<int> width(3, 8);
  std::vector<int> w(static_cast<std::size_t>(depth(rng)));
  for (int& x : w) {
    x = width(rng);
  }
  return w;
}

std::string describe(const std::string& what, int c) {
  std::ostringstream s;
  s << "case " << c << ": " << what;
  return s.str();
}

bool same_pattern(const ActivationPattern& a, const ActivationPattern& b) { return a.signs == b.signs; }

/// A random patch whose support is the region of a random point.
PatchNetwork random_patch(const MlpNetwork& net, const Box& box, std::mt19937_64& rng, bool affine,
                          double lambda) {
  std::normal_distribution<double> n01(0.0, 1.0);
  const Vec p = uniform_in(box, rng);
  const LinearRegion r = region_of(net, p, box);
  ConfusionNetwork m;
  m.d = Vec(net.output_dim());
  for (Eigen::Index k = 0; k < m.d.size(); ++k) {
    m.d[k] = n01(rng);
  }
  if (affine) {
    Mat c(net.output_dim(), net.input_dim());
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      c.data()[i] = 0.5 * n01(rng);
    }
    m.c = c;
  }
  m.source_label = 0;
  m.target_label = 1;
  return assemble_patch(m, {support_from_region(r, lambda)}, compute_h(m, box), box);
}

} // namespace

PropertyResult prop_region(int cases, std::uint64_t seed) {
  PropertyResult res{"region soundness and affine faithfulness", 0, 0, {}};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim_d(2, 4);
  std::bernoulli_distribution patched_d(0.5);
  for (int c = 0; c < cases; ++c) {
    const int dim = dim_d(rng);
    const MlpNetwork net = random_net(rng, dim, random_widths(rng), 3);
    const Box box = centered_box(dim, 1.0);
    PatchedModel model = PatchedModel::wrap(net, box);
    const bool patched = patched_d(rng);
    if (patched) {
      model.patches.push_back(random_patch(net, box, rng, false, 10.0));
      model.patches.push_back(random_patch(net, box, rng, true, 100.0));
    }
    const Vec x = uniform_in(box, rng);
    ++res.cases;
    try {
      const RegionMode mode = patched && (c % 2 == 0) ? RegionMode::compact : RegionMode::exact;
      const RegionTrace t = trace_region(model, x, mode);
      const LinearRegion& region = t.region;
      if (!region.contains(x, 1e-9)) {
        res.fail(describe("anchor outside its own region", c));
        continue;
      }
      if (!patched && static_cast<std::size_t>(region.size()) != net.gate_count()) {
        res.fail(describe("constraint count differs from gate count", c));
        continue;
      }
      const Vec at_anchor = model.logits(x);
      if ((t.map.apply(x) - at_anchor).cwiseAbs().maxCoeff() > 1e-9 * (1 + at_anchor.cwiseAbs().maxCoeff())) {
        res.fail(describe("affine map disagrees with the model at the anchor", c));
        continue;
      }
      const ActivationPattern anchor_pattern =
          mode == RegionMode::exact ? activation_pattern(model, x) : activation_pattern(net, x);
      std::vector<Vec> pts;
      try {
        pts = sample_region(region, 20, seed + static_cast<std::uint64_t>(c));
      } catch (const SamplingError&) {
        continue; // lower-dimensional region (anchor on a kink); nothing to sample
      }
      for (const Vec& p : pts) {
        if (!region.contains(p, 1e-9)) {
          res.fail(describe("sample outside region", c));
          break;
        }
        const ActivationPattern pp =
            mode == RegionMode::exact ? activation_pattern(model, p) : activation_pattern(net, p);
        if (!same_pattern(pp, anchor_pattern)) {
          res.fail(describe("sample with a different activation pattern", c));
          break;
        }
        const Vec want = model.logits(p);
        if ((t.map.apply(p) - want).cwiseAbs().maxCoeff() > 1e-8 * (1 + want.cwiseAbs().maxCoeff())) {
          res.fail(describe("affine map off by more than 1e-8 inside region", c));
          break;
        }
      }
      std::normal_distribution<double> n01(0.0, 1.0);
      Vec w(dim);
      for (Eigen::Index i = 0; i < dim; ++i) {
        w[i] = n01(rng);
      }
      if (max_affine_over_region(region, w, 0.0) < w.dot(x) - 1e-9) {
        res.fail(describe("region maximum below the anchor value", c));
      }
    } catch (const std::exception& e) {
      res.fail(describe(std::string("exception: ") + e.what(), c));
    }
  }
  return res;
}

PropertyResult prop_support(int cases, std::uint64_t seed) {
  PropertyResult res{"support network semantics", 0, 0, {}};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim_d(2, 4);
  const double lambdas[] = {10.0, 100.0, 1e4};
  std::uniform_int_distribution<int> lam_d(0, 2);
  for (int c = 0; c < cases; ++c) {
    const int dim = dim_d(rng);
    const MlpNetwork net = random_net(rng, dim, random_widths(rng), 3);
    const Box box = centered_box(dim, 1.0);
    const LinearRegion region = region_of(net, uniform_in(box, rng), box);
    const SupportNetwork s = support_from_region(region, lambdas[lam_d(rng)]);
    ++res.cases;
    std::vector<Vec> pts{region.anchor};
    for (int i = 0; i < 60; ++i) {
      pts.push_back(uniform_in(box, rng));
    }
    try {
      for (const Vec& p : sample_region(region, 20, seed + static_cast<std::uint64_t>(c))) {
        pts.push_back(p);
      }
    } catch (const SamplingError&) {
    }
    for (const Vec& p : pts) {
      const double v = support_eval(s, p);
      const Vec slack = s.b - s.a * p;
      const double worst = slack.minCoeff();
      // literal formula: relu(sum_i relu(l t_i + 1) - relu(l t_i) - N + 1)
      double sum = 0.0;
      for (Eigen::Index i = 0; i < slack.size(); ++i) {
        sum += std::max(s.lambda * slack[i] + 1.0, 0.0) - std::max(s.lambda * slack[i], 0.0);
      }
      const double literal = std::max(sum - static_cast<double>(slack.size()) + 1.0, 0.0);
      if (!(v >= 0.0 && v <= 1.0)) {
        res.fail(describe("support value outside [0,1]", c));
        break;
      }
      if (worst >= 0.0 && v != 1.0) {
        res.fail(describe("support not exactly 1 inside the polytope", c));
        break;
      }
      if (worst <= -1.0 / s.lambda && v != 0.0) {
        res.fail(describe("support not exactly 0 beyond the band", c));
        break;
      }
      if (std::abs(v - literal) > 1e-9 * static_cast<double>(slack.size())) {
        res.fail(describe("support differs from the literal ReLU formula", c));
        break;
      }
    }
  }
  return res;
}

PropertyResult prop_patch_locality(int cases, std::uint64_t seed) {
  PropertyResult res{"patch locality and interior fidelity", 0, 0, {}};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim_d(2, 4);
  std::bernoulli_distribution affine_d(0.5);
  for (int c = 0; c < cases; ++c) {
    const int dim = dim_d(rng);
    const MlpNetwork net = random_net(rng, dim, random_widths(rng), 3);
    const Box box = centered_box(dim, 1.0);
    const PatchNetwork patch = random_patch(net, box, rng, affine_d(rng), 50.0);
    PatchedModel without = PatchedModel::wrap(net, box);
    without.patches.push_back(random_patch(net, box, rng, false, 50.0));
    PatchedModel with = without;
    with.patches.push_back(patch);
    ++res.cases;
    std::vector<Vec> pts;
    for (int i = 0; i < 60; ++i) {
      pts.push_back(uniform_in(box, rng));
    }
    LinearRegion inside;
    inside.a = patch.supports[0].a;
    inside.b = patch.supports[0].b;
    inside.domain = box;
    // anchor: any sampled point inside the support polytope
    for (const Vec& p : pts) {
      if (inside.contains(p, 0.0)) {
        inside.anchor = p;
        break;
      }
    }
    if (inside.anchor.size() == dim) {
      try {
        for (const Vec& p : sample_region(inside, 20, seed + static_cast<std::uint64_t>(c))) {
          pts.push_back(p);
        }
      } catch (const SamplingError&) {
      }
    }
    for (const Vec& p : pts) {
      const double sigma = patch_gate(patch, p);
      const Vec out = patch_eval(patch, p);
      const Vec m = patch.confusion.eval(p);
      if (sigma == 0.0) {
        if ((out.array() != 0.0).any()) {
          res.fail(describe("patch nonzero where every support is off", c));
          break;
        }
        if (with.logits(p) != without.logits(p)) {
          res.fail(describe("adding an inactive patch changed the logits", c));
          break;
        }
      } else if (sigma == 1.0) {
        if ((out - m).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) {
          res.fail(describe("patch differs from m where support is 1", c));
          break;
        }
      }
    }
  }
  return res;
}

PropertyResult prop_confusion(int cases, std::uint64_t seed) {
  PropertyResult res{"confusion feasibility (margin eps on sampled region points)", 0, 0, {}};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim_d(2, 3);
  std::uniform_int_distribution<int> label_d(0, 2);
  const double eps = 1e-3;
  for (int c = 0; c < cases; ++c) {
    const int dim = dim_d(rng);
    const MlpNetwork net = random_net(rng, dim, random_widths(rng), 3);
    const Box box = centered_box(dim, 1.0);
    const Vec x = uniform_in(box, rng);
    const int source = predict(net, x);
    int target = label_d(rng);
    if (target == source) {
      target = (target + 1) % 3;
    }
    const ConfusionMode mode = c % 2 == 0 ? ConfusionMode::constant : ConfusionMode::affine;
    ++res.cases;
    try {
      const LinearRegion region = region_of(net, x, box);
      const RegionAffineMap map = region_affine_map(net, region);
      const ConfusionNetwork m = optimize_confusion(map, region, source, target, {mode, eps});
      std::vector<Vec> pts;
      try {
        pts = sample_region(region, 200, seed + static_cast<std::uint64_t>(c));
      } catch (const SamplingError&) {
        --res.cases;
        continue;
      }
      const PatchedModel patched = [&] {
        PatchedModel pm = PatchedModel::wrap(net, box);
        pm.patches.push_back(assemble_patch(m, {support_from_region(region, 1e4)}, compute_h(m, box), box));
        return pm;
      }();
      for (const Vec& p : pts) {
        const Vec total = forward(net, p) + m.eval(p);
        bool ok = true;
        for (int l = 0; l < 3; ++l) {
          if (l != target && total[target] - total[l] < eps - 1e-7) {
            ok = false;
          }
        }
        if (!ok) {
          res.fail(describe("flip margin below eps at a sampled region point", c));
          break;
        }
        if (patched.predict_features(p) != target) {
          res.fail(describe("patched model does not predict the target inside the region", c));
          break;
        }
      }
    } catch (const std::exception& e) {
      res.fail(describe(std::string("exception: ") + e.what(), c));
    }
  }
  return res;
}

PropertyResult prop_bounds(int cases, std::uint64_t seed) {
  PropertyResult res{"bound soundness, monotonicity and certified radius", 0, 0, {}};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim_d(2, 4);
  std::uniform_real_distribution<double> logr(-3.0, 0.0);
  for (int c = 0; c < cases; ++c) {
    const int dim = dim_d(rng);
    const MlpNetwork net = random_net(rng, dim, random_widths(rng), 3);
    const Box box = centered_box(dim, 1.0);
    const Vec x = uniform_in(box, rng);
    const double r = std::pow(10.0, logr(rng));
    ++res.cases;
    const BoxBounds b = preactivation_bounds(net, x, r);
    const BoxBounds wider = preactivation_bounds(net, x, 1.5 * r);
    bool bad = false;
    for (std::size_t k = 0; k < b.lower.size() && !bad; ++k) {
      const double tol = 1e-9 * (1.0 + b.upper[k].cwiseAbs().maxCoeff());
      if ((wider.lower[k].array() > b.lower[k].array() + tol).any() ||
          (wider.upper[k].array() < b.upper[k].array() - tol).any()) {
        res.fail(describe("bounds shrank when the radius grew", c));
        bad = true;
      }
    }
    const Box ball{x.array() - r, x.array() + r};
    for (int i = 0; i < 200 && !bad; ++i) {
      const Vec p = uniform_in(ball, rng);
      const auto pre = oracle::naive_preactivations(net, std::vector<double>(p.data(), p.data() + dim));
      const auto logits = oracle::naive_forward(net, std::vector<double>(p.data(), p.data() + dim));
      std::size_t g = 0;
      for (std::size_t k = 0; k + 1 < b.lower.size() && !bad; ++k) {
        for (Eigen::Index j = 0; j < b.lower[k].size(); ++j, ++g) {
          if (pre[g] < b.lower[k][j] - 1e-9 || pre[g] > b.upper[k][j] + 1e-9) {
            res.fail(describe("sampled pre-activation outside its bounds", c));
            bad = true;
            break;
          }
        }
      }
      for (Eigen::Index j = 0; j < b.logit_lower().size() && !bad; ++j) {
        if (logits[static_cast<std::size_t>(j)] < b.logit_lower()[j] - 1e-9 ||
            logits[static_cast<std::size_t>(j)] > b.logit_upper()[j] + 1e-9) {
          res.fail(describe("sampled logit outside its bounds", c));
          bad = true;
        }
      }
    }
    if (bad) {
      continue;
    }
    const int y = predict(net, x);
    const double rho = robust_radius(net, x, y, box);
    const Box cert{x.array() - rho, x.array() + rho};
    for (int i = 0; i < 200 && rho > 0.0; ++i) {
      if (predict(net, uniform_in(cert, rng)) != y) {
        res.fail(describe("label changed inside the certified radius", c));
        break;
      }
    }
  }
  return res;
}

PropertyResult prop_lp_2d(int cases, std::uint64_t seed) {
  PropertyResult res{"LP solver vs vertex enumeration (random 2-D LPs)", 0, 0, {}};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> m_d(1, 8);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_int_distribution<int> rel_d(0, 2);
  for (int c = 0; c < cases; ++c) {
    LpProblem p;
    p.objective = Vec(2);
    p.objective << n01(rng), n01(rng);
    p.sense = c % 2 == 0 ? Sense::minimize : Sense::maximize;
    p.lower = Vec::Constant(2, -3.0 - std::abs(n01(rng)));
    p.upper = Vec::Constant(2, 3.0 + std::abs(n01(rng)));
    const int m = m_d(rng);
    for (int i = 0; i < m; ++i) {
      Vec row(2);
      row << n01(rng), n01(rng);
      const int rel = rel_d(rng);
      // equality rows are rare so that most instances stay feasible
      const Relation relation = rel == 0 ? Relation::ge : (rel == 1 || c % 7 != 0) ? Relation::le : Relation::eq;
      p.add(row, relation, n01(rng) + 0.5);
    }
    ++res.cases;
    const LpSolution sol = solve_lp(p);
    const oracle::BruteLp brute = oracle::vertex_enumeration(p);
    if (!brute.feasible) {
      if (sol.status != LpStatus::infeasible) {
        res.fail(describe("solver missed infeasibility (status " + to_string(sol.status) + ")", c));
      }
      continue;
    }
    if (!sol.optimal()) {
      res.fail(describe("solver did not return optimal on a feasible bounded LP: " + sol.message, c));
      continue;
    }
    if (std::abs(sol.objective - brute.objective) > 1e-6 * (1.0 + std::abs(brute.objective))) {
      std::ostringstream s;
      s << "objective " << sol.objective << " vs oracle " << brute.objective;
      res.fail(describe(s.str(), c));
    }
  }
  return res;
}

} // namespace pwu::testing
