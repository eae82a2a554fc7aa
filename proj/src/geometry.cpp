#include "pwu/geometry.hpp"

#include "pwu/errors.hpp"
#include "pwu/linprog.hpp"
#include "pwu/patching.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <spdlog/spdlog.h>

namespace pwu {

// ---- Box / LinearRegion ------------------------------------------------

bool Box::contains(const Vec& x, double tol) const {
  if (x.size() != dim()) {
    return false;
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) {
      return false;
    }
  }
  return true;
}

Vec Box::clamp(const Vec& x) const { return x.cwiseMax(lo).cwiseMin(hi); }

Box Box::unit(Eigen::Index dim) { return Box{Vec::Zero(dim), Vec::Ones(dim)}; }

Box Box::padded(const Mat& points, double fraction) {
  if (points.cols() == 0) {
    throw ValidationError("cannot derive a domain box from zero points");
  }
  const Vec lo = points.rowwise().minCoeff();
  const Vec hi = points.rowwise().maxCoeff();
  const Vec pad = ((hi - lo) * fraction).cwiseMax(fraction);
  return Box{lo - pad, hi + pad};
}

bool LinearRegion::contains(const Vec& x, double tol) const {
  if (x.size() != dim() || !domain.contains(x, tol)) {
    return false;
  }
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double scale = 1.0 + std::abs(b[i]);
    if (a.row(i).dot(x) - b[i] > tol * scale) {
      return false;
    }
  }
  return true;
}

namespace {

using Row = Eigen::RowVectorXd;

/// Affine function of the input: coef . x + c.
struct Affine {
  Row coef;
  double c = 0.0;
};

/// Collects gate constraints "expr >= 0" (active) or "expr <= 0" (inactive).
class RegionBuilder {
public:
  RegionBuilder(Eigen::Index dim, bool build) : dim_(dim), build_(build) {}

  void gate(bool active, const Row& coef, double c) {
    signs.push_back(active ? 1 : 0);
    if (!build_) {
      return;
    }
    if (active) {
      push(-coef, c);
    } else {
      push(coef, -c);
    }
  }

  /// Raw row a.x <= b, not tied to a gate.
  void push(const Row& a, double b) {
    if (!build_) {
      return;
    }
    rows_.push_back(a);
    rhs_.push_back(b);
  }

  LinearRegion finish(const Vec& anchor, const Box& domain) const {
    LinearRegion r;
    r.a.resize(static_cast<Eigen::Index>(rows_.size()), dim_);
    r.b.resize(static_cast<Eigen::Index>(rhs_.size()));
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      r.a.row(static_cast<Eigen::Index>(i)) = rows_[i];
      r.b[static_cast<Eigen::Index>(i)] = rhs_[i];
    }
    r.anchor = anchor;
    r.domain = domain;
    return r;
  }

  std::vector<std::uint8_t> signs;
  int boundary = 0;

private:
  Eigen::Index dim_;
  bool build_;
  std::vector<Row> rows_;
  std::vector<double> rhs_;
};

void check_domain(const Box& domain, Eigen::Index dim) {
  if (domain.dim() != dim || domain.hi.size() != dim) {
    throw ShapeError("domain box has dimension " + std::to_string(domain.dim()) + ", expected " +
                     std::to_string(dim));
  }
}

/// Propagates the base network symbolically under a fixed pattern. Gates with
/// mask bit 0 are followed but add no constraint. Returns the logit map.
RegionAffineMap propagate_base(const MlpNetwork& net, const std::vector<std::uint8_t>& pattern,
                               const std::vector<std::uint8_t>& mask, RegionBuilder* builder) {
  if (pattern.size() != net.gate_count()) {
    throw ShapeError("activation pattern has " + std::to_string(pattern.size()) +
                     " bits, network has " + std::to_string(net.gate_count()) + " gates");
  }
  if (!mask.empty() && mask.size() != pattern.size()) {
    throw ShapeError("gate mask size does not match pattern size");
  }
  const auto& layers = net.layers();
  Mat coef = Mat::Identity(net.input_dim(), net.input_dim());
  Vec offset = Vec::Zero(net.input_dim());
  std::size_t g = 0;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    Mat pre = layers[k].weight * coef;
    Vec pre_off = layers[k].weight * offset + layers[k].bias;
    if (k + 1 == layers.size()) {
      return RegionAffineMap{std::move(pre), std::move(pre_off)};
    }
    for (Eigen::Index j = 0; j < pre.rows(); ++j, ++g) {
      const bool active = pattern[g] != 0;
      if (builder != nullptr && (mask.empty() || mask[g] != 0)) {
        builder->gate(active, pre.row(j), pre_off[j]);
      }
      if (!active) {
        pre.row(j).setZero();
        pre_off[j] = 0.0;
      }
    }
    coef = std::move(pre);
    offset = std::move(pre_off);
  }
  return {};
}

int count_boundary(const MlpNetwork& net, const Vec& x) {
  const Vec pre = preactivations(net, x);
  return static_cast<int>((pre.array() == 0.0).count());
}

/// Walks one patch's gates at z and returns its logit contribution as an
/// affine map. Numeric gate decisions mirror support_eval / patch_eval so the
/// recorded signs agree with the model's own evaluation.
RegionAffineMap trace_patch(const PatchNetwork& patch, const Vec& z, RegionBuilder& rb,
                            bool build, Eigen::Index labels) {
  const Eigen::Index dim = z.size();
  RegionAffineMap out{Mat::Zero(build ? labels : 0, dim), Vec::Zero(labels)};
  Affine acc{Row::Zero(build ? dim : 0), 0.0};
  double acc_val = 0.0;

  for (std::size_t s = 0; s < patch.supports.size(); ++s) {
    const auto& sup = patch.supports[s];
    const double lambda = sup.lambda;
    Affine sum{Row::Zero(build ? dim : 0), 0.0};
    for (Eigen::Index i = 0; i < sup.a.rows(); ++i) {
      const double g = lambda * (sup.b[i] - sup.a.row(i).dot(z));
      const bool outer = g + 1.0 > 0.0;
      const bool inner = g >= 0.0;
      if (!build) {
        rb.gate(outer, Row(), 0.0);
        rb.gate(inner, Row(), 0.0);
        continue;
      }
      // lambda * slack as an affine function of x
      const Row g_coef = -lambda * sup.a.row(i);
      const double g_c = lambda * sup.b[i];
      rb.gate(outer, g_coef, g_c + 1.0);
      rb.gate(inner, g_coef, g_c);
      if (outer) {
        sum.coef += g_coef;
        sum.c += g_c + 1.0;
      }
      if (inner) {
        sum.coef -= g_coef;
        sum.c -= g_c;
      }
    }
    const double sigma_val = support_eval(sup, z);
    const bool s_active = sigma_val > 0.0;
    Affine sigma{Row::Zero(build ? dim : 0), 0.0};
    if (build) {
      sum.c -= static_cast<double>(sup.a.rows() - 1);
      rb.gate(s_active, sum.coef, sum.c);
      if (s_active) {
        sigma = sum;
      }
    } else {
      rb.gate(s_active, Row(), 0.0);
    }
    if (s == 0) {
      acc = std::move(sigma);
      acc_val = sigma_val;
      continue;
    }
    // max(acc, sigma) = acc + relu(sigma - acc)
    const bool take = sigma_val - acc_val >= 0.0;
    rb.gate(take, build ? Row(sigma.coef - acc.coef) : Row(), sigma.c - acc.c);
    if (take) {
      acc = std::move(sigma);
      acc_val = sigma_val;
    }
  }

  const Vec m = patch.confusion.eval(z);
  const double h = patch.h;
  const double shift = h * acc_val - h;
  for (Eigen::Index k = 0; k < labels; ++k) {
    const bool up = m[k] + shift > 0.0;
    const bool down = -m[k] + shift > 0.0;
    if (!build) {
      rb.gate(up, Row(), 0.0);
      rb.gate(down, Row(), 0.0);
      continue;
    }
    const Row m_coef = patch.confusion.c ? Row(patch.confusion.c->row(k)) : Row(Row::Zero(dim));
    const double m_c = patch.confusion.d[k];
    const Row u_coef = m_coef + h * acc.coef;
    const double u_c = m_c + h * acc.c - h;
    const Row w_coef = -m_coef + h * acc.coef;
    const double w_c = -m_c + h * acc.c - h;
    rb.gate(up, u_coef, u_c);
    rb.gate(down, w_coef, w_c);
    if (up) {
      out.w.row(k) += u_coef;
      out.v[k] += u_c;
    }
    if (down) {
      out.w.row(k) -= w_coef;
      out.v[k] -= w_c;
    }
  }
  return out;
}

/// Compact handling: index of a constraint that switches the support off at
/// z, or -1 when the support is (partly) on.
Eigen::Index dead_constraint(const SupportNetwork& sup, const Vec& z) {
  for (Eigen::Index i = 0; i < sup.a.rows(); ++i) {
    if (sup.lambda * (sup.b[i] - sup.a.row(i).dot(z)) + 1.0 <= 0.0) {
      return i;
    }
  }
  return -1;
}

RegionTrace trace_impl(const PatchedModel& model, const Vec& z, RegionMode mode, bool build) {
  const MlpNetwork& net = model.base;
  if (z.size() != net.input_dim()) {
    throw ShapeError("feature vector has dimension " + std::to_string(z.size()) +
                     ", model expects " + std::to_string(net.input_dim()));
  }
  check_domain(model.domain, net.input_dim());
  RegionBuilder rb(net.input_dim(), build);
  const ActivationPattern base = activation_pattern(net, z);
  RegionAffineMap map;
  if (build) {
    map = propagate_base(net, base.signs, {}, &rb);
  } else {
    rb.signs = base.signs;
  }
  const Eigen::Index labels = net.output_dim();

  for (const auto& patch : model.patches) {
    if (mode == RegionMode::compact) {
      std::vector<Eigen::Index> dead;
      for (const auto& sup : patch.supports) {
        const Eigen::Index i = dead_constraint(sup, z);
        if (i < 0) {
          break;
        }
        dead.push_back(i);
      }
      if (dead.size() == patch.supports.size()) {
        // Stay switched off: lambda * slack_i + 1 <= 0 for the chosen rows.
        for (std::size_t s = 0; s < dead.size(); ++s) {
          const auto& sup = patch.supports[s];
          const Eigen::Index i = dead[s];
          rb.push(-sup.a.row(i), -(sup.b[i] + 1.0 / sup.lambda));
        }
        continue;
      }
    }
    const RegionAffineMap part = trace_patch(patch, z, rb, build, labels);
    if (build) {
      map.w += part.w;
      map.v += part.v;
    }
  }

  RegionTrace trace;
  if (build) {
    trace.region = rb.finish(z, model.domain);
    trace.region.boundary_gates = count_boundary(net, z);
    if (trace.region.boundary_gates > 0) {
      spdlog::debug("anchor sits on {} gate boundaries; boundary included in its region",
                    trace.region.boundary_gates);
    }
    if (model.patches.empty()) {
      trace.region.provenance = RegionProvenance{base.signs, {}};
    }
  }
  trace.map = std::move(map);
  trace.signs = std::move(rb.signs);
  return trace;
}

} // namespace

RegionTrace trace_region(const PatchedModel& model, const Vec& z, RegionMode mode) {
  return trace_impl(model, z, mode, true);
}

LinearRegion region_of(const MlpNetwork& net, const Vec& x, const Box& domain) {
  if (x.size() != net.input_dim()) {
    throw ShapeError("input has dimension " + std::to_string(x.size()) + ", network expects " +
                     std::to_string(net.input_dim()));
  }
  check_domain(domain, net.input_dim());
  const ActivationPattern pattern = activation_pattern(net, x);
  LinearRegion region = region_from_pattern(net, RegionProvenance{pattern.signs, {}}, domain);
  region.anchor = x;
  region.boundary_gates = count_boundary(net, x);
  if (region.boundary_gates > 0) {
    spdlog::debug("anchor sits on {} gate boundaries; boundary included in its region",
                  region.boundary_gates);
  }
  return region;
}

LinearRegion region_of(const PatchedModel& model, const Vec& z, RegionMode mode) {
  return trace_region(model, z, mode).region;
}

LinearRegion region_from_pattern(const MlpNetwork& net, const RegionProvenance& provenance,
                                 const Box& domain) {
  check_domain(domain, net.input_dim());
  RegionBuilder rb(net.input_dim(), true);
  propagate_base(net, provenance.pattern, provenance.mask, &rb);
  LinearRegion region = rb.finish(Vec(), domain);
  region.provenance = provenance;
  return region;
}

RegionAffineMap region_affine_map(const MlpNetwork& net, const LinearRegion& region) {
  if (region.provenance) {
    return propagate_base(net, region.provenance->pattern, {}, nullptr);
  }
  if (region.anchor.size() != net.input_dim()) {
    throw ValidationError("region has neither an anchor nor a gate pattern");
  }
  return propagate_base(net, activation_pattern(net, region.anchor).signs, {}, nullptr);
}

RegionAffineMap region_affine_map(const PatchedModel& model, const LinearRegion& region,
                                  RegionMode mode) {
  if (region.anchor.size() != model.feature_dim()) {
    throw ValidationError("region has no anchor to trace the patched model from");
  }
  return trace_region(model, region.anchor, mode).map;
}

ActivationPattern activation_pattern(const PatchedModel& model, const Vec& z) {
  ActivationPattern p;
  p.signs = trace_impl(model, z, RegionMode::exact, false).signs;
  p.owner_shape = {static_cast<int>(p.signs.size())};
  return p;
}

namespace {

SimplexSolver region_solver(const LinearRegion& region) {
  check_domain(region.domain, region.dim());
  std::optional<Vec> start;
  if (region.anchor.size() == region.dim()) {
    start = region.domain.clamp(region.anchor);
  }
  return SimplexSolver(region.a, std::vector<Relation>(region.size(), Relation::le), region.b,
                       region.domain.lo, region.domain.hi, start);
}

double checked_max(const LpSolution& sol) {
  if (sol.status == LpStatus::infeasible) {
    throw EmptyRegionError("region is empty inside its domain box");
  }
  if (!sol.optimal()) {
    throw NumericError("region LP failed: " + sol.message);
  }
  return sol.objective;
}

} // namespace

double max_affine_over_region(const LinearRegion& region, const Vec& w, double c) {
  if (w.size() != region.dim()) {
    throw ShapeError("objective dimension does not match region");
  }
  SimplexSolver solver = region_solver(region);
  return checked_max(solver.maximize(w)) + c;
}

Vec max_affine_over_region(const LinearRegion& region, const Mat& w, const Vec& c) {
  if (w.cols() != region.dim() || c.size() != w.rows()) {
    throw ShapeError("objective rows do not match region");
  }
  SimplexSolver solver = region_solver(region);
  Vec out(w.rows());
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    out[r] = checked_max(solver.maximize(w.row(r).transpose())) + c[r];
  }
  return out;
}

std::vector<Vec> sample_region(const LinearRegion& region, std::size_t n, std::uint64_t seed,
                               const SampleOptions& options) {
  const Eigen::Index dim = region.dim();
  if (region.anchor.size() != dim) {
    throw SamplingError("hit-and-run needs an anchor inside the region");
  }
  if (!region.contains(region.anchor, 1e-9)) {
    throw SamplingError("region anchor lies outside the region");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Vec x = region.anchor;
  std::vector<Vec> out;
  out.reserve(n);
  int stalls = 0;
  std::size_t step = 0;
  while (out.size() < n) {
    Vec dir(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      dir[i] = normal(rng);
    }
    dir.normalize();
    double t_lo = -kInf;
    double t_hi = kInf;
    const Vec slack = (region.b - region.a * x).cwiseMax(0.0);
    const Vec rate = region.a * dir;
    for (Eigen::Index i = 0; i < rate.size(); ++i) {
      if (rate[i] > 0.0) {
        t_hi = std::min(t_hi, slack[i] / rate[i]);
      } else if (rate[i] < 0.0) {
        t_lo = std::max(t_lo, slack[i] / rate[i]);
      }
    }
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double up = std::max(region.domain.hi[i] - x[i], 0.0);
      const double down = std::min(region.domain.lo[i] - x[i], 0.0);
      if (dir[i] > 0.0) {
        t_hi = std::min(t_hi, up / dir[i]);
        t_lo = std::max(t_lo, down / dir[i]);
      } else if (dir[i] < 0.0) {
        t_hi = std::min(t_hi, down / dir[i]);
        t_lo = std::max(t_lo, up / dir[i]);
      }
    }
    if (!(t_hi - t_lo > 1e-12)) {
      if (++stalls > options.max_stalls) {
        throw SamplingError("hit-and-run stalled; region looks lower-dimensional");
      }
      continue;
    }
    stalls = 0;
    // Keep a hair inside the chord so rounding cannot leave the region.
    const double shrink = 1e-9 * (t_hi - t_lo);
    const double t = (t_lo + shrink) + unit(rng) * ((t_hi - shrink) - (t_lo + shrink));
    x += t * dir;
    ++step;
    if (step > static_cast<std::size_t>(options.burn_in) &&
        (step - static_cast<std::size_t>(options.burn_in)) %
                static_cast<std::size_t>(std::max(options.thinning, 1)) ==
            0) {
      out.push_back(x);
    }
  }
  return out;
}

std::vector<int> region_purity(const LinearRegion& region, const Mat& points, double tol) {
  std::vector<int> inside;
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    if (region.contains(points.col(i), tol)) {
      inside.push_back(static_cast<int>(i));
    }
  }
  return inside;
}

} // namespace pwu
