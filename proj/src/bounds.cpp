#include "pwu/bounds.hpp"

#include "pwu/errors.hpp"
#include "pwu/geometry.hpp"
#include "pwu/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pwu {

namespace {

struct Relaxation {
  Vec lo_slope;
  Vec up_slope;
  Vec up_shift;
};

Relaxation relax(const Vec& l, const Vec& u) {
  Relaxation r{Vec(l.size()), Vec(l.size()), Vec::Zero(l.size())};
  for (Eigen::Index i = 0; i < l.size(); ++i) {
    if (l[i] >= 0.0) {
      r.lo_slope[i] = 1.0;
      r.up_slope[i] = 1.0;
    } else if (u[i] <= 0.0) {
      r.lo_slope[i] = 0.0;
      r.up_slope[i] = 0.0;
    } else {
      const double s = u[i] / (u[i] - l[i]);
      r.up_slope[i] = s;
      r.up_shift[i] = -s * l[i];
      // A fixed zero slope keeps the bounds inclusion-monotone in the box:
      // the adaptive choice (slope 1 when u >= -l) can give a box tighter
      // bounds than a sub-box it contains.
      r.lo_slope[i] = 0.0;
    }
  }
  return r;
}

/// Lower bound of lambda . z_k (rows of lambda are objectives over layer k's
/// pre-activation) by back-substitution through layers k-1 .. 0.
Vec backsubstitute_lower(const MlpNetwork& net, std::size_t k, Mat lambda, Vec constant,
                         const std::vector<Relaxation>& relax_by_layer, const Vec& center,
                         const Vec& radius) {
  const auto& layers = net.layers();
  for (std::size_t step = k + 1; step-- > 0;) {
    // through affine layer `step`: z_step = W a_{step-1} + b
    constant += lambda * layers[step].bias;
    lambda = lambda * layers[step].weight;
    if (step == 0) {
      break;
    }
    // through ReLU of layer step-1: a = relu(z_{step-1})
    const Relaxation& rel = relax_by_layer[step - 1];
    for (Eigen::Index j = 0; j < lambda.cols(); ++j) {
      for (Eigen::Index i = 0; i < lambda.rows(); ++i) {
        const double coef = lambda(i, j);
        if (coef >= 0.0) {
          lambda(i, j) = coef * rel.lo_slope[j];
        } else {
          lambda(i, j) = coef * rel.up_slope[j];
          constant[i] += coef * rel.up_shift[j];
        }
      }
    }
  }
  return lambda * center - lambda.cwiseAbs() * radius + constant;
}

} // namespace

BoxBounds preactivation_bounds(const MlpNetwork& net, const Vec& center, const Vec& radius) {
  if (center.size() != net.input_dim() || radius.size() != net.input_dim()) {
    throw ShapeError("bound box does not match network input dimension");
  }
  if ((radius.array() < 0.0).any() || !radius.allFinite()) {
    throw ValidationError("bound radius must be finite and non-negative");
  }
  const auto& layers = net.layers();
  BoxBounds out;
  out.center = center;
  out.radius = radius;

  if ((radius.array() == 0.0).all()) {
    Vec a = center;
    for (std::size_t k = 0; k < layers.size(); ++k) {
      Vec z = layers[k].weight * a + layers[k].bias;
      out.lower.push_back(z);
      out.upper.push_back(z);
      a = z.cwiseMax(0.0);
    }
    return out;
  }

  std::vector<Relaxation> relaxations;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const Eigen::Index width = layers[k].out_dim();
    const Mat eye = Mat::Identity(width, width);
    Vec lo = backsubstitute_lower(net, k, eye, Vec::Zero(width), relaxations, center, radius);
    Vec hi = -backsubstitute_lower(net, k, -eye, Vec::Zero(width), relaxations, center, radius);
    hi = hi.cwiseMax(lo);
    if (k + 1 < layers.size()) {
      relaxations.push_back(relax(lo, hi));
    }
    out.lower.push_back(std::move(lo));
    out.upper.push_back(std::move(hi));
  }
  return out;
}

BoxBounds preactivation_bounds(const MlpNetwork& net, const Vec& center, double radius) {
  return preactivation_bounds(net, center, Vec::Constant(center.size(), radius));
}

Vec margin_lower_bounds(const MlpNetwork& net, const BoxBounds& bounds, int label) {
  const Eigen::Index classes = net.output_dim();
  if (label < 0 || label >= classes) {
    throw ValidationError("label out of range");
  }
  const std::size_t last = net.layers().size() - 1;
  if ((bounds.radius.array() == 0.0).all()) {
    const Vec& z = bounds.lower.back();
    Vec out = z[label] - z.array();
    out[label] = kInf;
    return out;
  }
  std::vector<Relaxation> relaxations;
  for (std::size_t k = 0; k < last; ++k) {
    relaxations.push_back(relax(bounds.lower[k], bounds.upper[k]));
  }
  Mat spec = Mat::Zero(classes, classes);
  for (Eigen::Index j = 0; j < classes; ++j) {
    spec(j, label) += 1.0;
    spec(j, j) -= 1.0;
  }
  Vec out = backsubstitute_lower(net, last, spec, Vec::Zero(classes), relaxations, bounds.center,
                                 bounds.radius);
  // The naive interval difference is also sound; keep the better of the two.
  const Vec naive = bounds.logit_lower()[label] - bounds.logit_upper().array();
  out = out.cwiseMax(naive);
  out[label] = kInf;
  return out;
}

std::vector<std::uint8_t> stable_gates(const BoxBounds& bounds) {
  std::vector<std::uint8_t> stable;
  for (std::size_t k = 0; k + 1 < bounds.lower.size(); ++k) {
    for (Eigen::Index i = 0; i < bounds.lower[k].size(); ++i) {
      stable.push_back(bounds.lower[k][i] >= 0.0 || bounds.upper[k][i] < 0.0 ? 1 : 0);
    }
  }
  return stable;
}

namespace {

bool certified(const MlpNetwork& net, const Vec& x, int label, double radius) {
  const BoxBounds b = preactivation_bounds(net, x, radius);
  return (margin_lower_bounds(net, b, label).array() > 0.0).all();
}

} // namespace

double robust_radius(const MlpNetwork& net, const Vec& x, int label, const Box& domain,
                     const RadiusOptions& options) {
  if (predict(net, x) != label) {
    throw ValidationError("robust radius requested for a point the network misclassifies");
  }
  if (!certified(net, x, label, 0.0)) {
    return 0.0; // tie at the point itself
  }
  double good = 0.0;
  double bad = domain.diameter();
  if (certified(net, x, label, bad)) {
    return bad;
  }
  // Start with a geometric probe so tiny radii are found quickly.
  double probe = bad;
  while (probe > 1e-12 * std::max(bad, 1.0)) {
    probe *= 0.5;
    if (certified(net, x, label, probe)) {
      good = probe;
      break;
    }
    bad = probe;
  }
  if (good == 0.0) {
    return 0.0;
  }
  while (bad - good > options.tol * good) {
    const double mid = 0.5 * (good + bad);
    if (certified(net, x, label, mid)) {
      good = mid;
    } else {
      bad = mid;
    }
  }
  return good;
}

LinearRegion relaxed_region(const MlpNetwork& net, const Vec& x, double radius, const Box& domain) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw ValidationError("relaxation radius must be finite and non-negative");
  }
  const ActivationPattern pattern = activation_pattern(net, x);
  RegionProvenance prov{pattern.signs, {}};
  if (radius > 0.0) {
    std::vector<std::uint8_t> mask = stable_gates(preactivation_bounds(net, x, radius));
    if (std::find(mask.begin(), mask.end(), 0) != mask.end()) {
      prov.mask = std::move(mask);
    }
  }
  LinearRegion region = region_from_pattern(net, prov, domain);
  region.anchor = x;
  return region;
}

} // namespace pwu
