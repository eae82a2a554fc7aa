#include "pwu/patching.hpp"

#include "pwu/errors.hpp"
#include "pwu/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pwu {

// ---- PatchedModel -------------------------------------------------------

PatchedModel PatchedModel::wrap(MlpNetwork base, std::optional<Box> domain) {
  PatchedModel model;
  const Eigen::Index dim = base.input_dim();
  model.featuremap = FeatureMap::identity(dim);
  model.domain = domain ? *domain : Box::unit(dim);
  model.base = std::move(base);
  model.validate();
  return model;
}

std::size_t PatchedModel::support_count() const {
  std::size_t n = 0;
  for (const auto& p : patches) {
    n += p.supports.size();
  }
  return n;
}

Vec PatchedModel::logits(const Vec& z) const {
  Vec out = pwu::forward(base, z);
  for (const auto& patch : patches) {
    if (patch.confusion.constant() && patch_gate(patch, z) == 0.0) {
      // |d| <= H, so both ReLU terms of the patch are exactly zero.
      continue;
    }
    out += patch_eval(patch, z);
  }
  return out;
}

Mat PatchedModel::features(const Mat& raw) const {
  Mat z(feature_dim(), raw.cols());
  for (Eigen::Index i = 0; i < raw.cols(); ++i) {
    z.col(i) = featuremap.apply(raw.col(i));
  }
  return z;
}

void PatchedModel::validate() const {
  featuremap.validate();
  if (featuremap.feature_dim() != base.input_dim()) {
    throw ShapeError("feature map output dimension does not match base network input");
  }
  if (domain.dim() != base.input_dim() || domain.hi.size() != domain.lo.size()) {
    throw ShapeError("domain box dimension does not match feature dimension");
  }
  for (std::size_t k = 0; k < patches.size(); ++k) {
    const auto& p = patches[k];
    if (p.confusion.d.size() != base.output_dim() ||
        (p.confusion.c && (p.confusion.c->rows() != base.output_dim() ||
                           p.confusion.c->cols() != base.input_dim()))) {
      throw ShapeError("patch " + std::to_string(k) + " confusion has wrong shape");
    }
    for (const auto& s : p.supports) {
      if (s.a.cols() != base.input_dim() || s.b.size() != s.a.rows()) {
        throw ShapeError("patch " + std::to_string(k) + " support has wrong shape");
      }
    }
  }
}

// ---- supports -----------------------------------------------------------

double bump(double t, double lambda) {
  // relu(lambda t + 1) - relu(lambda t), evaluated piecewise so the plateau
  // is exactly 1 and the far side exactly 0.
  const double g = lambda * t;
  if (g >= 0.0) {
    return 1.0;
  }
  return g + 1.0 <= 0.0 ? 0.0 : g + 1.0;
}

SupportNetwork support_from_region(const LinearRegion& region, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("support sharpness lambda must be positive and finite");
  }
  SupportNetwork s;
  s.a = region.a;
  s.b = region.b;
  s.lambda = lambda;
  s.provenance = region.provenance;
  return s;
}

double support_eval(const SupportNetwork& support, const Vec& x) {
  if (x.size() != support.a.cols()) {
    throw ShapeError("support evaluated on a vector of the wrong dimension");
  }
  const double lambda = support.lambda;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < support.a.rows(); ++i) {
    const double g = lambda * (support.b[i] - support.a.row(i).dot(x));
    if (g + 1.0 <= 0.0) {
      return 0.0;
    }
    sum += g >= 0.0 ? 1.0 : g + 1.0;
  }
  return std::max(sum - static_cast<double>(support.a.rows() - 1), 0.0);
}

double min_slack(const SupportNetwork& support, const Vec& x, double floor) {
  double lowest = kInf;
  for (Eigen::Index i = 0; i < support.a.rows(); ++i) {
    lowest = std::min(lowest, support.b[i] - support.a.row(i).dot(x));
    if (lowest <= floor) {
      break;
    }
  }
  return lowest;
}

// ---- confusion ----------------------------------------------------------

Vec ConfusionNetwork::eval(const Vec& x) const {
  if (c) {
    return (*c) * x + d;
  }
  return d;
}

namespace {

void check_labels(int labels, int source, int target) {
  if (target < 0 || target >= labels || source < 0 || source >= labels) {
    throw ValidationError("confusion labels out of range");
  }
  if (source == target) {
    throw ValidationError("confusion target label must differ from the source label");
  }
}

ConfusionNetwork constant_confusion(const RegionAffineMap& map, const LinearRegion& region,
                                    int source, int target, double epsilon) {
  const auto labels = map.w.rows();
  const Eigen::Index others = labels - 1;
  Mat gap_rows(others, map.w.cols());
  Vec gap_offsets(others);
  std::vector<Eigen::Index> other_labels;
  for (Eigen::Index l = 0; l < labels; ++l) {
    if (l == target) {
      continue;
    }
    const auto r = static_cast<Eigen::Index>(other_labels.size());
    gap_rows.row(r) = map.w.row(l) - map.w.row(target);
    gap_offsets[r] = map.v[l] - map.v[target];
    other_labels.push_back(l);
  }
  const Vec worst_gap = max_affine_over_region(region, gap_rows, gap_offsets);

  // Variables: d (labels, free), t >= 0.
  const Eigen::Index nv = labels + 1;
  LpProblem lp;
  lp.objective = Vec::Zero(nv);
  lp.objective[labels] = 1.0;
  lp.lower = Vec::Constant(nv, -kInf);
  lp.upper = Vec::Constant(nv, kInf);
  lp.lower[labels] = 0.0;
  for (Eigen::Index r = 0; r < others; ++r) {
    Vec row = Vec::Zero(nv);
    row[target] = 1.0;
    row[other_labels[static_cast<std::size_t>(r)]] = -1.0;
    lp.add(row, Relation::ge, epsilon + worst_gap[r]);
  }
  for (Eigen::Index k = 0; k < labels; ++k) {
    Vec up = Vec::Zero(nv);
    up[k] = 1.0;
    up[labels] = -1.0;
    lp.add(up, Relation::le, 0.0);
    Vec down = Vec::Zero(nv);
    down[k] = -1.0;
    down[labels] = -1.0;
    lp.add(down, Relation::le, 0.0);
  }
  const LpSolution first = solve_lp(lp);
  if (!first.optimal()) {
    throw NumericError("confusion LP failed: " + first.message);
  }

  // Among offsets achieving the optimal worst case, take the one with the
  // smallest total magnitude so untouched logits stay at zero.
  const double t_star = first.x[labels];
  const Eigen::Index nv2 = 2 * labels;
  LpProblem second;
  second.objective = Vec::Zero(nv2);
  second.objective.tail(labels).setOnes();
  second.lower = Vec::Constant(nv2, -kInf);
  second.upper = Vec::Constant(nv2, kInf);
  second.lower.tail(labels).setZero();
  second.upper.head(labels).setConstant(t_star);
  second.lower.head(labels).setConstant(-t_star);
  for (Eigen::Index r = 0; r < others; ++r) {
    Vec row = Vec::Zero(nv2);
    row[target] = 1.0;
    row[other_labels[static_cast<std::size_t>(r)]] = -1.0;
    second.add(row, Relation::ge, epsilon + worst_gap[r]);
  }
  for (Eigen::Index k = 0; k < labels; ++k) {
    Vec up = Vec::Zero(nv2);
    up[k] = 1.0;
    up[labels + k] = -1.0;
    second.add(up, Relation::le, 0.0);
    Vec down = Vec::Zero(nv2);
    down[k] = -1.0;
    down[labels + k] = -1.0;
    second.add(down, Relation::le, 0.0);
  }
  second.start = Vec::Zero(nv2);
  second.start->head(labels) = first.x.head(labels);
  second.start->tail(labels) = first.x.head(labels).cwiseAbs();
  const LpSolution refined = solve_lp(second);

  ConfusionNetwork m;
  m.d = refined.optimal() ? Vec(refined.x.head(labels)) : Vec(first.x.head(labels));
  m.source_label = source;
  m.target_label = target;
  return m;
}

/// Robust counterpart: every "for all x in P" constraint is replaced by its
/// LP dual, one block of multipliers per constraint.
ConfusionNetwork affine_confusion(const RegionAffineMap& map, const LinearRegion& region,
                                  int source, int target, double epsilon) {
  const Eigen::Index labels = map.w.rows();
  const Eigen::Index n = map.w.cols();
  const Eigen::Index rows = region.size();
  const Vec& lo = region.domain.lo;
  const Vec& hi = region.domain.hi;

  const Eigen::Index c_off = 0;
  const Eigen::Index d_off = labels * n;
  const Eigen::Index t_idx = d_off + labels;
  const Eigen::Index block = rows + 2 * n;
  const Eigen::Index families = (labels - 1) + 2 * labels;
  const Eigen::Index nv = t_idx + 1 + families * block;
  auto c_var = [&](Eigen::Index k, Eigen::Index j) { return c_off + k * n + j; };

  LpProblem lp;
  lp.objective = Vec::Zero(nv);
  lp.objective[t_idx] = 1.0;
  lp.lower = Vec::Zero(nv);
  lp.upper = Vec::Constant(nv, kInf);
  lp.lower.head(t_idx).setConstant(-kInf);

  Eigen::Index fam = 0;
  // q(C) = q0 + sum coef_k * C_k ; r = r0 + sum dcoef_k d_k + tcoef t
  auto add_family = [&](const Vec& q0, const std::vector<std::pair<Eigen::Index, double>>& c_terms,
                        double r0, double t_coef) {
    const Eigen::Index base = t_idx + 1 + fam * block;
    const Eigen::Index y0 = base;
    const Eigen::Index mu0 = base + rows;
    const Eigen::Index nu0 = base + rows + n;
    for (Eigen::Index j = 0; j < n; ++j) {
      Vec row = Vec::Zero(nv);
      for (Eigen::Index i = 0; i < rows; ++i) {
        row[y0 + i] = region.a(i, j);
      }
      row[mu0 + j] = -1.0;
      row[nu0 + j] = 1.0;
      for (const auto& [k, coef] : c_terms) {
        row[c_var(k, j)] -= coef;
      }
      lp.add(row, Relation::eq, q0[j]);
    }
    Vec row = Vec::Zero(nv);
    for (Eigen::Index i = 0; i < rows; ++i) {
      row[y0 + i] = region.b[i];
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      row[mu0 + j] = -lo[j];
      row[nu0 + j] = hi[j];
    }
    for (const auto& [k, coef] : c_terms) {
      row[d_off + k] += coef;
    }
    row[t_idx] += t_coef;
    lp.add(row, Relation::le, -r0);
    ++fam;
  };

  for (Eigen::Index l = 0; l < labels; ++l) {
    if (l == target) {
      continue;
    }
    const Vec q0 = (map.w.row(l) - map.w.row(target)).transpose();
    add_family(q0, {{l, 1.0}, {target, -1.0}}, map.v[l] - map.v[target] + epsilon, 0.0);
  }
  const Vec zero = Vec::Zero(n);
  for (Eigen::Index k = 0; k < labels; ++k) {
    add_family(zero, {{k, 1.0}}, 0.0, -1.0);
    add_family(zero, {{k, -1.0}}, 0.0, -1.0);
  }

  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::infeasible) {
    throw EmptyRegionError("robust confusion LP is infeasible (empty region?)");
  }
  if (!sol.optimal()) {
    throw NumericError("robust confusion LP failed: " + sol.message);
  }
  ConfusionNetwork m;
  Mat c(labels, n);
  for (Eigen::Index k = 0; k < labels; ++k) {
    for (Eigen::Index j = 0; j < n; ++j) {
      c(k, j) = sol.x[c_var(k, j)];
    }
  }
  m.c = c;
  m.d = sol.x.segment(d_off, labels);
  m.source_label = source;
  m.target_label = target;
  return m;
}

} // namespace

ConfusionNetwork optimize_confusion(const RegionAffineMap& map, const LinearRegion& region,
                                    int source_label, int target_label,
                                    const ConfusionOptions& options) {
  check_labels(static_cast<int>(map.w.rows()), source_label, target_label);
  if (map.w.cols() != region.dim() || map.v.size() != map.w.rows()) {
    throw ShapeError("region affine map does not match region dimension");
  }
  if (options.mode == ConfusionMode::affine) {
    return affine_confusion(map, region, source_label, target_label, options.epsilon);
  }
  return constant_confusion(map, region, source_label, target_label, options.epsilon);
}

double compute_h(const ConfusionNetwork& confusion, const Box& domain) {
  if (!confusion.c) {
    return confusion.d.size() == 0 ? 0.0 : confusion.d.cwiseAbs().maxCoeff();
  }
  const Mat& c = *confusion.c;
  if (c.cols() != domain.dim()) {
    throw ShapeError("confusion matrix does not match domain dimension");
  }
  const Vec centre = c * domain.mid() + confusion.d;
  const Vec spread = c.cwiseAbs() * domain.half_width();
  const double h = (centre.cwiseAbs() + spread).maxCoeff();
  // Absorb rounding in C x + d so the bound also holds for the computed values.
  return h * (1.0 + 1e-12);
}

PatchNetwork assemble_patch(ConfusionNetwork confusion, std::vector<SupportNetwork> supports,
                            double h, const Box& domain) {
  if (supports.empty()) {
    throw ValidationError("a patch needs at least one support network");
  }
  if (!std::isfinite(h) || h < 0.0) {
    throw ValidationError("patch bound H must be finite and non-negative");
  }
  const double required = compute_h(confusion, domain);
  if (h < required) {
    throw ValidationError("patch bound H=" + std::to_string(h) +
                          " is below the domain-wide bound " + std::to_string(required));
  }
  for (const auto& s : supports) {
    if (s.a.cols() != domain.dim()) {
      throw ShapeError("support dimension does not match domain");
    }
  }
  PatchNetwork p;
  p.confusion = std::move(confusion);
  p.supports = std::move(supports);
  p.h = h;
  return p;
}

double patch_gate(const PatchNetwork& patch, const Vec& x) {
  double sigma = 0.0;
  for (const auto& s : patch.supports) {
    sigma = std::max(sigma, support_eval(s, x));
    if (sigma >= 1.0) {
      break;
    }
  }
  return sigma;
}

Vec patch_eval(const PatchNetwork& patch, const Vec& x) {
  const double sigma = patch_gate(patch, x);
  const Vec m = patch.confusion.eval(x);
  const double shift = patch.h * sigma - patch.h;
  Vec out(m.size());
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    out[k] = std::max(m[k] + shift, 0.0) - std::max(-m[k] + shift, 0.0);
  }
  return out;
}

Vec patched_forward(const PatchedModel& model, const Vec& raw) { return model.forward(raw); }

} // namespace pwu
