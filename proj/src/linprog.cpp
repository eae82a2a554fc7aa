#include "pwu/linprog.hpp"

#include "pwu/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pwu {

std::string to_string(LpStatus status) {
  switch (status) {
  case LpStatus::optimal:
    return "optimal";
  case LpStatus::infeasible:
    return "infeasible";
  case LpStatus::unbounded:
    return "unbounded";
  case LpStatus::failed:
    return "failed";
  }
  return "unknown";
}

void LpProblem::add(Vec row, Relation relation, double rhs) {
  constraints.push_back({std::move(row), relation, rhs});
}

SimplexSolver::SimplexSolver(const RowMat& a, std::vector<Relation> relations, const Vec& rhs,
                             const Vec& lower, const Vec& upper, const std::optional<Vec>& start,
                             SimplexOptions options)
    : a_(a), relations_(std::move(relations)), rhs_(rhs), options_(options) {
  rows_ = a_.rows();
  structural_ = a_.cols();
  if (static_cast<Eigen::Index>(relations_.size()) != rows_ || rhs_.size() != rows_) {
    throw ShapeError("LP constraint rows, relations and right-hand sides disagree in count");
  }
  if (lower.size() != structural_ || upper.size() != structural_) {
    throw ShapeError("LP bounds do not match variable count");
  }
  for (Eigen::Index j = 0; j < structural_; ++j) {
    if (lower[j] > upper[j]) {
      throw ValidationError("LP variable " + std::to_string(j) + " has lower bound above upper");
    }
  }
  if (!a_.allFinite() || !rhs_.allFinite()) {
    throw NumericError("LP data contains non-finite coefficients");
  }
  if (options_.max_iterations <= 0) {
    options_.max_iterations = static_cast<int>(50 * (rows_ + structural_) + 10000);
  }
  lo_ = lower;
  hi_ = upper;
  initialize(start);
}

void SimplexSolver::initialize(const std::optional<Vec>& start) {
  const Eigen::Index n = structural_;
  const Eigen::Index m = rows_;

  Vec x0(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double v;
    if (start && start->size() == n) {
      v = std::clamp((*start)[j], lo_[j], hi_[j]);
    } else if (std::isfinite(lo_[j])) {
      v = lo_[j];
    } else if (std::isfinite(hi_[j])) {
      v = hi_[j];
    } else {
      v = 0.0;
    }
    x0[j] = v;
  }

  const Vec activity = a_ * x0;
  std::vector<Eigen::Index> art_rows;
  std::vector<double> art_signs;
  Vec slack_value(m);
  Vec slack_lo(m);
  Vec slack_hi(m);
  std::vector<char> needs_art(static_cast<std::size_t>(m), 0);
  for (Eigen::Index i = 0; i < m; ++i) {
    switch (relations_[static_cast<std::size_t>(i)]) {
    case Relation::le:
      slack_lo[i] = 0.0;
      slack_hi[i] = kInf;
      break;
    case Relation::ge:
      slack_lo[i] = -kInf;
      slack_hi[i] = 0.0;
      break;
    case Relation::eq:
      slack_lo[i] = 0.0;
      slack_hi[i] = 0.0;
      break;
    }
    const double s = rhs_[i] - activity[i];
    const double tol = options_.feasibility_tol * (1.0 + std::abs(rhs_[i]));
    if (s >= slack_lo[i] - tol && s <= slack_hi[i] + tol) {
      slack_value[i] = s;
    } else {
      const double bound = s < slack_lo[i] ? slack_lo[i] : slack_hi[i];
      slack_value[i] = bound;
      needs_art[static_cast<std::size_t>(i)] = 1;
      art_rows.push_back(i);
      art_signs.push_back(s - bound > 0.0 ? 1.0 : -1.0);
    }
  }

  const auto arts = static_cast<Eigen::Index>(art_rows.size());
  columns_ = n + m + arts;
  tableau_ = RowMat::Zero(m, columns_);
  tableau_.leftCols(n) = a_;
  for (Eigen::Index i = 0; i < m; ++i) {
    tableau_(i, n + i) = 1.0;
  }

  Vec lo(columns_);
  Vec hi(columns_);
  x_ = Vec::Zero(columns_);
  lo.head(n) = lo_;
  hi.head(n) = hi_;
  lo.segment(n, m) = slack_lo;
  hi.segment(n, m) = slack_hi;
  x_.head(n) = x0;
  x_.segment(n, m) = slack_value;

  basis_.assign(static_cast<std::size_t>(m), 0);
  is_basic_.assign(static_cast<std::size_t>(columns_), 0);
  art_sign_.assign(static_cast<std::size_t>(columns_), 0.0);
  art_row_.assign(static_cast<std::size_t>(columns_), -1);
  for (Eigen::Index i = 0; i < m; ++i) {
    basis_[static_cast<std::size_t>(i)] = n + i;
  }
  for (Eigen::Index k = 0; k < arts; ++k) {
    const Eigen::Index col = n + m + k;
    const Eigen::Index row = art_rows[static_cast<std::size_t>(k)];
    const double sign = art_signs[static_cast<std::size_t>(k)];
    art_sign_[static_cast<std::size_t>(col)] = sign;
    art_row_[static_cast<std::size_t>(col)] = row;
    tableau_(row, col) = sign;
    // Basis column is sign * e_row, so the row of B^-1 [A I Art] is scaled by sign.
    tableau_.row(row) *= sign;
    basis_[static_cast<std::size_t>(row)] = col;
    lo[col] = 0.0;
    hi[col] = kInf;
    x_[col] = std::abs(rhs_[row] - activity[row] - slack_value[row]);
  }
  for (auto b : basis_) {
    is_basic_[static_cast<std::size_t>(b)] = 1;
  }
  lo_ = lo;
  hi_ = hi;

  if (arts == 0) {
    feasible_ = true;
    return;
  }

  Vec phase_cost = Vec::Zero(columns_);
  phase_cost.tail(arts).setOnes();
  set_cost(phase_cost);
  const Outcome outcome = iterate(true);
  if (outcome == Outcome::iteration_limit) {
    failure_ = "phase 1 hit the iteration limit";
    feasible_ = false;
    return;
  }
  refactor();
  const double infeasibility = x_.tail(arts).sum();
  const double scale = 1.0 + (rows_ > 0 ? rhs_.cwiseAbs().maxCoeff() : 0.0);
  feasible_ = infeasibility <= 1e-8 * scale;
  // Artificials are pinned at zero from here on.
  for (Eigen::Index col = n + m; col < columns_; ++col) {
    hi_[col] = 0.0;
    if (!is_basic_[static_cast<std::size_t>(col)]) {
      x_[col] = 0.0;
    }
  }
}

void SimplexSolver::set_cost(const Vec& full_cost) {
  cost_ = full_cost;
  Vec basic_cost(rows_);
  for (Eigen::Index i = 0; i < rows_; ++i) {
    basic_cost[i] = cost_[basis_[static_cast<std::size_t>(i)]];
  }
  reduced_ = cost_ - tableau_.transpose() * basic_cost;
  for (auto b : basis_) {
    reduced_[b] = 0.0;
  }
}

void SimplexSolver::pivot(Eigen::Index row, Eigen::Index col) {
  const double p = tableau_(row, col);
  tableau_.row(row) /= p;
  const Eigen::RowVectorXd pivot_row = tableau_.row(row);
  Vec column = tableau_.col(col);
  column[row] = 0.0;
  tableau_.noalias() -= column * pivot_row;
  tableau_.col(col).setZero();
  tableau_(row, col) = 1.0;
  const double rc = reduced_[col];
  reduced_ -= rc * pivot_row.transpose();
  reduced_[col] = 0.0;

  const Eigen::Index leaving = basis_[static_cast<std::size_t>(row)];
  is_basic_[static_cast<std::size_t>(leaving)] = 0;
  is_basic_[static_cast<std::size_t>(col)] = 1;
  basis_[static_cast<std::size_t>(row)] = col;
}

SimplexSolver::Outcome SimplexSolver::iterate(bool phase_one) {
  const double opt_tol = options_.optimality_tol;
  const double piv_tol = options_.pivot_tol;
  bool bland = false;
  int degenerate = 0;

  while (true) {
    if (iterations_ >= options_.max_iterations) {
      return Outcome::iteration_limit;
    }

    // Pricing.
    Eigen::Index entering = -1;
    double direction = 0.0;
    double best = 0.0;
    for (Eigen::Index j = 0; j < columns_; ++j) {
      if (is_basic_[static_cast<std::size_t>(j)] || !(hi_[j] > lo_[j])) {
        continue;
      }
      const double d = reduced_[j];
      double dir = 0.0;
      if (x_[j] == lo_[j]) {
        if (d < -opt_tol) {
          dir = 1.0;
        }
      } else if (x_[j] == hi_[j]) {
        if (d > opt_tol) {
          dir = -1.0;
        }
      } else if (std::abs(d) > opt_tol) {
        dir = d < 0.0 ? 1.0 : -1.0;
      }
      if (dir == 0.0) {
        continue;
      }
      if (bland) {
        entering = j;
        direction = dir;
        break;
      }
      if (std::abs(d) > best) {
        best = std::abs(d);
        entering = j;
        direction = dir;
      }
    }
    if (entering < 0) {
      return Outcome::optimal;
    }

    // Ratio test.
    const double span = direction > 0.0 ? hi_[entering] - x_[entering]
                                         : x_[entering] - lo_[entering];
    double min_ratio = kInf;
    for (Eigen::Index i = 0; i < rows_; ++i) {
      const double alpha = direction * tableau_(i, entering);
      if (std::abs(alpha) <= piv_tol) {
        continue;
      }
      const Eigen::Index b = basis_[static_cast<std::size_t>(i)];
      double ratio;
      if (alpha > 0.0) {
        if (!std::isfinite(lo_[b])) {
          continue;
        }
        ratio = (x_[b] - lo_[b]) / alpha;
      } else {
        if (!std::isfinite(hi_[b])) {
          continue;
        }
        ratio = (hi_[b] - x_[b]) / (-alpha);
      }
      min_ratio = std::min(min_ratio, std::max(ratio, 0.0));
    }

    Eigen::Index leave_row = -1;
    if (min_ratio < span) {
      const double window = min_ratio + 1e-12 * (1.0 + min_ratio);
      double best_alpha = 0.0;
      Eigen::Index best_var = columns_;
      for (Eigen::Index i = 0; i < rows_; ++i) {
        const double alpha = direction * tableau_(i, entering);
        if (std::abs(alpha) <= piv_tol) {
          continue;
        }
        const Eigen::Index b = basis_[static_cast<std::size_t>(i)];
        double ratio;
        if (alpha > 0.0) {
          if (!std::isfinite(lo_[b])) {
            continue;
          }
          ratio = (x_[b] - lo_[b]) / alpha;
        } else {
          if (!std::isfinite(hi_[b])) {
            continue;
          }
          ratio = (hi_[b] - x_[b]) / (-alpha);
        }
        if (std::max(ratio, 0.0) > window) {
          continue;
        }
        if (bland ? b < best_var : std::abs(alpha) > best_alpha) {
          best_alpha = std::abs(alpha);
          best_var = b;
          leave_row = i;
        }
      }
    }

    double theta;
    if (leave_row >= 0) {
      theta = min_ratio;
    } else if (std::isfinite(span)) {
      theta = span;
    } else {
      if (phase_one) {
        // Phase 1 is bounded below by zero; an unbounded ray means numerical trouble.
        return Outcome::iteration_limit;
      }
      return Outcome::unbounded;
    }

    ++iterations_;
    if (theta <= 1e-12) {
      if (++degenerate >= options_.degenerate_limit) {
        bland = true;
      }
    } else {
      degenerate = 0;
    }

    if (theta > 0.0) {
      x_[entering] += direction * theta;
      for (Eigen::Index i = 0; i < rows_; ++i) {
        const double t = tableau_(i, entering);
        if (t != 0.0) {
          x_[basis_[static_cast<std::size_t>(i)]] -= direction * theta * t;
        }
      }
    }

    if (leave_row >= 0) {
      const Eigen::Index b = basis_[static_cast<std::size_t>(leave_row)];
      const double alpha = direction * tableau_(leave_row, entering);
      x_[b] = alpha > 0.0 ? lo_[b] : hi_[b];
      pivot(leave_row, entering);
      if (++since_refactor_ >= options_.refactor_interval) {
        refactor();
      }
    } else {
      x_[entering] = direction > 0.0 ? hi_[entering] : lo_[entering];
    }
  }
}

bool SimplexSolver::refactor() {
  since_refactor_ = 0;
  if (rows_ == 0) {
    return true;
  }
  const Eigen::Index n = structural_;
  const Eigen::Index m = rows_;
  Mat full = Mat::Zero(m, columns_);
  full.leftCols(n) = a_;
  for (Eigen::Index i = 0; i < m; ++i) {
    full(i, n + i) = 1.0;
  }
  for (Eigen::Index col = n + m; col < columns_; ++col) {
    full(art_row_[static_cast<std::size_t>(col)], col) = art_sign_[static_cast<std::size_t>(col)];
  }
  Mat basis_matrix(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    basis_matrix.col(i) = full.col(basis_[static_cast<std::size_t>(i)]);
  }
  Eigen::PartialPivLU<Mat> lu(basis_matrix);
  RowMat fresh = lu.solve(full);
  if (!fresh.allFinite()) {
    return false;
  }
  tableau_ = std::move(fresh);

  Vec nonbasic_activity = Vec::Zero(m);
  for (Eigen::Index j = 0; j < columns_; ++j) {
    if (!is_basic_[static_cast<std::size_t>(j)] && x_[j] != 0.0) {
      nonbasic_activity += full.col(j) * x_[j];
    }
  }
  const Vec basic_values = lu.solve(rhs_ - nonbasic_activity);
  for (Eigen::Index i = 0; i < m; ++i) {
    x_[basis_[static_cast<std::size_t>(i)]] = basic_values[i];
  }
  if (cost_.size() == columns_) {
    set_cost(cost_);
  }
  return true;
}

double SimplexSolver::residual() const {
  double worst = 0.0;
  const Vec xs = x_.head(structural_);
  const Vec activity = a_ * xs;
  for (Eigen::Index i = 0; i < rows_; ++i) {
    const double scale = 1.0 + std::abs(rhs_[i]);
    double violation = 0.0;
    switch (relations_[static_cast<std::size_t>(i)]) {
    case Relation::le:
      violation = activity[i] - rhs_[i];
      break;
    case Relation::ge:
      violation = rhs_[i] - activity[i];
      break;
    case Relation::eq:
      violation = std::abs(activity[i] - rhs_[i]);
      break;
    }
    worst = std::max(worst, violation / scale);
  }
  for (Eigen::Index j = 0; j < structural_; ++j) {
    const double scale = 1.0 + std::abs(xs[j]);
    worst = std::max(worst, (lo_[j] - xs[j]) / scale);
    worst = std::max(worst, (xs[j] - hi_[j]) / scale);
  }
  return worst;
}

LpSolution SimplexSolver::finish(Outcome outcome, const Vec& cost, bool negate) {
  LpSolution sol;
  sol.iterations = iterations_;
  sol.x = x_.head(structural_);
  if (outcome == Outcome::unbounded) {
    sol.status = LpStatus::unbounded;
    sol.message = "objective unbounded";
    return sol;
  }
  if (outcome == Outcome::iteration_limit) {
    sol.status = LpStatus::failed;
    sol.message = "iteration limit reached";
    return sol;
  }
  const double viol = residual();
  if (viol > options_.verify_tol) {
    sol.status = LpStatus::failed;
    sol.message = "solution violates constraints by " + std::to_string(viol);
    return sol;
  }
  sol.status = LpStatus::optimal;
  const double value = cost.dot(sol.x);
  sol.objective = negate ? -value : value;
  return sol;
}

LpSolution SimplexSolver::minimize(const Vec& cost) {
  if (cost.size() != structural_) {
    throw ShapeError("LP objective does not match variable count");
  }
  if (!feasible_) {
    LpSolution sol;
    sol.status = failure_.empty() ? LpStatus::infeasible : LpStatus::failed;
    sol.message = failure_.empty() ? "no feasible point" : failure_;
    sol.iterations = iterations_;
    return sol;
  }
  Vec full = Vec::Zero(columns_);
  full.head(structural_) = cost;
  set_cost(full);
  Outcome outcome = iterate(false);
  // Re-solve from a fresh factorization until the verified point is also optimal.
  for (int attempt = 0; attempt < 3 && outcome == Outcome::optimal; ++attempt) {
    if (!refactor()) {
      outcome = Outcome::iteration_limit;
      break;
    }
    bool still_optimal = true;
    for (Eigen::Index j = 0; j < columns_ && still_optimal; ++j) {
      if (is_basic_[static_cast<std::size_t>(j)] || !(hi_[j] > lo_[j])) {
        continue;
      }
      const double d = reduced_[j];
      const double tol = 10.0 * options_.optimality_tol;
      if ((x_[j] == lo_[j] && d < -tol) || (x_[j] == hi_[j] && d > tol) ||
          (x_[j] != lo_[j] && x_[j] != hi_[j] && std::abs(d) > tol)) {
        still_optimal = false;
      }
    }
    if (still_optimal) {
      break;
    }
    outcome = iterate(false);
  }
  return finish(outcome, cost, false);
}

LpSolution SimplexSolver::maximize(const Vec& cost) {
  LpSolution sol = minimize(-cost);
  if (sol.status == LpStatus::optimal) {
    sol.objective = -sol.objective;
  }
  return sol;
}

LpSolution solve_lp(const LpProblem& problem, const SimplexOptions& options) {
  const Eigen::Index n = problem.objective.size();
  const auto m = static_cast<Eigen::Index>(problem.constraints.size());
  RowMat a(m, n);
  Vec rhs(m);
  std::vector<Relation> relations;
  relations.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& c = problem.constraints[static_cast<std::size_t>(i)];
    if (c.row.size() != n) {
      throw ShapeError("LP constraint " + std::to_string(i) + " has " +
                       std::to_string(c.row.size()) + " coefficients, expected " +
                       std::to_string(n));
    }
    a.row(i) = c.row.transpose();
    rhs[i] = c.rhs;
    relations.push_back(c.relation);
  }
  const Vec lower = problem.lower.size() == 0 ? Vec::Zero(n) : problem.lower;
  const Vec upper = problem.upper.size() == 0 ? Vec::Constant(n, kInf) : problem.upper;
  SimplexSolver solver(a, std::move(relations), rhs, lower, upper, problem.start, options);
  return problem.sense == Sense::maximize ? solver.maximize(problem.objective)
                                          : solver.minimize(problem.objective);
}

} // namespace pwu
