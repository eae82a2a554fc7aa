#pragma once

#include "pwu/net.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace pwu {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { le, eq, ge };
enum class Sense { minimize, maximize };
enum class LpStatus { optimal, infeasible, unbounded, failed };

std::string to_string(LpStatus status);

struct LpConstraint {
  Vec row;
  Relation relation = Relation::le;
  double rhs = 0.0;
};

/// Dense linear program. Variable bounds default to [0, +inf) when left
/// empty; either side may be infinite.
struct LpProblem {
  Vec objective;
  Sense sense = Sense::minimize;
  std::vector<LpConstraint> constraints;
  Vec lower;
  Vec upper;
  /// Optional starting point for the nonbasic variables (clamped to bounds).
  std::optional<Vec> start;

  void add(Vec row, Relation relation, double rhs);
};

struct LpSolution {
  LpStatus status = LpStatus::failed;
  Vec x;
  double objective = 0.0;
  int iterations = 0;
  std::string message;

  bool optimal() const { return status == LpStatus::optimal; }
};

struct SimplexOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  /// Consecutive degenerate pivots before switching to Bland's rule.
  int degenerate_limit = 50;
  int refactor_interval = 1000;
  /// 0 picks a limit from the problem size.
  int max_iterations = 0;
  /// Final residual check against the original rows.
  double verify_tol = 1e-7;
};

/// Bounded-variable primal simplex on a dense tableau. Phase 1 runs once on
/// construction; every later `minimize`/`maximize` call warm-starts from the
/// last optimal basis, which makes repeated objectives over one polytope
/// cheap.
class SimplexSolver {
public:
  SimplexSolver(const RowMat& a, std::vector<Relation> relations, const Vec& rhs, const Vec& lower,
                const Vec& upper, const std::optional<Vec>& start = std::nullopt,
                SimplexOptions options = {});

  LpSolution minimize(const Vec& cost);
  LpSolution maximize(const Vec& cost);

  bool feasible() const { return feasible_; }

private:
  enum class Outcome { optimal, unbounded, iteration_limit };

  void initialize(const std::optional<Vec>& start);
  void set_cost(const Vec& full_cost);
  Outcome iterate(bool phase_one);
  void pivot(Eigen::Index row, Eigen::Index col);
  bool refactor();
  double residual() const;
  LpSolution finish(Outcome outcome, const Vec& cost, bool negate);

  RowMat a_;
  std::vector<Relation> relations_;
  Vec rhs_;
  SimplexOptions options_;

  Eigen::Index rows_ = 0;
  Eigen::Index structural_ = 0;
  Eigen::Index columns_ = 0;
  std::vector<double> art_sign_; // per column >= n+m, sign of artificial entry
  std::vector<Eigen::Index> art_row_;

  RowMat tableau_;
  Vec lo_;
  Vec hi_;
  Vec x_;
  Vec cost_;
  Vec reduced_;
  std::vector<Eigen::Index> basis_;
  std::vector<char> is_basic_;
  bool feasible_ = false;
  int iterations_ = 0;
  int since_refactor_ = 0;
  std::string failure_;
};

LpSolution solve_lp(const LpProblem& problem, const SimplexOptions& options = {});

} // namespace pwu
