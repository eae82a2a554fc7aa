#pragma once

// Independent reference implementations. They deliberately avoid the
// library's code paths (plain loops, brute force) so a shared bug cannot
// make both sides agree.

#include "pwu/linprog.hpp"
#include "pwu/net.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

namespace pwu::oracle {

/// Triple loop forward pass, ReLU on hidden layers.
std::vector<double> naive_forward(const MlpNetwork& net, const std::vector<double>& x);

/// Pre-activation of every hidden gate, layer by layer.
std::vector<double> naive_preactivations(const MlpNetwork& net, const std::vector<double>& x);

struct BruteLp {
  bool feasible = false;
  double objective = 0.0;
  std::vector<double> x;
};

/// Enumerates every basic point (n active hyperplanes among constraints and
/// finite bounds) of a bounded LP and keeps the best feasible one.
BruteLp vertex_enumeration(const LpProblem& p, double feas_tol = 1e-9);

/// max over a regular grid on the box [lo, hi] (points per axis) of f.
template <typename F>
double grid_max(const Vec& lo, const Vec& hi, int per_axis, F f) {
  const Eigen::Index d = lo.size();
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    Vec x(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      x[i] = lo[i] + (hi[i] - lo[i]) * idx[static_cast<std::size_t>(i)] / (per_axis - 1);
    }
    best = std::max(best, f(x));
    Eigen::Index k = 0;
    while (k < d && ++idx[static_cast<std::size_t>(k)] == per_axis) {
      idx[static_cast<std::size_t>(k)] = 0;
      ++k;
    }
    if (k == d) {
      return best;
    }
  }
}

/// Yeom attack by hand: softmax, -log p_y, compare with tau.
double naive_mia_recall(const std::vector<std::vector<double>>& logits, const std::vector<int>& y,
                        double tau);

} // namespace pwu::oracle
