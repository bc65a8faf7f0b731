#pragma once

// Riemannian gradient descent on the product of complex circles
// { X : |X_ij| = 1 }, used for both analog sub-problems.

#include <functional>
#include <iosfwd>
#include <vector>

#include "hbf/mmse.hpp"
#include "hbf/types.hpp"

namespace hbf::manifold {

struct LineSearchParams {
  double initial_step = 1.0;
  double contraction = 0.5;
  double sufficient_decrease = 1e-4;
  int max_backtracks = 50;
  /// Each search after the first starts at growth * (last accepted step),
  /// capped at 1e8 * initial_step. 0 restarts from initial_step every time.
  double growth = 2.0;

  void validate() const;
};

struct MoOptions {
  LineSearchParams line_search;
  double rel_tol = 1e-5;    // relative objective change
  double grad_tol = 1e-8;   // Riemannian gradient Frobenius norm
  int max_iters = 500;
};

struct MoIterate {
  int iteration = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;  // accepted step length (0 for the start point)
};

struct MoResult {
  CMat point;
  double objective = 0.0;
  int iterations = 0;
  bool stalled = false;  // a line search exhausted its backtracks
  std::vector<MoIterate> trace;
};

/// Objective value; writes the conjugate gradient df/dX^* when grad != null.
using ObjectiveFn = std::function<double(const CMat& x, CMat* grad)>;

/// Euclidean conjugate gradient of the reduced objective.
CMat euclidean_grad(const AnalogProblem& p, const CMat& x);

/// t = g - Re(g o conj(x)) o x.
CMat project_tangent(const CMat& x, const CMat& g);

/// Entrywise (x + d)/|x + d|; an entry keeps its old value when
/// |x + d| < 1e-14.
CMat retract(const CMat& x, const CMat& d);

/// Riemannian gradient of a real function whose conjugate gradient is `cgrad`:
/// the real-coordinate gradient 2*cgrad projected onto the tangent space.
CMat riemannian_grad(const CMat& x, const CMat& cgrad);

MoResult mo_solve(const ObjectiveFn& f, const CMat& start, const MoOptions& opts = {});
MoResult mo_solve(const AnalogProblem& p, const CMat& start, const MoOptions& opts = {});

/// iteration,objective,grad_norm,step
void write_trace_csv(std::ostream& os, const std::vector<MoIterate>& trace);

}  // namespace hbf::manifold
