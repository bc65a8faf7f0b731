#include "hbf/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "hbf/matrix_io.hpp"

namespace hbf::manifold {

void LineSearchParams::validate() const {
  if (!(initial_step > 0.0)) throw InvalidArgument("line search: initial_step <= 0");
  if (!(contraction > 0.0 && contraction < 1.0)) {
    throw InvalidArgument("line search: contraction must lie in (0, 1)");
  }
  if (!(sufficient_decrease > 0.0 && sufficient_decrease < 1.0)) {
    throw InvalidArgument("line search: sufficient_decrease must lie in (0, 1)");
  }
  if (max_backtracks < 1) throw InvalidArgument("line search: max_backtracks < 1");
  if (growth < 0.0) throw InvalidArgument("line search: growth < 0");
}

CMat euclidean_grad(const AnalogProblem& p, const CMat& x) {
  return analog_conj_gradient(p, x);
}

CMat project_tangent(const CMat& x, const CMat& g) {
  if (x.rows() != g.rows() || x.cols() != g.cols()) {
    throw DimensionError("project_tangent: shape mismatch");
  }
  const RMat radial = (g.array() * x.array().conjugate()).real();
  return (g.array() - radial.cast<cd>().array() * x.array()).matrix();
}

CMat retract(const CMat& x, const CMat& d) {
  if (x.rows() != d.rows() || x.cols() != d.cols()) {
    throw DimensionError("retract: shape mismatch");
  }
  CMat out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const cd z = x(i, j) + d(i, j);
      const double mag = std::abs(z);
      out(i, j) = mag < 1e-14 ? x(i, j) : z / mag;
    }
  }
  return out;
}

CMat riemannian_grad(const CMat& x, const CMat& cgrad) {
  return project_tangent(x, 2.0 * cgrad);
}

MoResult mo_solve(const ObjectiveFn& f, const CMat& start, const MoOptions& opts) {
  opts.line_search.validate();
  const auto& ls = opts.line_search;
  MoResult res;
  res.point = start;
  CMat cg;
  double fx = f(res.point, &cg);
  CMat rg = riemannian_grad(res.point, cg);
  double gnorm = rg.norm();
  res.trace.push_back({0, fx, gnorm, 0.0});

  const double max_step = 1e8 * ls.initial_step;
  double tau0 = ls.initial_step;
  for (int it = 1; it <= opts.max_iters; ++it) {
    if (gnorm < opts.grad_tol) break;
    const double g2 = gnorm * gnorm;
    double tau = tau0;
    bool accepted = false;
    CMat cand;
    double fc = 0.0;
    for (int b = 0; b <= ls.max_backtracks; ++b) {
      cand = retract(res.point, -tau * rg);
      fc = f(cand, nullptr);
      if (std::isfinite(fc) && fc <= fx - ls.sufficient_decrease * tau * g2) {
        accepted = true;
        break;
      }
      tau *= ls.contraction;
    }
    if (!accepted) {
      res.stalled = true;
      break;
    }
    const double f_old = fx;
    res.point = std::move(cand);
    fx = f(res.point, &cg);
    rg = riemannian_grad(res.point, cg);
    gnorm = rg.norm();
    res.iterations = it;
    res.trace.push_back({it, fx, gnorm, tau});
    tau0 = ls.growth > 0.0 ? std::min(max_step, ls.growth * tau) : ls.initial_step;
    if (std::abs(f_old - fx) <= opts.rel_tol * std::max(std::abs(f_old), 1e-300)) break;
  }
  res.objective = fx;
  return res;
}

MoResult mo_solve(const AnalogProblem& p, const CMat& start, const MoOptions& opts) {
  p.validate();
  if (start.rows() != p.antennas) throw DimensionError("mo_solve: start rows");
  return mo_solve(
      [&p](const CMat& x, CMat* g) { return analog_objective_and_gradient(p, x, g); },
      start, opts);
}

void write_trace_csv(std::ostream& os, const std::vector<MoIterate>& trace) {
  os << "iteration,objective,grad_norm,step\n";
  for (const auto& t : trace) {
    os << t.iteration << ',' << io::format_double(t.objective) << ','
       << io::format_double(t.grad_norm) << ',' << io::format_double(t.step) << '\n';
  }
}

}  // namespace hbf::manifold
