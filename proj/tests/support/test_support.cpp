#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

namespace hbf::test {

CMat random_hpd(Rng& rng, int n, double shift, int cols) {
  if (cols < 0) cols = n;
  const CMat b = random_gaussian(rng, n, cols);
  return (b * b.adjoint()) / static_cast<double>(cols) + shift * CMat::Identity(n, n);
}

CMat random_isometry(Rng& rng, int n, int k) {
  Eigen::HouseholderQR<CMat> qr(random_gaussian(rng, n, k));
  return qr.householderQ() * CMat::Identity(n, k);
}

AnalogProblem random_problem(Rng& rng, Side side, int antennas, int n_streams, int terms,
                             bool weighted) {
  std::uniform_real_distribution<double> noise(0.1, 2.0);
  const double s2 = noise(rng);
  WeightMatrices wts;
  for (int k = 0; k < terms; ++k) wts.lambda.push_back(random_hpd(rng, n_streams, 0.3));
  const WeightMatrices* wp = weighted ? &wts : nullptr;
  std::vector<CMat> g;
  std::vector<double> scale;
  for (int k = 0; k < terms; ++k) {
    if (side == Side::Precoder) {
      const CMat w = random_gaussian(rng, 6, n_streams) * 0.4;
      g.push_back(random_gaussian(rng, 6, antennas).adjoint() * w);
      scale.push_back(weighted ? weighted_combiner_energy(w, wts.lambda[k])
                               : combiner_energy(w));
    } else {
      g.push_back(random_gaussian(rng, antennas, n_streams));
      scale.push_back(0.3 + noise(rng));
    }
  }
  return side == Side::Precoder ? precoder_problem(g, s2, scale, wp)
                                : combiner_problem(g, s2, scale, wp);
}

CMat lu_inverse(const CMat& a) { return Eigen::FullPivLU<CMat>(a).inverse(); }

double dense_top_generalized_eigenvalue(const CMat& u, const CMat& w) {
  // W^{-1} U has the pencil's eigenvalues; it is not Hermitian, so use the
  // general complex solver.
  Eigen::ComplexEigenSolver<CMat> es(lu_inverse(w) * u);
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    best = std::max(best, es.eigenvalues()(i).real());
  }
  return best;
}

RVec schur_eigenvalues_desc(const CMat& a) {
  Eigen::ComplexSchur<CMat> schur(a);
  RVec ev = schur.matrixT().diagonal().real();
  std::sort(ev.data(), ev.data() + ev.size(), std::greater<>());
  return ev;
}

double conj_gradient_rel_error(const std::function<double(const CMat&)>& f,
                               const CMat& x, const CMat& g, const CMat& d, double eps,
                               double floor) {
  const double fd = (f(x + eps * d) - f(x - eps * d)) / (2.0 * eps);
  const double an = 2.0 * (g.adjoint() * d).trace().real();
  return std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), floor});
}

double entrywise_gradient_rel_error(const std::function<double(const CMat&)>& f,
                                    const CMat& x, const CMat& g, Rng& rng, int entries,
                                    double eps) {
  std::uniform_int_distribution<Eigen::Index> row(0, x.rows() - 1);
  std::uniform_int_distribution<Eigen::Index> col(0, x.cols() - 1);
  RVec fd(2 * entries), an(2 * entries);
  for (int e = 0; e < entries; ++e) {
    const Eigen::Index i = row(rng);
    const Eigen::Index j = col(rng);
    for (int part = 0; part < 2; ++part) {
      const cd step = part == 0 ? cd(eps, 0.0) : cd(0.0, eps);
      CMat xp = x, xm = x;
      xp(i, j) += step;
      xm(i, j) -= step;
      fd(2 * e + part) = (f(xp) - f(xm)) / (2.0 * eps);
      an(2 * e + part) = part == 0 ? 2.0 * g(i, j).real() : 2.0 * g(i, j).imag();
    }
  }
  return (fd - an).norm() / an.norm();
}

double direct_analog_objective(const AnalogProblem& p, const CMat& x) {
  const CMat proj = x * lu_inverse(x.adjoint() * x) * x.adjoint();
  double total = 0.0;
  for (int k = 0; k < p.num_terms(); ++k) {
    const auto ns = p.g[k].cols();
    const CMat m = p.weighted() ? p.m[k] : CMat::Identity(ns, ns);
    const CMat inner = m + p.g[k].adjoint() * proj * p.g[k] / p.s[k];
    total += lu_inverse(inner).trace().real();
  }
  return total;
}

double grid_power_allocation_mse(const RVec& s, double noise_var, double resolution) {
  const int n = static_cast<int>(s.size());
  const int steps = static_cast<int>(std::lround(1.0 / resolution));
  auto mse = [&](const std::vector<double>& p) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += noise_var / (noise_var + p[i] * s(i) * s(i));
    return acc;
  };
  double best = std::numeric_limits<double>::infinity();
  if (n == 1) return mse({1.0});
  if (n == 2) {
    for (int a = 0; a <= steps; ++a) {
      const double p0 = a * resolution;
      best = std::min(best, mse({p0, 1.0 - p0}));
    }
    return best;
  }
  for (int a = 0; a <= steps; ++a) {
    for (int b = 0; a + b <= steps; ++b) {
      const double p0 = a * resolution;
      const double p1 = b * resolution;
      best = std::min(best, mse({p0, p1, std::max(0.0, 1.0 - p0 - p1)}));
    }
  }
  return best;
}

double direct_mse(const CMat& h, const CMat& v, const CMat& w, double beta, double noise_var) {
  // e = (beta^{-1} W^H H V - I) s + beta^{-1} W^H u
  const auto ns = v.cols();
  const CMat a = w.adjoint() * h * v / beta - CMat::Identity(ns, ns);
  return a.squaredNorm() + noise_var * w.squaredNorm() / (beta * beta);
}

}  // namespace hbf::test
