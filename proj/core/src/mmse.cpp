#include "hbf/mmse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "hbf/linalg.hpp"

namespace hbf {

using linalg::hermitian_part;
using linalg::hermitian_solve;

CMat HybridBeamformer::precoder(int k) const {
  const auto i = static_cast<std::size_t>(k);
  return v_rf * (beta.at(i) * v_dig.at(i));
}

CMat HybridBeamformer::combiner(int k) const {
  return w_rf * w_dig.at(static_cast<std::size_t>(k));
}

void HybridBeamformer::check_feasible(double modulus_tol, double power_tol) const {
  if (v_dig.size() != w_dig.size() || v_dig.size() != beta.size() || v_dig.empty()) {
    throw DimensionError("HybridBeamformer: per-subcarrier lists differ in length");
  }
  auto unit = [&](const CMat& m, const char* what) {
    if (((m.cwiseAbs().array() - 1.0).abs() > modulus_tol).any()) {
      throw InvalidArgument(std::string("HybridBeamformer: ") + what +
                            " has a non-unit-modulus entry");
    }
  };
  unit(v_rf, "v_rf");
  unit(w_rf, "w_rf");
  for (int k = 0; k < num_subcarriers(); ++k) {
    const double p = precoder(k).squaredNorm();
    if (std::abs(p - 1.0) > power_tol) {
      throw InvalidArgument("HybridBeamformer: transmit power " + std::to_string(p) +
                            " on subcarrier " + std::to_string(k));
    }
  }
}

LinkBeamformer to_link(const HybridBeamformer& bf) {
  LinkBeamformer out;
  for (int k = 0; k < bf.num_subcarriers(); ++k) {
    out.precoders.push_back(bf.precoder(k));
    out.combiners.push_back(bf.combiner(k));
    out.beta.push_back(bf.beta[static_cast<std::size_t>(k)]);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

CMat mse_from_effective(const CMat& e, const CMat& w, double beta, double noise_var) {
  const auto ns = e.rows();
  if (e.cols() != ns) throw DimensionError("mse_matrix: effective channel not square");
  CMat t = e * e.adjoint() - (e + e.adjoint()) +
           (noise_var / (beta * beta)) * (w.adjoint() * w) +
           CMat::Identity(ns, ns);
  return hermitian_part(t);
}

void check_subcarrier_counts(std::size_t h, std::size_t bf) {
  if (h != bf) throw DimensionError("channel and beamformer subcarrier counts differ");
}

}  // namespace

CMat mse_matrix(const CMat& h, const CMat& v_rf, const CMat& v_dig, const CMat& w_rf,
                const CMat& w_dig, double beta, double noise_var) {
  if (h.cols() != v_rf.rows() || v_rf.cols() != v_dig.rows() ||
      h.rows() != w_rf.rows() || w_rf.cols() != w_dig.rows() ||
      v_dig.cols() != w_dig.cols()) {
    throw DimensionError("mse_matrix: inconsistent shapes");
  }
  if (!(beta > 0.0)) throw InvalidArgument("mse_matrix: beta must be positive");
  const CMat w = w_rf * w_dig;
  const CMat e = w.adjoint() * h * (v_rf * v_dig);
  return mse_from_effective(e, w, beta, noise_var);
}

CMat mse_matrix(const CMat& h, const CMat& v, const CMat& w, double beta,
                double noise_var) {
  if (h.cols() != v.rows() || h.rows() != w.rows() || v.cols() != w.cols()) {
    throw DimensionError("mse_matrix: inconsistent shapes");
  }
  if (!(beta > 0.0)) throw InvalidArgument("mse_matrix: beta must be positive");
  const CMat e = (w.adjoint() * h * v) / beta;
  return mse_from_effective(e, w, beta, noise_var);
}

double modified_mse(const CMat& h, const CMat& v_rf, const CMat& v_dig, const CMat& w_rf,
                    const CMat& w_dig, double beta, double noise_var) {
  return linalg::trace_re(mse_matrix(h, v_rf, v_dig, w_rf, w_dig, beta, noise_var));
}

double modified_mse(const std::vector<CMat>& h, const HybridBeamformer& bf,
                    double noise_var) {
  check_subcarrier_counts(h.size(), bf.v_dig.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    acc += modified_mse(h[k], bf.v_rf, bf.v_dig[k], bf.w_rf, bf.w_dig[k], bf.beta[k],
                        noise_var);
  }
  return acc;
}

std::vector<CMat> mse_matrices(const std::vector<CMat>& h, const LinkBeamformer& bf,
                               double noise_var) {
  check_subcarrier_counts(h.size(), bf.precoders.size());
  std::vector<CMat> out;
  out.reserve(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) {
    out.push_back(mse_matrix(h[k], bf.precoders[k], bf.combiners[k], bf.beta[k],
                             noise_var));
  }
  return out;
}

double modified_mse(const std::vector<CMat>& h, const LinkBeamformer& bf,
                    double noise_var) {
  double acc = 0.0;
  for (const auto& t : mse_matrices(h, bf, noise_var)) acc += linalg::trace_re(t);
  return acc;
}

// ---------------------------------------------------------------------------

double optimal_beta(const CMat& v_rf, const CMat& v_dig) {
  const double p = (v_rf * v_dig).squaredNorm();
  if (!(p > 0.0) || !std::isfinite(p)) {
    throw InvalidArgument("optimal_beta: precoder is zero");
  }
  return 1.0 / std::sqrt(p);
}

CMat optimal_digital_precoder(const CMat& v_rf, const CMat& h1, double noise_var,
                              double w, const CMat* lambda) {
  if (v_rf.rows() != h1.rows()) {
    throw DimensionError("optimal_digital_precoder: v_rf and h1 row counts differ");
  }
  if (!(w > 0.0)) throw InvalidArgument("optimal_digital_precoder: w must be positive");
  const CMat c = v_rf.adjoint() * h1;  // n_rf x n_s
  const CMat gram = v_rf.adjoint() * v_rf;
  if (lambda == nullptr) {
    const CMat a = hermitian_part(c * c.adjoint() + (noise_var * w) * gram);
    return hermitian_solve(a, c);
  }
  if (lambda->rows() != h1.cols() || lambda->cols() != h1.cols()) {
    throw DimensionError("optimal_digital_precoder: lambda shape");
  }
  const CMat cl = c * (*lambda);
  const CMat a = hermitian_part(cl * c.adjoint() + (noise_var * w) * gram);
  return hermitian_solve(a, cl);
}

CMat optimal_digital_combiner(const CMat& w_rf, const CMat& h2, double noise_var,
                              double beta) {
  if (w_rf.rows() != h2.rows()) {
    throw DimensionError("optimal_digital_combiner: w_rf and h2 row counts differ");
  }
  if (!(beta > 0.0)) throw InvalidArgument("optimal_digital_combiner: beta must be positive");
  const CMat c = w_rf.adjoint() * h2;
  const CMat a = hermitian_part(c * c.adjoint() +
                                (noise_var / (beta * beta)) * (w_rf.adjoint() * w_rf));
  return hermitian_solve(a, c);
}

double combiner_energy(const CMat& w) { return w.squaredNorm(); }

double weighted_combiner_energy(const CMat& w, const CMat& lambda) {
  return linalg::trace_re(lambda * (w.adjoint() * w));
}

// ---------------------------------------------------------------------------

double spectral_efficiency(const std::vector<CMat>& h, const LinkBeamformer& bf,
                           double noise_var) {
  check_subcarrier_counts(h.size(), bf.precoders.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const CMat& w = bf.combiners[k];
    const CMat whv = w.adjoint() * h[k] * bf.precoders[k];
    const CMat gram = w.adjoint() * w;
    // det(I + G^{-1} A / s2) = det(I + L^{-1} A L^{-H} / s2) with G = L L^H.
    Eigen::LLT<CMat> llt(gram);
    if (llt.info() != Eigen::Success || llt.rcond() < linalg::kSingularRcond) {
      throw SingularError("spectral_efficiency: combiner is rank deficient");
    }
    const CMat x = llt.matrixL().solve(whv);
    const CMat m = CMat::Identity(x.rows(), x.rows()) + (x * x.adjoint()) / noise_var;
    acc += linalg::log_det_hpd(hermitian_part(m)) / std::log(2.0);
  }
  return acc / static_cast<double>(h.size());
}

double spectral_efficiency_subspace(const std::vector<CMat>& h, const LinkBeamformer& bf,
                                    double noise_var) {
  check_subcarrier_counts(h.size(), bf.precoders.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const CMat& w = bf.combiners[k];
    const CMat hv = h[k] * bf.precoders[k];
    const auto ns = hv.cols();
    Eigen::JacobiSVD<CMat> svd(w, Eigen::ComputeThinU);
    const RVec& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > 1e-12 * std::max(smax, 1e-300)) ++rank;
    if (smax == 0.0) rank = 0;
    const CMat b = svd.matrixU().leftCols(rank).adjoint() * hv;
    const CMat m = CMat::Identity(ns, ns) + (b.adjoint() * b) / noise_var;
    acc += linalg::log_det_hpd(hermitian_part(m)) / std::log(2.0);
  }
  return acc / static_cast<double>(h.size());
}

WeightUpdate optimal_weight(const CMat& t) {
  if (t.rows() != t.cols()) throw DimensionError("optimal_weight: T must be square");
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(t));
  RVec ev = es.eigenvalues();
  WeightUpdate out;
  constexpr double kFloor = 1e-10;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < kFloor) {
      ev(i) = kFloor;
      out.clamped = true;
    }
  }
  out.lambda = hermitian_part(es.eigenvectors() * ev.cwiseInverse().asDiagonal() *
                              es.eigenvectors().adjoint());
  return out;
}

double wmmse_objective(const std::vector<CMat>& t, const WeightMatrices& weights) {
  if (t.size() != weights.lambda.size()) {
    throw DimensionError("wmmse_objective: list lengths differ");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    acc += linalg::trace_re(weights.lambda[k] * t[k]) -
           linalg::log_det_hpd(weights.lambda[k]);
  }
  return acc;
}

// ---------------------------------------------------------------------------

PowerAllocation mmse_power_allocation(const RVec& s, double noise_var) {
  const auto n = s.size();
  PowerAllocation out;
  out.p = RVec::Zero(n);
  if (n == 0) return out;
  const double sigma = std::sqrt(noise_var);

  // Stream indices by descending gain; ties keep the lower index first.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return s(a) > s(b); });
  std::size_t active = 0;
  while (active < order.size() && s(order[active]) > 0.0) ++active;

  if (active == 0) {
    out.p(0) = 1.0;  // nothing gets through; put the power somewhere
  }
  while (active > 0) {
    double sum_inv = 0.0;
    double sum_inv2 = 0.0;
    for (std::size_t i = 0; i < active; ++i) {
      const double si = s(order[i]);
      sum_inv += 1.0 / si;
      sum_inv2 += 1.0 / (si * si);
    }
    const double inv_sqrt_mu = (1.0 + noise_var * sum_inv2) / (sigma * sum_inv);
    const double si_min = s(order[active - 1]);
    const double p_min = sigma * inv_sqrt_mu / si_min - noise_var / (si_min * si_min);
    if (p_min < 0.0) {
      --active;
      continue;
    }
    for (std::size_t i = 0; i < active; ++i) {
      const double si = s(order[i]);
      out.p(order[i]) = std::max(0.0, sigma * inv_sqrt_mu / si - noise_var / (si * si));
    }
    break;
  }
  out.p /= out.p.sum();
  for (Eigen::Index i = 0; i < n; ++i) {
    out.mse += noise_var / (noise_var + out.p(i) * s(i) * s(i));
  }
  return out;
}

FullDigitalResult full_digital_mmse(const std::vector<CMat>& h, int n_streams,
                                    double noise_var) {
  if (h.empty()) throw InvalidArgument("full_digital_mmse: no subcarriers");
  if (n_streams < 1 || n_streams > std::min(h[0].rows(), h[0].cols())) {
    throw InvalidArgument("full_digital_mmse: bad stream count");
  }
  FullDigitalResult out;
  for (const auto& hk : h) {
    Eigen::JacobiSVD<CMat> svd(hk, Eigen::ComputeThinV);
    CMat vt = svd.matrixV().leftCols(n_streams);
    for (int j = 0; j < n_streams; ++j) linalg::canonicalize_phase(vt.col(j));
    const RVec s = svd.singularValues().head(n_streams);
    PowerAllocation pa = mmse_power_allocation(s, noise_var);
    const CMat v = vt * pa.p.cwiseSqrt().cast<cd>().asDiagonal();
    const CMat hv = hk * v;
    const CMat a = hermitian_part(hv.adjoint() * hv +
                                  noise_var * CMat::Identity(n_streams, n_streams));
    // W = H V A^{-1}, A Hermitian.
    const CMat w = hermitian_solve(a, hv.adjoint()).adjoint();
    out.sum_mse += pa.mse;
    out.allocation.push_back(std::move(pa));
    out.link.precoders.push_back(v);
    out.link.combiners.push_back(w);
    out.link.beta.push_back(1.0);
  }
  return out;
}

}  // namespace hbf
