#include "hbf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace hbf::linalg {

CMat hermitian_part(const CMat& a) { return (a + a.adjoint()) * 0.5; }

CMat hermitian_solve(const CMat& a, const CMat& b) {
  if (a.rows() != a.cols() || a.rows() != b.rows()) {
    throw DimensionError("hermitian_solve: shape mismatch");
  }
  if (a.rows() == 0) return CMat(0, b.cols());
  Eigen::LLT<CMat> llt(a);
  if (llt.info() == Eigen::Success && llt.rcond() >= kSingularRcond) {
    return llt.solve(b);
  }
  Eigen::LDLT<CMat> ldlt(a);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < kSingularRcond) {
    throw SingularError("hermitian_solve: matrix is numerically singular");
  }
  return ldlt.solve(b);
}

CMat hermitian_inverse(const CMat& a) {
  return hermitian_part(hermitian_solve(a, CMat::Identity(a.rows(), a.cols())));
}

double trace_re(const CMat& a) { return a.trace().real(); }

double log_det_hpd(const CMat& a) {
  Eigen::LLT<CMat> llt(a);
  if (llt.info() != Eigen::Success) {
    throw SingularError("log_det_hpd: matrix is not positive definite");
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    acc += std::log(llt.matrixLLT()(i, i).real());
  }
  return 2.0 * acc;
}

CMat inverse_sqrt_hpd(const CMat& a) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(a));
  const RVec& ev = es.eigenvalues();
  if (ev.minCoeff() <= 0.0) {
    throw SingularError("inverse_sqrt_hpd: matrix is not positive definite");
  }
  const RVec inv_sqrt = ev.array().rsqrt();
  return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint();
}

void canonicalize_phase(Eigen::Ref<CVec> v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    if (mag > 1e-12) {
      v *= std::conj(v(i)) / mag;
      v(i) = cd(mag, 0.0);
      return;
    }
  }
}

CMat top_eigenvectors(const CMat& hermitian, int k) {
  const auto n = hermitian.rows();
  if (k < 0 || k > n) throw InvalidArgument("top_eigenvectors: bad k");
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(hermitian));
  if (es.info() != Eigen::Success) {
    throw SingularError("top_eigenvectors: eigensolver failed");
  }
  // Eigen sorts ascending; stable descending order keeps the lower solver
  // index first among equal eigenvalues.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const RVec& ev = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return ev(a) > ev(b); });
  CMat out(n, k);
  for (int j = 0; j < k; ++j) {
    out.col(j) = es.eigenvectors().col(order[static_cast<std::size_t>(j)]);
    canonicalize_phase(out.col(j));
  }
  return out;
}

RVec eigenvalues_desc(const CMat& hermitian) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(hermitian),
                                         Eigen::EigenvaluesOnly);
  return es.eigenvalues().reverse();
}

bool is_hermitian(const CMat& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace hbf::linalg

namespace hbf {

void SystemDims::validate() const {
  if (n_tx < 1 || n_rx < 1 || n_rf < 1 || n_streams < 1 || n_subcarriers < 1) {
    throw InvalidArgument("SystemDims: all counts must be positive");
  }
  if (!(noise_var > 0.0) || !std::isfinite(noise_var)) {
    throw InvalidArgument("SystemDims: noise_var must be positive and finite");
  }
  if (n_rf < n_streams) {
    throw InvalidArgument("SystemDims: n_rf must be at least n_streams");
  }
  if (n_rf > std::min(n_tx, n_rx)) {
    throw InvalidArgument("SystemDims: n_rf must not exceed min(n_tx, n_rx)");
  }
}

}  // namespace hbf
