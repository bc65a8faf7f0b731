#pragma once

// Small dense helpers shared by the solver modules. All Gram-type inverses go
// through a Hermitian factorization; nothing here forms an explicit inverse
// unless the caller asks for one.

#include "hbf/types.hpp"

namespace hbf::linalg {

/// Reciprocal condition number below which a Hermitian system is singular.
inline constexpr double kSingularRcond = 1e-14;

/// (A + A^H) / 2.
CMat hermitian_part(const CMat& a);

/// Solves A X = B for Hermitian positive (semi)definite A. Uses LLT and falls
/// back to LDLT; throws SingularError when rcond(A) < kSingularRcond.
CMat hermitian_solve(const CMat& a, const CMat& b);

/// Inverse of a Hermitian positive definite matrix, symmetrized.
CMat hermitian_inverse(const CMat& a);

/// Real part of the trace.
double trace_re(const CMat& a);

/// log det of a Hermitian positive definite matrix (natural log).
double log_det_hpd(const CMat& a);

/// Λ^{-1/2} for Hermitian positive definite Λ.
CMat inverse_sqrt_hpd(const CMat& a);

/// Rotates v so its first entry with modulus above 1e-12 is real positive.
void canonicalize_phase(Eigen::Ref<CVec> v);

/// Eigenvectors of a Hermitian matrix for its k largest eigenvalues, ordered
/// by descending eigenvalue, each with canonical phase. Ties keep the lower
/// solver index first.
CMat top_eigenvectors(const CMat& hermitian, int k);

/// Largest-to-smallest eigenvalues of a Hermitian matrix.
RVec eigenvalues_desc(const CMat& hermitian);

bool is_hermitian(const CMat& a, double tol);

}  // namespace hbf::linalg
