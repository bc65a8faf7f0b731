#pragma once

// Eigen-structure analog solvers: column-wise GEVD updates, the EVD lower-
// and upper-bound solvers, OMP over an array-response dictionary, and the
// helpers they share (power iteration, phase extraction).
//
// All solvers are phrased on an AnalogProblem, so the same code serves the
// precoder (antennas = n_tx) and the combiner (antennas = n_rx).

#include <vector>

#include "hbf/mmse.hpp"
#include "hbf/types.hpp"

namespace hbf::spectral {

struct PhaseExtraction {
  CMat mat;
  int zero_entries = 0;  // entries that were exactly 0 and mapped to 1
};

/// Entrywise exp(j angle(.)).
PhaseExtraction phase_extract(const CMat& m);

struct PowerResult {
  CVec vector;                   // unit 2-norm
  double value = 0.0;            // Rayleigh quotient x^H U x / x^H W x
  std::vector<double> history;   // quotient after each iteration, start first
};

/// Dominant eigenpair of the pencil (U, W) by x <- W^{-1} U x. W must be
/// Hermitian positive definite. Starts from `start` when non-empty, else from
/// the all-ones vector. With U positive semidefinite the quotient never
/// decreases.
PowerResult power_gevd(const CMat& u, const CMat& w, int iters, const CVec& start = {});

struct GevdWorkspace {
  CMat a_m;  // n_s x n_s
  CMat u_m;  // antennas x antennas
  CMat w_m;  // antennas x antennas
};

/// Builds A_m, U_m, W_m for column m of X (single-term problem only):
///   A_m = M + c G^H Xbar Xbar^H G,   c = 1/(s * antennas)
///   U_m = c G A_m^{-2} G^H
///   W_m = I/antennas + c G A_m^{-1} G^H
GevdWorkspace gevd_workspace(const AnalogProblem& p, const CMat& x, int m);

/// Approximate objective tr((A_m + c G^H v v^H G)^{-1}) with column m
/// replaced by v.
double approx_objective(const AnalogProblem& p, const CMat& x, int m, const CVec& v);

struct GevdColumn {
  CVec before_extraction;  // power-method vector scaled to norm sqrt(antennas)
  CVec column;             // phase-extracted
};

/// One column update; the power method is warm-started from the current
/// column.
GevdColumn gevd_update_column(const AnalogProblem& p, const CMat& x, int m,
                              int power_iters = 10);

/// Reciprocal condition of X^H X / antennas below which gevd_analog rejects a
/// column update.
inline constexpr double kGevdRankRcond = 1e-8;

/// One sweep over all columns, in order. An update that would leave X
/// (numerically) rank deficient is skipped and the old column kept.
CMat gevd_analog(const AnalogProblem& p, const CMat& start, int power_iters = 10);

/// Phase-extracted top-n_rf eigenvectors of sum_k Gt_k Gt_k^H / s_k, where
/// Gt_k = G_k M_k^{-1/2} (just G_k when unweighted).
CMat evd_lb_analog(const AnalogProblem& p, int n_rf);

/// Phase-extracted top-n_rf eigenvectors of sum_k Ghat_k with
///   Ghat_k = c G_k (I + c G_k^H G_k)^{-1} G_k^H,  c = 1/(s_k * antennas).
CMat evd_ub_analog(const AnalogProblem& p, int n_rf);

/// c G (I + c G^H G)^{-1} G^H for one term, so A^{-1} = I - Ghat with
/// A = I + c G G^H.
CMat evd_ub_term(const CMat& g, double c);

/// N^2 n_s^2 / sum_k tr(I + G_k^H Pi G_k / s_k): lower bound on the
/// unweighted objective at X.
double evd_lower_bound(const AnalogProblem& p, const CMat& x);

/// tr(X^H (sum_k A_k^{-1}) X), A_k = I + G_k G_k^H / (s_k * antennas). Valid
/// upper bound on the unweighted objective when X^H X = antennas * I.
double evd_upper_bound(const AnalogProblem& p, const CMat& x);

/// sum_k tr(B^H Atilde_k^{-1} B) - N (n_rf - n_s), B = X / sqrt(antennas),
/// Atilde_k = I + G_k G_k^H / s_k. Tighter upper bound under the same
/// condition.
double evd_upper_bound_tight(const AnalogProblem& p, const CMat& x);

struct Dictionary {
  CMat columns;  // antennas x atoms, unit-norm columns
};

struct OmpResult {
  CMat analog;                   // unit modulus, antennas x n_rf
  std::vector<int> indices;      // selection order
  std::vector<double> residual;  // sum_k ||R_k||_F^2 before round 1 and after each
};

/// Greedy selection: each round picks the unselected atom maximizing
/// sum_k ||a^H R_k||^2 (lowest index on ties) and replaces every residual by
/// its least-squares remainder against the selected atoms.
OmpResult omp_select(const Dictionary& dict, const std::vector<CMat>& targets, int n_rf);

/// Per-term unconstrained optimum (G M^{-1} G^H + s I)^{-1} G M^{-1},
/// normalized to unit Frobenius norm.
std::vector<CMat> omp_targets(const AnalogProblem& p);

/// OMP against omp_targets(p); atoms are rescaled to unit modulus.
OmpResult omp_analog(const AnalogProblem& p, const Dictionary& dict, int n_rf);

}  // namespace hbf::spectral
