#pragma once

// MMSE transceiver building blocks: MSE matrix, closed-form digital
// precoder/combiner and scaling factor, the reduced analog objectives, the
// WMMSE weight update, spectral efficiency and the full-digital oracle.
//
// Conventions: V_U is the unnormalized digital precoder and beta the scalar
// that meets the power constraint, so the transmitted precoder is
// V = V_RF * beta * V_U and the receiver estimates s as beta^{-1} W^H y.

#include <optional>
#include <vector>

#include "hbf/types.hpp"

namespace hbf {

/// Analog parts are shared across subcarriers; digital parts and beta are
/// per subcarrier.
struct HybridBeamformer {
  CMat v_rf;                 // n_tx x n_rf, unit modulus
  CMat w_rf;                 // n_rx x n_rf, unit modulus
  std::vector<CMat> v_dig;   // n_rf x n_streams each, unnormalized V_U
  std::vector<CMat> w_dig;   // n_rf x n_streams each
  std::vector<double> beta;  // one per subcarrier

  int num_subcarriers() const { return static_cast<int>(v_dig.size()); }

  /// Overall precoder V_RF * beta_k * V_U,k.
  CMat precoder(int k) const;
  /// Overall combiner W_RF * W_B,k.
  CMat combiner(int k) const;

  /// Throws InvalidArgument if a modulus or the per-subcarrier power is off
  /// by more than the given tolerances.
  void check_feasible(double modulus_tol = 1e-12, double power_tol = 1e-9) const;
};

/// Overall (unstructured) per-subcarrier precoders and combiners. Used for the
/// full-digital oracle and as the common currency of the evaluation code.
struct LinkBeamformer {
  std::vector<CMat> precoders;  // n_tx x n_streams, ||V_k||_F = 1
  std::vector<CMat> combiners;  // n_rx x n_streams
  std::vector<double> beta;

  int num_subcarriers() const { return static_cast<int>(precoders.size()); }
};

LinkBeamformer to_link(const HybridBeamformer& bf);

struct WeightMatrices {
  std::vector<CMat> lambda;  // n_streams x n_streams, Hermitian PD
};

// ---------------------------------------------------------------------------
// MSE matrix and sum-MSE

/// T = E E^H - E - E^H + sigma2 beta^-2 W^H W + I with E = W^H H V_RF V_U,
/// where W = W_RF W_B. Cross terms are symmetrized.
CMat mse_matrix(const CMat& h, const CMat& v_rf, const CMat& v_dig,
                const CMat& w_rf, const CMat& w_dig, double beta, double noise_var);

/// Same matrix from overall beamformers: E = beta^-1 W^H H V.
CMat mse_matrix(const CMat& h, const CMat& v, const CMat& w, double beta,
                double noise_var);

double modified_mse(const CMat& h, const CMat& v_rf, const CMat& v_dig,
                    const CMat& w_rf, const CMat& w_dig, double beta,
                    double noise_var);

/// Sum over subcarriers of tr(T_k).
double modified_mse(const std::vector<CMat>& h, const HybridBeamformer& bf,
                    double noise_var);
double modified_mse(const std::vector<CMat>& h, const LinkBeamformer& bf,
                    double noise_var);

std::vector<CMat> mse_matrices(const std::vector<CMat>& h, const LinkBeamformer& bf,
                               double noise_var);

// ---------------------------------------------------------------------------
// Closed forms

/// (tr(V_RF V_U V_U^H V_RF^H))^{-1/2}. Throws InvalidArgument for a zero
/// precoder.
double optimal_beta(const CMat& v_rf, const CMat& v_dig);

/// Unweighted: (V^H H1 H1^H V + noise_var*w V^H V)^{-1} V^H H1.
/// Weighted (lambda given, w interpreted as psi = tr(Lambda W^H W)):
/// (V^H H1 Lambda H1^H V + noise_var*psi V^H V)^{-1} V^H H1 Lambda.
CMat optimal_digital_precoder(const CMat& v_rf, const CMat& h1, double noise_var,
                              double w, const CMat* lambda = nullptr);

/// (W^H H2 H2^H W + noise_var beta^-2 W^H W)^{-1} W^H H2. The weighted
/// problem has the same minimizer, so no weight argument is needed.
CMat optimal_digital_combiner(const CMat& w_rf, const CMat& h2, double noise_var,
                              double beta);

/// tr(W^H W).
double combiner_energy(const CMat& w);

/// tr(Lambda W^H W).
double weighted_combiner_energy(const CMat& w, const CMat& lambda);

// ---------------------------------------------------------------------------
// Reduced analog objectives

/// Shared form of the precoder and combiner sub-problems over an analog matrix
/// X with `antennas` rows:
///
///   f(X) = sum_k tr((M_k + G_k^H Pi(X) G_k / s_k)^{-1}),
///   Pi(X) = X (X^H X)^{-1} X^H.
///
/// M_k defaults to the identity when `m` is empty.
struct AnalogProblem {
  int antennas = 0;
  std::vector<CMat> g;       // antennas x n_streams
  std::vector<double> s;     // positive noise scales
  std::vector<CMat> m;       // empty or one Hermitian PD matrix per subcarrier

  int num_terms() const { return static_cast<int>(g.size()); }
  bool weighted() const { return !m.empty(); }
  void validate() const;
};

/// Objective value. Throws SingularError if X lacks full column rank.
double analog_objective(const AnalogProblem& p, const CMat& x);

/// Conjugate (Wirtinger) gradient df/dX^*:
///   sum_k (1/s_k) (Pi - I) G_k P_k^{-2} G_k^H X (X^H X)^{-1},
/// P_k = M_k + G_k^H Pi G_k / s_k.
CMat analog_conj_gradient(const AnalogProblem& p, const CMat& x);

/// Value and gradient in one pass.
double analog_objective_and_gradient(const AnalogProblem& p, const CMat& x,
                                     CMat* grad);

/// Precoder sub-problem. h1_k = H_k^H W_k; w_k = tr(W_k^H W_k), or
/// psi_k = tr(Lambda_k W_k^H W_k) when weights are given.
AnalogProblem precoder_problem(const std::vector<CMat>& h1, double noise_var,
                               const std::vector<double>& w,
                               const WeightMatrices* weights = nullptr);

/// Combiner sub-problem. h2_k = H_k V_RF V_U,k. With weights, G_k becomes
/// H2_k Lambda_k^{-1/2} and M_k = Lambda_k^{-1}.
AnalogProblem combiner_problem(const std::vector<CMat>& h2, double noise_var,
                               const std::vector<double>& beta,
                               const WeightMatrices* weights = nullptr);

/// J(V_RF) for the precoder side.
double reduced_objective_J(const CMat& v_rf, const std::vector<CMat>& h1,
                           double noise_var, const std::vector<double>& w,
                           const WeightMatrices* weights = nullptr);

/// I(W_RF) for the combiner side; delegates to the J form.
double reduced_objective_I(const CMat& w_rf, const std::vector<CMat>& h2,
                           double noise_var, const std::vector<double>& beta,
                           const WeightMatrices* weights = nullptr);

// ---------------------------------------------------------------------------
// Spectral efficiency and weights

/// (1/N) sum_k log2 det(I + noise_var^-1 (W^H W)^{-1} W^H H V V^H H^H W).
/// Throws SingularError when some W_k^H W_k is singular.
double spectral_efficiency(const std::vector<CMat>& h, const LinkBeamformer& bf,
                           double noise_var);

/// Same rate computed through the orthogonal projector onto range(W_k), so
/// combiners with zero columns are allowed (the dead streams carry no rate).
double spectral_efficiency_subspace(const std::vector<CMat>& h,
                                    const LinkBeamformer& bf, double noise_var);

struct WeightUpdate {
  CMat lambda;
  bool clamped = false;  // smallest eigenvalue of T was raised to 1e-10
};

/// Lambda = T^{-1}.
WeightUpdate optimal_weight(const CMat& t);

/// sum_k tr(Lambda_k T_k) - log det Lambda_k (natural log).
double wmmse_objective(const std::vector<CMat>& t, const WeightMatrices& weights);

// ---------------------------------------------------------------------------
// Full-digital oracle

struct PowerAllocation {
  RVec p;          // per stream, sums to 1
  double mse = 0;  // sum_i noise_var / (noise_var + p_i s_i^2)
};

/// Minimizes sum_i noise_var/(noise_var + p_i s_i^2) over the simplex.
/// Streams with s_i = 0 get no power.
PowerAllocation mmse_power_allocation(const RVec& singular_values, double noise_var);

struct FullDigitalResult {
  LinkBeamformer link;
  std::vector<PowerAllocation> allocation;
  double sum_mse = 0;
};

/// Per subcarrier: top right singular vectors, MMSE power allocation, Wiener
/// receive filter, beta = 1.
FullDigitalResult full_digital_mmse(const std::vector<CMat>& h, int n_streams,
                                    double noise_var);

}  // namespace hbf
