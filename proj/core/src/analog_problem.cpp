#include <cmath>

#include <Eigen/Cholesky>

#include "hbf/linalg.hpp"
#include "hbf/mmse.hpp"

namespace hbf {

void AnalogProblem::validate() const {
  if (antennas < 1) throw InvalidArgument("AnalogProblem: antennas must be positive");
  if (g.empty()) throw InvalidArgument("AnalogProblem: no terms");
  if (s.size() != g.size()) throw DimensionError("AnalogProblem: s size");
  if (!m.empty() && m.size() != g.size()) throw DimensionError("AnalogProblem: m size");
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g[k].rows() != antennas) throw DimensionError("AnalogProblem: G_k rows");
    if (!(s[k] > 0.0) || !std::isfinite(s[k])) {
      throw InvalidArgument("AnalogProblem: noise scales must be positive");
    }
    if (!m.empty() && (m[k].rows() != g[k].cols() || m[k].cols() != g[k].cols())) {
      throw DimensionError("AnalogProblem: M_k shape");
    }
  }
}

double analog_objective_and_gradient(const AnalogProblem& p, const CMat& x,
                                     CMat* grad) {
  if (x.rows() != p.antennas) throw DimensionError("analog objective: X rows");
  const CMat gram = x.adjoint() * x;
  Eigen::LLT<CMat> llt(gram);
  if (llt.info() != Eigen::Success || llt.rcond() < linalg::kSingularRcond) {
    throw SingularError("analog objective: X is not full column rank");
  }
  const auto nrf = x.cols();
  double value = 0.0;
  // S = sum_k (1/s_k) G_k P_k^{-2} G_k^H X
  CMat s_acc;
  if (grad != nullptr) s_acc = CMat::Zero(p.antennas, nrf);

  for (int k = 0; k < p.num_terms(); ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const CMat& g = p.g[ks];
    const auto ns = g.cols();
    const CMat c = x.adjoint() * g;          // nrf x ns
    const CMat gc = llt.solve(c);            // Gram^{-1} C
    CMat pk = (c.adjoint() * gc) / p.s[ks];  // G^H Pi G / s
    if (p.weighted()) {
      pk += p.m[ks];
    } else {
      pk += CMat::Identity(ns, ns);
    }
    const CMat pinv = linalg::hermitian_inverse(pk);
    value += linalg::trace_re(pinv);
    if (grad != nullptr) {
      s_acc.noalias() += (g * (pinv * pinv * c.adjoint())) / p.s[ks];
    }
  }
  if (grad != nullptr) {
    // (Pi - I) S Gram^{-1} = X Gram^{-1} X^H R - R with R = S Gram^{-1}.
    const CMat r = llt.solve(s_acc.adjoint()).adjoint();
    *grad = x * llt.solve(x.adjoint() * r) - r;
  }
  return value;
}

double analog_objective(const AnalogProblem& p, const CMat& x) {
  return analog_objective_and_gradient(p, x, nullptr);
}

CMat analog_conj_gradient(const AnalogProblem& p, const CMat& x) {
  CMat g;
  analog_objective_and_gradient(p, x, &g);
  return g;
}

AnalogProblem precoder_problem(const std::vector<CMat>& h1, double noise_var,
                               const std::vector<double>& w,
                               const WeightMatrices* weights) {
  if (h1.empty()) throw InvalidArgument("precoder_problem: no subcarriers");
  if (w.size() != h1.size()) throw DimensionError("precoder_problem: w size");
  if (weights != nullptr && weights->lambda.size() != h1.size()) {
    throw DimensionError("precoder_problem: weight count");
  }
  AnalogProblem p;
  p.antennas = static_cast<int>(h1[0].rows());
  p.g = h1;
  for (std::size_t k = 0; k < h1.size(); ++k) {
    p.s.push_back(noise_var * w[k]);
    if (weights != nullptr) p.m.push_back(linalg::hermitian_inverse(weights->lambda[k]));
  }
  p.validate();
  return p;
}

AnalogProblem combiner_problem(const std::vector<CMat>& h2, double noise_var,
                               const std::vector<double>& beta,
                               const WeightMatrices* weights) {
  if (h2.empty()) throw InvalidArgument("combiner_problem: no subcarriers");
  if (beta.size() != h2.size()) throw DimensionError("combiner_problem: beta size");
  if (weights != nullptr && weights->lambda.size() != h2.size()) {
    throw DimensionError("combiner_problem: weight count");
  }
  AnalogProblem p;
  p.antennas = static_cast<int>(h2[0].rows());
  for (std::size_t k = 0; k < h2.size(); ++k) {
    p.s.push_back(noise_var / (beta[k] * beta[k]));
    if (weights == nullptr) {
      p.g.push_back(h2[k]);
    } else {
      // tr(L (I + c H2^H Pi H2)^{-1}) = tr((L^{-1} + c L^{-1/2} H2^H Pi H2 L^{-1/2})^{-1})
      p.g.push_back(h2[k] * linalg::inverse_sqrt_hpd(weights->lambda[k]));
      p.m.push_back(linalg::hermitian_inverse(weights->lambda[k]));
    }
  }
  p.validate();
  return p;
}

double reduced_objective_J(const CMat& v_rf, const std::vector<CMat>& h1,
                           double noise_var, const std::vector<double>& w,
                           const WeightMatrices* weights) {
  return analog_objective(precoder_problem(h1, noise_var, w, weights), v_rf);
}

double reduced_objective_I(const CMat& w_rf, const std::vector<CMat>& h2,
                           double noise_var, const std::vector<double>& beta,
                           const WeightMatrices* weights) {
  return analog_objective(combiner_problem(h2, noise_var, beta, weights), w_rf);
}

}  // namespace hbf
