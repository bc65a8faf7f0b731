#include "hbf/driver.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "hbf/linalg.hpp"
#include "hbf/matrix_io.hpp"
#include "hbf/rng.hpp"

namespace hbf::driver {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::MO: return "mo";
    case Algorithm::GEVD: return "gevd";
    case Algorithm::EVD_LB: return "evd-lb";
    case Algorithm::EVD_UB: return "evd-ub";
    case Algorithm::OMP: return "omp";
    case Algorithm::FULL_DIGITAL: return "fd";
  }
  return "?";
}

std::string to_string(Criterion c) { return c == Criterion::MMSE ? "mmse" : "wmmse"; }
std::string to_string(InitMode m) { return m == InitMode::VFD ? "vfd" : "random"; }

namespace {

std::string normalize_name(std::string s) {
  for (auto& ch : s) {
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (ch == '_') ch = '-';
  }
  return s;
}

}  // namespace

Algorithm parse_algorithm(const std::string& s) {
  const std::string n = normalize_name(s);
  if (n == "mo") return Algorithm::MO;
  if (n == "gevd") return Algorithm::GEVD;
  if (n == "evd-lb") return Algorithm::EVD_LB;
  if (n == "evd-ub") return Algorithm::EVD_UB;
  if (n == "omp") return Algorithm::OMP;
  if (n == "fd" || n == "full-digital") return Algorithm::FULL_DIGITAL;
  throw InvalidArgument("unknown algorithm '" + s + "'");
}

Criterion parse_criterion(const std::string& s) {
  const std::string n = normalize_name(s);
  if (n == "mmse") return Criterion::MMSE;
  if (n == "wmmse") return Criterion::WMMSE;
  throw InvalidArgument("unknown criterion '" + s + "'");
}

InitMode parse_init_mode(const std::string& s) {
  const std::string n = normalize_name(s);
  if (n == "vfd") return InitMode::VFD;
  if (n == "random") return InitMode::RANDOM;
  throw InvalidArgument("unknown init mode '" + s + "'");
}

void SolverOptions::validate(const SystemDims& dims) const {
  dims.validate();
  if (algorithm == Algorithm::GEVD && !dims.narrowband()) {
    throw InvalidArgument("GEVD requires narrowband (n_subcarriers = 1)");
  }
  if (algorithm == Algorithm::EVD_UB && criterion == Criterion::WMMSE) {
    throw InvalidArgument("EVD-UB has no WMMSE variant");
  }
  if (!(outer_tol > 0.0)) throw InvalidArgument("outer_tol must be positive");
  if (outer_cap < 1) throw InvalidArgument("outer_cap must be positive");
  if (power_iters < 1) throw InvalidArgument("power_iters must be positive");
  if (quant_bits && (*quant_bits < 1 || *quant_bits > 30)) {
    throw InvalidArgument("quant_bits must lie in [1, 30]");
  }
  mo.line_search.validate();
}

Dictionaries make_dictionaries(const channel::ChannelRealization& ch) {
  Dictionaries d;
  d.tx.columns = channel::response_matrix({ch.n_tx()}, ch.rays.aod);
  d.rx.columns = channel::response_matrix({ch.n_rx()}, ch.rays.aoa);
  return d;
}

void write_run_trace_csv(std::ostream& os, const RunTrace& trace) {
  os << "outer_iter,objective,spectral_efficiency\n";
  for (const auto& r : trace.records) {
    os << r.outer_iter << ',' << io::format_double(r.objective) << ','
       << io::format_double(r.spectral_efficiency) << '\n';
  }
}

std::vector<CMat> vfd_init(const std::vector<CMat>& h, const SystemDims& dims) {
  return full_digital_mmse(h, dims.n_streams, dims.noise_var).link.combiners;
}

// ---------------------------------------------------------------------------

namespace {

enum class Side { Tx, Rx };

struct Alternation {
  const std::vector<CMat>& h;
  const SystemDims& dims;
  const SolverOptions& opts;
  const Dictionaries* dicts;
  const RunControl& ctl;
  RunTrace trace;

  CMat analog_step(const AnalogProblem& p, const CMat& start, Side side) {
    switch (opts.algorithm) {
      case Algorithm::MO: {
        manifold::MoResult r = manifold::mo_solve(p, start, opts.mo);
        if (r.stalled) ++trace.stalled_line_searches;
        if (ctl.keep_inner_traces) trace.inner.push_back(std::move(r.trace));
        return r.point;
      }
      case Algorithm::GEVD:
        return spectral::gevd_analog(p, start, opts.power_iters);
      case Algorithm::EVD_LB:
        return spectral::evd_lb_analog(p, dims.n_rf);
      case Algorithm::EVD_UB:
        return spectral::evd_ub_analog(p, dims.n_rf);
      case Algorithm::OMP: {
        if (dicts == nullptr) throw InvalidArgument("OMP needs array-response dictionaries");
        return spectral::omp_analog(p, side == Side::Tx ? dicts->tx : dicts->rx, dims.n_rf)
            .analog;
      }
      case Algorithm::FULL_DIGITAL:
        break;
    }
    throw InvalidArgument("alternation: algorithm has no analog step");
  }

  SolveResult run(bool weighted) {
    opts.validate(dims);
    if (opts.algorithm == Algorithm::FULL_DIGITAL) {
      throw InvalidArgument("FULL_DIGITAL has no alternating solver; use solve()");
    }
    if (static_cast<int>(h.size()) != dims.n_subcarriers) {
      throw DimensionError("channel count does not match n_subcarriers");
    }
    for (const auto& hk : h) {
      if (hk.rows() != dims.n_rx || hk.cols() != dims.n_tx) {
        throw DimensionError("channel shape does not match dims");
      }
    }
    const auto n = h.size();
    const int ns = dims.n_streams;
    const double s2 = dims.noise_var;

    Rng rng(trial_seed(opts.seed, 0, 0x5eed));
    HybridBeamformer bf;
    bf.v_rf = random_unit_modulus(rng, dims.n_tx, dims.n_rf);
    bf.w_rf = random_unit_modulus(rng, dims.n_rx, dims.n_rf);
    bf.v_dig.assign(n, CMat());
    bf.w_dig.assign(n, CMat());
    bf.beta.assign(n, 1.0);

    std::vector<CMat> w_overall;
    if (opts.init == InitMode::VFD) {
      w_overall = vfd_init(h, dims);
    } else {
      const CMat select = CMat::Identity(dims.n_rf, ns);
      for (std::size_t k = 0; k < n; ++k) {
        const CMat w0 = bf.w_rf * select;
        const CMat h1 = h[k].adjoint() * w0;
        const CMat vu = optimal_digital_precoder(bf.v_rf, h1, s2, combiner_energy(w0));
        const double b = optimal_beta(bf.v_rf, vu);
        const CMat h2 = h[k] * bf.v_rf * vu;
        w_overall.push_back(bf.w_rf * optimal_digital_combiner(bf.w_rf, h2, s2, b));
      }
    }

    WeightMatrices lambda;
    lambda.lambda.assign(n, CMat::Identity(ns, ns));
    bool weights_active = false;  // Lambda = I is passed as "no weights"

    const bool monotone = opts.algorithm == Algorithm::MO;
    HybridBeamformer best;
    WeightMatrices best_lambda;
    double best_obj = std::numeric_limits<double>::infinity();
    int best_iter = 0;
    double prev = std::numeric_limits<double>::quiet_NaN();

    for (int it = 1; it <= opts.outer_cap; ++it) {
      const WeightMatrices* wts = weights_active ? &lambda : nullptr;

      // Precoder given the current combiners.
      std::vector<CMat> h1(n);
      std::vector<double> wk(n);
      for (std::size_t k = 0; k < n; ++k) {
        h1[k] = h[k].adjoint() * w_overall[k];
        wk[k] = wts ? weighted_combiner_energy(w_overall[k], lambda.lambda[k])
                    : combiner_energy(w_overall[k]);
      }
      bf.v_rf = analog_step(precoder_problem(h1, s2, wk, wts), bf.v_rf, Side::Tx);
      for (std::size_t k = 0; k < n; ++k) {
        bf.v_dig[k] = optimal_digital_precoder(bf.v_rf, h1[k], s2, wk[k],
                                               wts ? &lambda.lambda[k] : nullptr);
        bf.beta[k] = optimal_beta(bf.v_rf, bf.v_dig[k]);
      }

      // Combiner given the new precoder; beta held fixed.
      std::vector<CMat> h2(n);
      for (std::size_t k = 0; k < n; ++k) h2[k] = h[k] * (bf.v_rf * bf.v_dig[k]);
      bf.w_rf = analog_step(combiner_problem(h2, s2, bf.beta, wts), bf.w_rf, Side::Rx);
      for (std::size_t k = 0; k < n; ++k) {
        bf.w_dig[k] = optimal_digital_combiner(bf.w_rf, h2[k], s2, bf.beta[k]);
        w_overall[k] = bf.w_rf * bf.w_dig[k];
      }

      std::vector<CMat> t(n);
      for (std::size_t k = 0; k < n; ++k) {
        t[k] = mse_matrix(h[k], bf.v_rf, bf.v_dig[k], bf.w_rf, bf.w_dig[k], bf.beta[k], s2);
      }
      double obj = 0.0;
      if (weighted) {
        if (!opts.freeze_weights) {
          for (std::size_t k = 0; k < n; ++k) {
            WeightUpdate u = optimal_weight(t[k]);
            if (u.clamped) ++trace.clamped_weights;
            lambda.lambda[k] = std::move(u.lambda);
          }
          weights_active = true;
        }
      }
      if (weights_active) {
        obj = wmmse_objective(t, lambda);
      } else {
        for (const auto& tk : t) obj += linalg::trace_re(tk);
      }

      const double se = spectral_efficiency_subspace(h, to_link(bf), s2);
      trace.records.push_back({it, obj, se});
      if (!monotone && obj < best_obj) {
        best_obj = obj;
        best = bf;
        best_lambda = lambda;
        best_iter = it;
      }
      if (it > 1 && std::abs(prev - obj) <= opts.outer_tol * std::abs(prev)) break;
      prev = obj;
    }

    SolveResult out;
    if (!monotone && best_iter != trace.iterations()) {
      trace.returned_best = true;
      out.beamformer = std::move(best);
      out.weights = std::move(best_lambda);
    } else {
      out.beamformer = std::move(bf);
      out.weights = std::move(lambda);
    }
    out.trace = std::move(trace);
    return out;
  }
};

}  // namespace

SolveResult alternate_mmse(const std::vector<CMat>& h, const SystemDims& dims,
                           const SolverOptions& opts, const Dictionaries* dicts,
                           const RunControl& ctl) {
  SolverOptions o = opts;
  o.criterion = Criterion::MMSE;
  Alternation a{h, dims, o, dicts, ctl, {}};
  return a.run(false);
}

SolveResult alternate_wmmse(const std::vector<CMat>& h, const SystemDims& dims,
                            const SolverOptions& opts, const Dictionaries* dicts,
                            const RunControl& ctl) {
  SolverOptions o = opts;
  o.criterion = Criterion::WMMSE;
  Alternation a{h, dims, o, dicts, ctl, {}};
  return a.run(true);
}

// ---------------------------------------------------------------------------

CMat quantize_matrix(const CMat& m, int bits) {
  if (bits < 1 || bits > 30) throw InvalidArgument("quantize: bits must lie in [1, 30]");
  const double step = 2.0 * std::numbers::pi / static_cast<double>(1LL << bits);
  CMat out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double k = std::arg(m(i, j)) / step;
      // Nearest integer, halves toward zero.
      const double kr = std::copysign(std::ceil(std::abs(k) - 0.5), k);
      out(i, j) = std::polar(1.0, kr * step);
    }
  }
  return out;
}

namespace {

// Greedy maximal subset of linearly independent columns, in index order.
std::vector<int> independent_columns(const CMat& x) {
  std::vector<int> keep;
  for (int j = 0; j < x.cols(); ++j) {
    keep.push_back(j);
    const CMat sub = x(Eigen::all, keep);
    const CMat gram = sub.adjoint() * sub / static_cast<double>(x.rows());
    Eigen::LLT<CMat> llt(gram);
    if (llt.info() != Eigen::Success || llt.rcond() < spectral::kGevdRankRcond) keep.pop_back();
  }
  return keep;
}

// Rows of `reduced` placed at `rows` of an n_rows matrix, zero elsewhere.
CMat scatter_rows(const CMat& reduced, const std::vector<int>& rows, Eigen::Index n_rows) {
  CMat out = CMat::Zero(n_rows, reduced.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(rows[i]) = reduced.row(i);
  return out;
}

}  // namespace

HybridBeamformer quantize_phases(const HybridBeamformer& bf, int bits,
                                 const std::vector<CMat>& h, double noise_var) {
  if (static_cast<int>(h.size()) != bf.num_subcarriers()) {
    throw DimensionError("quantize_phases: subcarrier count mismatch");
  }
  HybridBeamformer q = bf;
  q.v_rf = quantize_matrix(bf.v_rf, bits);
  q.w_rf = quantize_matrix(bf.w_rf, bits);
  // Coarse grids can map two columns onto the same pattern (up to sign). The
  // digital parts then use an independent subset; the other rows stay zero,
  // which leaves the overall beamformers optimal for the column span.
  const std::vector<int> vc = independent_columns(q.v_rf);
  const std::vector<int> wc = independent_columns(q.w_rf);
  const CMat v_sub = q.v_rf(Eigen::all, vc);
  const CMat w_sub = q.w_rf(Eigen::all, wc);
  for (std::size_t k = 0; k < h.size(); ++k) {
    const CMat w = q.w_rf * bf.w_dig[k];
    const CMat h1 = h[k].adjoint() * w;
    q.v_dig[k] = scatter_rows(optimal_digital_precoder(v_sub, h1, noise_var, combiner_energy(w)),
                              vc, q.v_rf.cols());
    q.beta[k] = optimal_beta(q.v_rf, q.v_dig[k]);
    const CMat h2 = h[k] * (q.v_rf * q.v_dig[k]);
    q.w_dig[k] = scatter_rows(optimal_digital_combiner(w_sub, h2, noise_var, q.beta[k]), wc,
                              q.w_rf.cols());
  }
  return q;
}

LinkSolution solve(const std::vector<CMat>& h, const SystemDims& dims,
                   const SolverOptions& opts, const Dictionaries* dicts,
                   const RunControl& ctl) {
  LinkSolution out;
  if (opts.algorithm == Algorithm::FULL_DIGITAL) {
    opts.validate(dims);
    out.link = full_digital_mmse(h, dims.n_streams, dims.noise_var).link;
    return out;
  }
  SolveResult r = opts.criterion == Criterion::MMSE
                      ? alternate_mmse(h, dims, opts, dicts, ctl)
                      : alternate_wmmse(h, dims, opts, dicts, ctl);
  if (opts.quant_bits) {
    r.beamformer = quantize_phases(r.beamformer, *opts.quant_bits, h, dims.noise_var);
  }
  out.link = to_link(r.beamformer);
  out.hybrid = std::move(r);
  return out;
}

}  // namespace hbf::driver
