#include "hbf/spectral.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "hbf/linalg.hpp"

namespace hbf::spectral {

using linalg::hermitian_inverse;
using linalg::hermitian_part;

PhaseExtraction phase_extract(const CMat& m) {
  PhaseExtraction out;
  out.mat.resize(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const cd z = m(i, j);
      if (z == cd(0.0, 0.0)) {
        out.mat(i, j) = cd(1.0, 0.0);
        ++out.zero_entries;
      } else {
        out.mat(i, j) = std::polar(1.0, std::arg(z));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

PowerResult power_gevd(const CMat& u, const CMat& w, int iters, const CVec& start) {
  const auto n = u.rows();
  if (u.cols() != n || w.rows() != n || w.cols() != n) {
    throw DimensionError("power_gevd: U and W must be square and equal size");
  }
  if (iters < 0) throw InvalidArgument("power_gevd: negative iteration count");
  Eigen::LLT<CMat> llt(hermitian_part(w));
  if (llt.info() != Eigen::Success || llt.rcond() < linalg::kSingularRcond) {
    throw SingularError("power_gevd: W is not positive definite");
  }
  const CMat uh = hermitian_part(u);
  auto quotient = [&](const CVec& x) {
    return (x.adjoint() * uh * x)(0).real() / (x.adjoint() * w * x)(0).real();
  };

  PowerResult res;
  CVec x = start.size() == n ? start : CVec::Ones(n);
  if (x.norm() == 0.0) x = CVec::Ones(n);
  x.normalize();
  res.history.push_back(quotient(x));
  for (int i = 0; i < iters; ++i) {
    CVec y = llt.solve(uh * x);
    const double nrm = y.norm();
    if (!(nrm > 0.0)) break;  // x is in the null space of U; nothing to do
    x = y / nrm;
    res.history.push_back(quotient(x));
  }
  res.vector = x;
  res.value = res.history.back();
  return res;
}

// ---------------------------------------------------------------------------

namespace {

void require_single_term(const AnalogProblem& p, const char* who) {
  p.validate();
  if (p.num_terms() != 1) {
    throw InvalidArgument(std::string(who) + ": GEVD update needs a single subcarrier");
  }
}

CMat drop_column(const CMat& x, int m) {
  CMat out(x.rows(), x.cols() - 1);
  for (Eigen::Index j = 0, o = 0; j < x.cols(); ++j) {
    if (j != m) out.col(o++) = x.col(j);
  }
  return out;
}

CMat identity_or(const AnalogProblem& p, std::size_t k) {
  const auto ns = p.g[k].cols();
  return p.weighted() ? p.m[k] : CMat::Identity(ns, ns);
}

}  // namespace

GevdWorkspace gevd_workspace(const AnalogProblem& p, const CMat& x, int m) {
  require_single_term(p, "gevd_workspace");
  if (x.rows() != p.antennas || m < 0 || m >= x.cols()) {
    throw DimensionError("gevd_workspace: bad column index or shape");
  }
  const CMat& g = p.g[0];
  const double c = 1.0 / (p.s[0] * p.antennas);
  const CMat gb = g.adjoint() * drop_column(x, m);  // n_s x (n_rf - 1)
  GevdWorkspace ws;
  ws.a_m = hermitian_part(identity_or(p, 0) + c * gb * gb.adjoint());
  const CMat a_inv = hermitian_inverse(ws.a_m);
  ws.u_m = hermitian_part(c * g * a_inv * a_inv * g.adjoint());
  ws.w_m = hermitian_part(
      CMat::Identity(p.antennas, p.antennas) / static_cast<double>(p.antennas) +
      c * g * a_inv * g.adjoint());
  return ws;
}

double approx_objective(const AnalogProblem& p, const CMat& x, int m, const CVec& v) {
  const GevdWorkspace ws = gevd_workspace(p, x, m);
  const double c = 1.0 / (p.s[0] * p.antennas);
  const CVec b = p.g[0].adjoint() * v;
  return linalg::trace_re(hermitian_inverse(ws.a_m + c * b * b.adjoint()));
}

GevdColumn gevd_update_column(const AnalogProblem& p, const CMat& x, int m,
                              int power_iters) {
  const GevdWorkspace ws = gevd_workspace(p, x, m);
  const PowerResult pr = power_gevd(ws.u_m, ws.w_m, power_iters, x.col(m));
  GevdColumn out;
  out.before_extraction = pr.vector * std::sqrt(static_cast<double>(p.antennas));
  out.column = phase_extract(pr.vector).mat;
  return out;
}

CMat gevd_analog(const AnalogProblem& p, const CMat& start, int power_iters) {
  CMat x = start;
  for (int m = 0; m < x.cols(); ++m) {
    const CVec old = x.col(m);
    x.col(m) = gevd_update_column(p, x, m, power_iters).column;
    // At low SNR the pencils of different columns share a dominant vector, so
    // an update can duplicate another column.
    const CMat gram = x.adjoint() * x / static_cast<double>(p.antennas);
    Eigen::LLT<CMat> llt(gram);
    if (llt.info() != Eigen::Success || llt.rcond() < kGevdRankRcond) x.col(m) = old;
  }
  return x;
}

// ---------------------------------------------------------------------------

CMat evd_lb_analog(const AnalogProblem& p, int n_rf) {
  p.validate();
  CMat q = CMat::Zero(p.antennas, p.antennas);
  for (std::size_t k = 0; k < p.g.size(); ++k) {
    const CMat gt =
        p.weighted() ? CMat(p.g[k] * linalg::inverse_sqrt_hpd(p.m[k])) : p.g[k];
    q += (gt * gt.adjoint()) / p.s[k];
  }
  return phase_extract(linalg::top_eigenvectors(q, n_rf)).mat;
}

CMat evd_ub_term(const CMat& g, double c) {
  const auto ns = g.cols();
  const CMat inner = CMat::Identity(ns, ns) + c * (g.adjoint() * g);
  return hermitian_part(c * g * linalg::hermitian_solve(hermitian_part(inner), g.adjoint()));
}

CMat evd_ub_analog(const AnalogProblem& p, int n_rf) {
  p.validate();
  CMat q = CMat::Zero(p.antennas, p.antennas);
  for (std::size_t k = 0; k < p.g.size(); ++k) {
    q += evd_ub_term(p.g[k], 1.0 / (p.s[k] * p.antennas));
  }
  return phase_extract(linalg::top_eigenvectors(q, n_rf)).mat;
}

double evd_lower_bound(const AnalogProblem& p, const CMat& x) {
  p.validate();
  const CMat gram = x.adjoint() * x;
  double sum_tr = 0.0;
  double ns_total = 0.0;
  for (std::size_t k = 0; k < p.g.size(); ++k) {
    const CMat c = x.adjoint() * p.g[k];
    const auto ns = static_cast<double>(p.g[k].cols());
    sum_tr += ns + linalg::trace_re(c.adjoint() * linalg::hermitian_solve(gram, c)) / p.s[k];
    ns_total = ns;
  }
  const double n = static_cast<double>(p.g.size());
  return n * n * ns_total * ns_total / sum_tr;
}

double evd_upper_bound(const AnalogProblem& p, const CMat& x) {
  p.validate();
  const auto n = p.antennas;
  CMat sum_inv = CMat::Zero(n, n);
  for (std::size_t k = 0; k < p.g.size(); ++k) {
    const double c = 1.0 / (p.s[k] * n);
    sum_inv += CMat::Identity(n, n) - evd_ub_term(p.g[k], c);
  }
  return linalg::trace_re(x.adjoint() * sum_inv * x);
}

double evd_upper_bound_tight(const AnalogProblem& p, const CMat& x) {
  p.validate();
  const auto n = p.antennas;
  const CMat b = x / std::sqrt(static_cast<double>(n));
  double acc = 0.0;
  for (std::size_t k = 0; k < p.g.size(); ++k) {
    const CMat a_inv = CMat::Identity(n, n) - evd_ub_term(p.g[k], 1.0 / p.s[k]);
    acc += linalg::trace_re(b.adjoint() * a_inv * b) -
           static_cast<double>(x.cols() - p.g[k].cols());
  }
  return acc;
}

// ---------------------------------------------------------------------------

OmpResult omp_select(const Dictionary& dict, const std::vector<CMat>& targets, int n_rf) {
  const auto atoms = dict.columns.cols();
  if (n_rf < 1) throw InvalidArgument("omp_select: n_rf must be positive");
  if (atoms < n_rf) throw InvalidArgument("omp_select: dictionary has fewer atoms than n_rf");
  if (targets.empty()) throw InvalidArgument("omp_select: no targets");
  for (const auto& t : targets) {
    if (t.rows() != dict.columns.rows()) throw DimensionError("omp_select: target rows");
  }

  OmpResult res;
  std::vector<CMat> resid = targets;
  std::vector<bool> used(static_cast<std::size_t>(atoms), false);
  auto total = [&] {
    double acc = 0.0;
    for (const auto& r : resid) acc += r.squaredNorm();
    return acc;
  };
  res.residual.push_back(total());

  for (int round = 0; round < n_rf; ++round) {
    RVec score = RVec::Zero(atoms);
    for (const auto& r : resid) {
      score += (dict.columns.adjoint() * r).rowwise().squaredNorm();
    }
    Eigen::Index best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < atoms; ++a) {
      if (!used[static_cast<std::size_t>(a)] && score(a) > best_score) {
        best = a;
        best_score = score(a);
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    res.indices.push_back(static_cast<int>(best));

    CMat sel(dict.columns.rows(), static_cast<Eigen::Index>(res.indices.size()));
    for (std::size_t i = 0; i < res.indices.size(); ++i) {
      sel.col(static_cast<Eigen::Index>(i)) = dict.columns.col(res.indices[i]);
    }
    // Least-squares remainder; an orthonormal basis keeps this well defined
    // even when selected atoms are nearly parallel.
    Eigen::HouseholderQR<CMat> qr(sel);
    const CMat q = qr.householderQ() * CMat::Identity(sel.rows(), sel.cols());
    for (std::size_t k = 0; k < resid.size(); ++k) {
      resid[k] = targets[k] - q * (q.adjoint() * targets[k]);
    }
    res.residual.push_back(total());
  }

  res.analog.resize(dict.columns.rows(), n_rf);
  for (int j = 0; j < n_rf; ++j) {
    res.analog.col(j) = dict.columns.col(res.indices[static_cast<std::size_t>(j)]);
  }
  return res;
}

std::vector<CMat> omp_targets(const AnalogProblem& p) {
  p.validate();
  std::vector<CMat> out;
  for (std::size_t k = 0; k < p.g.size(); ++k) {
    const CMat& g = p.g[k];
    const CMat gm = p.weighted() ? CMat(g * hermitian_inverse(p.m[k])) : g;
    const CMat a = hermitian_part(gm * g.adjoint() +
                                  p.s[k] * CMat::Identity(p.antennas, p.antennas));
    CMat t = linalg::hermitian_solve(a, gm);
    const double nrm = t.norm();
    if (nrm > 0.0) t /= nrm;
    out.push_back(std::move(t));
  }
  return out;
}

OmpResult omp_analog(const AnalogProblem& p, const Dictionary& dict, int n_rf) {
  if (dict.columns.rows() != p.antennas) throw DimensionError("omp_analog: dictionary rows");
  OmpResult res = omp_select(dict, omp_targets(p), n_rf);
  res.analog = phase_extract(res.analog).mat;
  return res;
}

}  // namespace hbf::spectral
