#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <hbf/channel.hpp>
#include <hbf/linalg.hpp>
#include <hbf/mmse.hpp>
#include <hbf/rng.hpp>
#include <hbf/spectral.hpp>

#include "test_support.hpp"

namespace {

using namespace hbf;
using test::Side;

constexpr double kPi = std::numbers::pi;

// Unit-modulus matrix with X^H X = n I: DFT columns with random row phases.
CMat random_isometric_feasible(Rng& rng, int n, int k) {
  std::vector<int> cols(n);
  for (int i = 0; i < n; ++i) cols[i] = i;
  std::shuffle(cols.begin(), cols.end(), rng);
  CMat x(n, k);
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < n; ++i) x(i, j) = std::polar(1.0, 2.0 * kPi * i * cols[j] / n);
  }
  CVec d(n);
  for (int i = 0; i < n; ++i) d(i) = std::polar(1.0, uniform_angle(rng));
  return d.asDiagonal() * x;
}

// Pencil (U, W) with prescribed generalized eigenvalues: U = W X diag(l) X^H W
// with X^H W X = I.
void pencil_with_spectrum(Rng& rng, const RVec& l, CMat& u, CMat& w) {
  const int n = static_cast<int>(l.size());
  w = test::random_hpd(rng, n, 0.5);
  Eigen::SelfAdjointEigenSolver<CMat> es(w);
  const CMat w_inv_sqrt = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                          es.eigenvectors().adjoint();
  const CMat x = w_inv_sqrt * test::random_isometry(rng, n, n);
  u = w * x * l.asDiagonal() * x.adjoint() * w;
  u = (u + u.adjoint()) * 0.5;
}

// Absolute inner product of matching columns normalized by the row count.
double worst_column_alignment(const CMat& a, const CMat& b) {
  double worst = 1.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    worst = std::min(worst, std::abs(a.col(j).dot(b.col(j))) / static_cast<double>(a.rows()));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Phase extraction

TEST(PhaseExtract, Examples) {
  CMat m(1, 3);
  m << std::polar(3.0, kPi / 4), cd(-2.0, 0.0), cd(0.0, 0.0);
  const auto r = spectral::phase_extract(m);
  EXPECT_NEAR(std::abs(r.mat(0, 0) - std::polar(1.0, kPi / 4)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(r.mat(0, 1) - cd(-1.0, 0.0)), 0.0, 1e-15);
  EXPECT_EQ(r.mat(0, 2), cd(1.0, 0.0));
  EXPECT_EQ(r.zero_entries, 1);
}

TEST(PhaseExtract, UnitModulusInputUnchanged) {
  Rng rng(1);
  const CMat x = random_unit_modulus(rng, 8, 3);
  const auto r = spectral::phase_extract(x);
  EXPECT_LT((r.mat - x).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(r.zero_entries, 0);
}

// ---------------------------------------------------------------------------
// Power method

TEST(PowerGevd, DiagonalPencil) {
  CMat u = CMat::Zero(2, 2);
  u(0, 0) = 2.0;
  u(1, 1) = 1.0;
  const auto r = spectral::power_gevd(u, CMat::Identity(2, 2), 60);
  EXPECT_NEAR(r.value, 2.0, 1e-12);
  EXPECT_NEAR(std::abs(r.vector(0)), 1.0, 1e-12);
  EXPECT_NEAR(r.vector.norm(), 1.0, 1e-14);
}

TEST(PowerGevd, IdentityMetricIsOrdinaryPowerMethod) {
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    RVec l(6);
    l << 5.0, 2.0, 1.5, 1.0, 0.5, 0.1;
    const CMat q = test::random_isometry(rng, 6, 6);
    const CMat u = q * l.asDiagonal() * q.adjoint();
    const auto r = spectral::power_gevd((u + u.adjoint()) * 0.5, CMat::Identity(6, 6), 50);
    EXPECT_NEAR(r.value, 5.0, 1e-10);
    EXPECT_NEAR(std::abs(r.vector.dot(q.col(0))), 1.0, 1e-10);
  }
}

TEST(PowerGevd, MatchesDenseSolverWithSpectralGap) {
  // Eigenvalue error decays like (l2/l1)^(2k); with l2/l1 <= 0.7, 50 steps
  // leave ~1e-16 relative error.
  Rng rng(3);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    RVec l(8);
    l(0) = 1.0 + 4.0 * u01(rng);
    for (int i = 1; i < 8; ++i) l(i) = 0.7 * l(0) * u01(rng);
    CMat u, w;
    pencil_with_spectrum(rng, l, u, w);
    const double dense = test::dense_top_generalized_eigenvalue(u, w);
    EXPECT_NEAR(dense, l(0), 1e-9 * l(0));
    const auto r = spectral::power_gevd(u, w, 50);
    EXPECT_NEAR(r.value, dense, 1e-6);
  }
}

TEST(PowerGevd, RayleighQuotientNonDecreasing) {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const CMat b = random_gaussian(rng, 8, 3);
    const CMat u = b * b.adjoint();
    const CMat w = test::random_hpd(rng, 8, 0.5);
    const auto r = spectral::power_gevd(u, w, 30, random_gaussian(rng, 8, 1).col(0));
    ASSERT_EQ(r.history.size(), 31u);
    for (std::size_t i = 1; i < r.history.size(); ++i) {
      EXPECT_GE(r.history[i], r.history[i - 1] - 1e-12 * std::abs(r.history[i - 1]));
    }
  }
}

TEST(PowerGevd, RejectsIndefiniteMetric) {
  CMat w = CMat::Identity(3, 3);
  w(2, 2) = -1.0;
  EXPECT_THROW(spectral::power_gevd(CMat::Identity(3, 3), w, 5), Error);
}

// ---------------------------------------------------------------------------
// GEVD column update

TEST(GevdWorkspace, MatchesDirectConstruction) {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const bool weighted = t % 2 == 1;
    const auto p = test::random_problem(rng, t % 3 ? Side::Precoder : Side::Combiner, 10, 2, 1,
                                        weighted);
    const CMat x = random_unit_modulus(rng, 10, 3);
    const int m = t % 3;
    const auto ws = spectral::gevd_workspace(p, x, m);
    CMat xbar(10, 2);
    for (int j = 0, c = 0; j < 3; ++j) {
      if (j != m) xbar.col(c++) = x.col(j);
    }
    const double c = 1.0 / (p.s[0] * 10.0);
    const CMat mm = weighted ? p.m[0] : CMat::Identity(2, 2);
    const CMat a = mm + c * p.g[0].adjoint() * xbar * xbar.adjoint() * p.g[0];
    const CMat ai = test::lu_inverse(a);
    EXPECT_LT((ws.a_m - a).norm(), 1e-12 * a.norm());
    EXPECT_LT((ws.u_m - c * p.g[0] * ai * ai * p.g[0].adjoint()).norm(), 1e-11 * ws.u_m.norm());
    const CMat w = CMat::Identity(10, 10) / 10.0 + c * p.g[0] * ai * p.g[0].adjoint();
    EXPECT_LT((ws.w_m - w).norm(), 1e-12 * w.norm());
    EXPECT_TRUE(linalg::is_hermitian(ws.u_m, 1e-10));
    EXPECT_GT(test::schur_eigenvalues_desc(ws.w_m).minCoeff(), 0.0);
  }
}

TEST(GevdWorkspace, SingleColumnHasBareMatrix) {
  Rng rng(6);
  const auto p = test::random_problem(rng, Side::Precoder, 8, 2, 1, false);
  const auto ws = spectral::gevd_workspace(p, random_unit_modulus(rng, 8, 1), 0);
  EXPECT_LT((ws.a_m - CMat::Identity(2, 2)).norm(), 1e-15);
  const double c = 1.0 / (p.s[0] * 8.0);
  EXPECT_LT((ws.u_m - c * p.g[0] * p.g[0].adjoint()).norm(), 1e-12 * ws.u_m.norm());
}

TEST(GevdUpdate, RankOneInverseIdentity) {
  // tr((A + c b b^H)^{-1}) = tr(A^{-1}) - v^H U v / v^H W v for ||v||^2 = n.
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    const auto p = test::random_problem(rng, Side::Precoder, 8, 2, 1, t % 2 == 1);
    const CMat x = random_unit_modulus(rng, 8, 3);
    const CVec v = random_unit_modulus(rng, 8, 1).col(0);
    const auto ws = spectral::gevd_workspace(p, x, 1);
    const double c = 1.0 / (p.s[0] * 8.0);
    const CVec b = p.g[0].adjoint() * v;
    const double direct = test::lu_inverse(ws.a_m + c * b * b.adjoint()).trace().real();
    const double quotient = (v.dot(ws.u_m * v)).real() / (v.dot(ws.w_m * v)).real();
    const double formula = test::lu_inverse(ws.a_m).trace().real() - quotient;
    EXPECT_NEAR(formula, direct, 1e-9);
    EXPECT_NEAR(spectral::approx_objective(p, x, 1, v), direct, 1e-9);
  }
}

TEST(GevdUpdate, PowerStepDoesNotIncreaseApproxObjective) {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    const auto p = test::random_problem(rng, t % 2 ? Side::Combiner : Side::Precoder, 12, 2, 1,
                                        false);
    const CMat x = random_unit_modulus(rng, 12, 3);
    const int m = t % 3;
    const auto col = spectral::gevd_update_column(p, x, m);
    EXPECT_NEAR(col.before_extraction.squaredNorm(), 12.0, 1e-10);
    const double before = spectral::approx_objective(p, x, m, x.col(m));
    const double after = spectral::approx_objective(p, x, m, col.before_extraction);
    EXPECT_LE(after, before + 1e-10);
    EXPECT_LT((col.column.array().abs() - 1.0).abs().maxCoeff(), 1e-15);
  }
}

TEST(GevdUpdate, OtherColumnsUntouched) {
  Rng rng(9);
  const auto p = test::random_problem(rng, Side::Precoder, 8, 2, 1, false);
  const CMat x = random_unit_modulus(rng, 8, 3);
  CMat y = x;
  y.col(1) = spectral::gevd_update_column(p, x, 1).column;
  EXPECT_EQ(y.col(0), x.col(0));
  EXPECT_EQ(y.col(2), x.col(2));
}

TEST(GevdAnalog, KeepsFullColumnRankAtLowSnr) {
  // At very low SNR every column's pencil has the same dominant vector.
  for (int t = 0; t < 20; ++t) {
    const auto ch = channel::random_channel(trial_seed(40, t), 16, 16, 1);
    Rng rng(trial_seed(41, t));
    const CMat w = random_gaussian(rng, 16, 2);
    const auto p = precoder_problem({ch.per_subcarrier[0].adjoint() * w}, 100.0,
                                    {combiner_energy(w)});
    const CMat x = spectral::gevd_analog(p, random_unit_modulus(rng, 16, 2));
    Eigen::JacobiSVD<CMat> svd(x);
    EXPECT_GT(svd.singularValues()(1), 1e-3 * svd.singularValues()(0));
    EXPECT_NO_THROW(analog_objective(p, x));
  }
}

// ---------------------------------------------------------------------------
// EVD bound solvers

TEST(EvdLb, KyFanOnTopEigenvectors) {
  Rng rng(10);
  for (int t = 0; t < 20; ++t) {
    const CMat b = random_gaussian(rng, 10, 4);
    const CMat s = b * b.adjoint();
    const CMat q = linalg::top_eigenvectors(s, 2);
    const RVec ev = test::schur_eigenvalues_desc(s);
    EXPECT_NEAR((q.adjoint() * s * q).trace().real(), ev(0) + ev(1), 1e-10 * ev(0));
    for (int r = 0; r < 5; ++r) {
      const CMat iso = test::random_isometry(rng, 10, 2);
      EXPECT_LE((iso.adjoint() * s * iso).trace().real(), ev(0) + ev(1) + 1e-10);
    }
  }
}

TEST(EvdLb, DiagonalExample) {
  CMat s = CMat::Zero(4, 4);
  s(0, 0) = 4.0;
  s(1, 1) = 1.0;
  const CMat q = linalg::top_eigenvectors(s, 1);
  EXPECT_NEAR(std::abs(q(0, 0)), 1.0, 1e-15);
  EXPECT_NEAR(q.col(0).tail(3).norm(), 0.0, 1e-15);
}

TEST(EvdLb, PhaseOfWeightedTopEigenvectors) {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const bool weighted = t % 2 == 1;
    const auto p = test::random_problem(rng, Side::Precoder, 12, 2, 4, weighted);
    CMat q = CMat::Zero(12, 12);
    for (int k = 0; k < 4; ++k) {
      CMat gt = p.g[k];
      if (weighted) {
        Eigen::SelfAdjointEigenSolver<CMat> es(p.m[k]);
        gt = p.g[k] * es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
             es.eigenvectors().adjoint();
      }
      q += gt * gt.adjoint() / p.s[k];
    }
    Eigen::SelfAdjointEigenSolver<CMat> es(q);
    const CMat top = es.eigenvectors().rightCols(3).rowwise().reverse();
    const CMat expect = spectral::phase_extract(top).mat;
    const CMat x = spectral::evd_lb_analog(p, 3);
    EXPECT_LT((x.array().abs() - 1.0).abs().maxCoeff(), 1e-15);
    EXPECT_GT(worst_column_alignment(x, expect), 1.0 - 1e-9);
  }
}

TEST(EvdUb, MatrixInversionLemma) {
  Rng rng(12);
  for (int t = 0; t < 50; ++t) {
    const CMat g = random_gaussian(rng, 10, 2);
    const double c = 0.01 + 0.1 * t;
    const CMat a = CMat::Identity(10, 10) + c * g * g.adjoint();
    const CMat ghat = spectral::evd_ub_term(g, c);
    EXPECT_LT((test::lu_inverse(a) - (CMat::Identity(10, 10) - ghat)).cwiseAbs().maxCoeff(),
              1e-10);
  }
}

TEST(EvdUb, PhaseOfTopEigenvectors) {
  Rng rng(13);
  for (int t = 0; t < 20; ++t) {
    const auto p = test::random_problem(rng, Side::Precoder, 12, 2, 4, false);
    CMat q = CMat::Zero(12, 12);
    for (int k = 0; k < 4; ++k) {
      const double c = 1.0 / (p.s[k] * 12.0);
      const CMat a = CMat::Identity(12, 12) + c * p.g[k] * p.g[k].adjoint();
      q += CMat::Identity(12, 12) - test::lu_inverse(a);
    }
    Eigen::SelfAdjointEigenSolver<CMat> es((q + q.adjoint()) * 0.5);
    const CMat top = es.eigenvectors().rightCols(2).rowwise().reverse();
    const CMat x = spectral::evd_ub_analog(p, 2);
    EXPECT_LT((x.array().abs() - 1.0).abs().maxCoeff(), 1e-15);
    EXPECT_GT(worst_column_alignment(x, spectral::phase_extract(top).mat), 1.0 - 1e-9);
  }
}

TEST(EvdBounds, CompressedInverseEigenvalueDomination) {
  Rng rng(14);
  for (int t = 0; t < 100; ++t) {
    const CMat a = test::random_hpd(rng, 8, 0.05);
    const CMat b = test::random_isometry(rng, 8, 3);
    const RVec mu = test::schur_eigenvalues_desc(test::lu_inverse(b.adjoint() * a * b));
    const RVec lambda = test::schur_eigenvalues_desc(b.adjoint() * test::lu_inverse(a) * b);
    for (int i = 0; i < 3; ++i) EXPECT_LE(mu(i), lambda(i) + 1e-10);
  }
}

TEST(EvdBounds, SandwichOnIsometricFeasiblePoints) {
  Rng rng(15);
  for (int t = 0; t < 100; ++t) {
    const auto p = test::random_problem(rng, Side::Precoder, 16, 2, 8, false);
    const CMat x = random_isometric_feasible(rng, 16, 2 + t % 3);
    ASSERT_LT((x.adjoint() * x - 16.0 * CMat::Identity(x.cols(), x.cols())).norm(), 1e-10);
    const double j = test::direct_analog_objective(p, x);
    EXPECT_LE(spectral::evd_lower_bound(p, x), j + 1e-10);
    EXPECT_LE(j, spectral::evd_upper_bound_tight(p, x) + 1e-10);
    EXPECT_LE(j, spectral::evd_upper_bound(p, x) + 1e-10);
  }
}

// ---------------------------------------------------------------------------
// OMP

TEST(Omp, SingleAtomDictionary) {
  Rng rng(16);
  const spectral::Dictionary dict{channel::array_response({8}, 0.3)};
  const auto r = spectral::omp_select(dict, {random_gaussian(rng, 8, 2)}, 1);
  ASSERT_EQ(r.indices.size(), 1u);
  EXPECT_EQ(r.indices[0], 0);
}

TEST(Omp, RecoversPlantedSupport) {
  Rng rng(17);
  for (int t = 0; t < 20; ++t) {
    RMat angles(1, 8);
    for (int i = 0; i < 8; ++i) angles(0, i) = -1.2 + 0.3 * i + 0.05 * (t % 3);
    const spectral::Dictionary dict{channel::response_matrix({16}, angles)};
    const CMat target = dict.columns(Eigen::all, std::vector<int>{2, 5}) * random_gaussian(rng, 2, 2);
    const auto r = spectral::omp_select(dict, {target}, 2);
    EXPECT_EQ(std::set<int>(r.indices.begin(), r.indices.end()), (std::set<int>{2, 5}));
    EXPECT_LT(r.residual.back(), 1e-20 * r.residual.front());
  }
}

TEST(Omp, DistinctIndicesAndMonotoneResidual) {
  for (int t = 0; t < 30; ++t) {
    const auto ch = channel::random_channel(trial_seed(50, t), 16, 16, 1 + 7 * (t % 2));
    Rng rng(trial_seed(51, t));
    std::vector<CMat> h1;
    std::vector<double> w;
    for (const auto& h : ch.per_subcarrier) {
      const CMat wk = random_gaussian(rng, 16, 2);
      h1.push_back(h.adjoint() * wk);
      w.push_back(combiner_energy(wk));
    }
    const auto p = precoder_problem(h1, 1.0, w);
    const spectral::Dictionary dict{channel::response_matrix({16}, ch.rays.aod)};
    const auto r = spectral::omp_analog(p, dict, 4);
    EXPECT_EQ(std::set<int>(r.indices.begin(), r.indices.end()).size(), 4u);
    ASSERT_EQ(r.residual.size(), 5u);
    for (std::size_t i = 1; i < r.residual.size(); ++i) {
      EXPECT_LE(r.residual[i], r.residual[i - 1] + 1e-12);
    }
    EXPECT_LT((r.analog.array().abs() - 1.0).abs().maxCoeff(), 1e-12);
    for (int j = 0; j < 4; ++j) {
      const CVec atom = dict.columns.col(r.indices[j]) * 4.0;
      EXPECT_LT((r.analog.col(j) - atom).norm(), 1e-12);
    }
  }
}

TEST(Omp, TargetsAreNormalizedUnconstrainedOptimum) {
  Rng rng(18);
  for (int t = 0; t < 10; ++t) {
    const bool weighted = t % 2 == 1;
    const auto p = test::random_problem(rng, Side::Precoder, 8, 2, 2, weighted);
    const auto targets = spectral::omp_targets(p);
    for (int k = 0; k < 2; ++k) {
      const CMat mi = weighted ? test::lu_inverse(p.m[k]) : CMat::Identity(2, 2);
      CMat expect =
          test::lu_inverse(p.g[k] * mi * p.g[k].adjoint() + p.s[k] * CMat::Identity(8, 8)) *
          p.g[k] * mi;
      expect /= expect.norm();
      EXPECT_LT((targets[k] - expect).norm(), 1e-10);
    }
  }
}

TEST(Omp, RejectsSmallDictionary) {
  const spectral::Dictionary dict{channel::array_response({8}, 0.3)};
  EXPECT_THROW(spectral::omp_select(dict, {CMat::Ones(8, 1)}, 2), InvalidArgument);
}

}  // namespace
