#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include <hbf/channel.hpp>
#include <hbf/driver.hpp>
#include <hbf/mmse.hpp>
#include <hbf/rng.hpp>

#include "test_support.hpp"

namespace {

using namespace hbf;
using namespace hbf::driver;

constexpr double kPi = std::numbers::pi;

SystemDims dims_for(int n_rf, int ns, int n, double snr_db) {
  SystemDims d;
  d.n_rf = n_rf;
  d.n_streams = ns;
  d.n_subcarriers = n;
  d.noise_var = std::pow(10.0, -snr_db / 10.0);
  return d;
}

struct Instance {
  channel::ChannelRealization ch;
  Dictionaries dicts;
};

Instance make_instance(std::uint64_t seed, const SystemDims& d, int clusters = 5, int rays = 10) {
  Instance in{channel::random_channel(seed, d.n_tx, d.n_rx, d.n_subcarriers, clusters, rays), {}};
  in.dicts = make_dictionaries(in.ch);
  return in;
}

void expect_same(const HybridBeamformer& a, const HybridBeamformer& b) {
  EXPECT_EQ(a.v_rf, b.v_rf);
  EXPECT_EQ(a.w_rf, b.w_rf);
  ASSERT_EQ(a.num_subcarriers(), b.num_subcarriers());
  for (int k = 0; k < a.num_subcarriers(); ++k) {
    EXPECT_EQ(a.v_dig[k], b.v_dig[k]);
    EXPECT_EQ(a.w_dig[k], b.w_dig[k]);
    EXPECT_EQ(a.beta[k], b.beta[k]);
  }
}

// ---------------------------------------------------------------------------
// Initialization

TEST(VfdInit, RankOneChannelGivesDominantLeftVector) {
  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    const CVec u = random_gaussian(rng, 16, 1).col(0);
    const CVec v = random_gaussian(rng, 16, 1).col(0);
    const CMat h = u * v.adjoint();
    const auto w = vfd_init({h}, dims_for(1, 1, 1, 0.0));
    ASSERT_EQ(w.size(), 1u);
    EXPECT_NEAR(std::abs(w[0].col(0).dot(u)) / (w[0].norm() * u.norm()), 1.0, 1e-12);
  }
}

TEST(VfdInit, Deterministic) {
  const auto d = dims_for(2, 2, 4, -5.0);
  const auto in = make_instance(2, d);
  const auto a = vfd_init(in.ch.per_subcarrier, d);
  const auto b = vfd_init(in.ch.per_subcarrier, d);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k], b[k]);
}

TEST(VfdInit, OneOuterIterationIsFeasible) {
  SolverOptions o;
  o.outer_cap = 1;
  for (auto alg : {Algorithm::MO, Algorithm::GEVD, Algorithm::EVD_LB, Algorithm::EVD_UB,
                   Algorithm::OMP}) {
    o.algorithm = alg;
    const auto d = dims_for(3, 2, 1, -10.0);
    const auto in = make_instance(3, d);
    const auto r = alternate_mmse(in.ch.per_subcarrier, d, o, &in.dicts);
    EXPECT_EQ(r.trace.iterations(), 1);
    EXPECT_NO_THROW(r.beamformer.check_feasible());
  }
}

// ---------------------------------------------------------------------------
// MMSE alternation

TEST(AlternateMmse, MoTraceNonIncreasing) {
  SolverOptions o;
  for (int t = 0; t < 10; ++t) {
    const auto d = dims_for(2 + t % 2, 2, t % 3 == 0 ? 4 : 1, -10.0 + 2.0 * t);
    const auto in = make_instance(trial_seed(4, t), d);
    o.seed = t;
    o.init = t % 2 ? InitMode::RANDOM : InitMode::VFD;
    const auto r = alternate_mmse(in.ch.per_subcarrier, d, o);
    const auto& rec = r.trace.records;
    for (std::size_t i = 1; i < rec.size(); ++i) {
      EXPECT_LE(rec[i].objective, rec[i - 1].objective + 1e-9);
    }
    EXPECT_FALSE(r.trace.returned_best);
    EXPECT_LE(r.trace.iterations(), o.outer_cap);
  }
}

TEST(AlternateMmse, RecordedObjectiveIsSumMse) {
  SolverOptions o;
  const auto d = dims_for(2, 2, 4, -4.0);
  const auto in = make_instance(5, d);
  const auto r = alternate_mmse(in.ch.per_subcarrier, d, o);
  double direct = 0.0;
  for (int k = 0; k < 4; ++k) {
    direct += test::direct_mse(in.ch.per_subcarrier[k], r.beamformer.precoder(k),
                               r.beamformer.combiner(k), r.beamformer.beta[k], d.noise_var);
  }
  EXPECT_NEAR(r.trace.records.back().objective, direct, 1e-10 * direct);
}

TEST(AlternateMmse, SinglePathMatchesFullDigital) {
  SolverOptions o;
  o.outer_tol = 1e-12;
  o.mo.rel_tol = 1e-14;
  o.mo.grad_tol = 1e-10;
  o.mo.max_iters = 5000;
  for (int t = 0; t < 5; ++t) {
    const auto d = dims_for(1, 1, 1, -10.0 + 5.0 * t);
    const auto in = make_instance(trial_seed(6, t), d, 1, 1);
    const auto r = alternate_mmse(in.ch.per_subcarrier, d, o);
    const double fd = full_digital_mmse(in.ch.per_subcarrier, 1, d.noise_var).sum_mse;
    EXPECT_NEAR(modified_mse(in.ch.per_subcarrier, r.beamformer, d.noise_var), fd, 1e-6);
  }
}

TEST(AlternateMmse, AllPathsFeasibleBoundedAndAboveFullDigital) {
  SolverOptions o;
  for (auto alg : {Algorithm::MO, Algorithm::GEVD, Algorithm::EVD_LB, Algorithm::EVD_UB,
                   Algorithm::OMP}) {
    for (int n : {1, 4}) {
      if (alg == Algorithm::GEVD && n > 1) continue;
      o.algorithm = alg;
      const auto d = dims_for(2, 2, n, -6.0);
      for (int t = 0; t < 3; ++t) {
        const auto in = make_instance(trial_seed(7, t), d);
        const auto r = alternate_mmse(in.ch.per_subcarrier, d, o, &in.dicts);
        EXPECT_NO_THROW(r.beamformer.check_feasible()) << to_string(alg);
        for (const auto& rec : r.trace.records) {
          EXPECT_GT(rec.objective, 0.0);
          EXPECT_LE(rec.objective, n * d.n_streams + 1e-9);
        }
        const double fd = full_digital_mmse(in.ch.per_subcarrier, 2, d.noise_var).sum_mse;
        EXPECT_GE(modified_mse(in.ch.per_subcarrier, r.beamformer, d.noise_var), fd - 1e-9);
      }
    }
  }
}

TEST(AlternateMmse, BestSoFarIsNoWorseThanEveryRecord) {
  SolverOptions o;
  o.algorithm = Algorithm::OMP;
  for (int t = 0; t < 5; ++t) {
    const auto d = dims_for(2, 2, 1, -12.0);
    const auto in = make_instance(trial_seed(8, t), d);
    const auto r = alternate_mmse(in.ch.per_subcarrier, d, o, &in.dicts);
    const double final_mse = modified_mse(in.ch.per_subcarrier, r.beamformer, d.noise_var);
    for (const auto& rec : r.trace.records) EXPECT_LE(final_mse, rec.objective + 1e-12);
  }
}

TEST(AlternateMmse, Deterministic) {
  SolverOptions o;
  o.init = InitMode::RANDOM;
  o.seed = 99;
  const auto d = dims_for(3, 2, 4, -8.0);
  const auto in = make_instance(9, d);
  const auto a = alternate_mmse(in.ch.per_subcarrier, d, o);
  const auto b = alternate_mmse(in.ch.per_subcarrier, d, o);
  expect_same(a.beamformer, b.beamformer);
  ASSERT_EQ(a.trace.iterations(), b.trace.iterations());
  for (int i = 0; i < a.trace.iterations(); ++i) {
    EXPECT_EQ(a.trace.records[i].objective, b.trace.records[i].objective);
    EXPECT_EQ(a.trace.records[i].spectral_efficiency, b.trace.records[i].spectral_efficiency);
  }
}

TEST(AlternateMmse, KeepsInnerTraces) {
  SolverOptions o;
  o.outer_cap = 2;
  o.outer_tol = 1e-15;
  const auto d = dims_for(2, 2, 1, 0.0);
  const auto in = make_instance(10, d);
  const auto r = alternate_mmse(in.ch.per_subcarrier, d, o, nullptr, RunControl{true});
  EXPECT_EQ(r.trace.inner.size(), 2u * static_cast<std::size_t>(r.trace.iterations()));
}

TEST(AlternateMmse, VfdNeedsNoMoreOuterIterationsThanRandom) {
  const auto d = dims_for(2, 2, 1, -10.0);
  double vfd = 0.0, rnd = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto in = make_instance(trial_seed(18, t), d);
    SolverOptions o;
    o.seed = t;
    vfd += alternate_mmse(in.ch.per_subcarrier, d, o).trace.iterations();
    o.init = InitMode::RANDOM;
    rnd += alternate_mmse(in.ch.per_subcarrier, d, o).trace.iterations();
  }
  EXPECT_LE(vfd, rnd);
}

// ---------------------------------------------------------------------------
// WMMSE alternation

TEST(AlternateWmmse, FrozenWeightsReproduceMmse) {
  SolverOptions o;
  o.freeze_weights = true;
  for (auto alg : {Algorithm::MO, Algorithm::GEVD, Algorithm::EVD_LB, Algorithm::OMP}) {
    o.algorithm = alg;
    const auto d = dims_for(2, 2, 1, -5.0);
    const auto in = make_instance(11, d);
    const auto w = alternate_wmmse(in.ch.per_subcarrier, d, o, &in.dicts);
    const auto m = alternate_mmse(in.ch.per_subcarrier, d, o, &in.dicts);
    expect_same(w.beamformer, m.beamformer);
    ASSERT_EQ(w.trace.iterations(), m.trace.iterations());
    for (const auto& l : w.weights.lambda) EXPECT_EQ(l, CMat::Identity(2, 2));
  }
}

TEST(AlternateWmmse, FirstCycleMatchesMmse) {
  SolverOptions o;
  o.outer_cap = 1;
  const auto d = dims_for(2, 2, 4, 0.0);
  const auto in = make_instance(12, d);
  const auto w = alternate_wmmse(in.ch.per_subcarrier, d, o);
  const auto m = alternate_mmse(in.ch.per_subcarrier, d, o);
  expect_same(w.beamformer, m.beamformer);
}

TEST(AlternateWmmse, MoObjectiveNonIncreasingAfterWeightsStart) {
  SolverOptions o;
  for (int t = 0; t < 8; ++t) {
    const auto d = dims_for(4, 2, t % 2 ? 4 : 1, -5.0 + 2.5 * t);
    const auto in = make_instance(trial_seed(13, t), d);
    const auto r = alternate_wmmse(in.ch.per_subcarrier, d, o);
    const auto& rec = r.trace.records;
    for (std::size_t i = 1; i < rec.size(); ++i) {
      EXPECT_LE(rec[i].objective, rec[i - 1].objective + 1e-9);
    }
    for (const auto& l : r.weights.lambda) {
      EXPECT_GT(test::schur_eigenvalues_desc(l).minCoeff(), 0.0);
    }
  }
}

TEST(AlternateWmmse, UsuallyBeatsMmseInSpectralEfficiency) {
  const auto d = dims_for(2, 2, 1, 0.0);
  int wins = 0;
  for (int t = 0; t < 200; ++t) {
    const auto in = make_instance(trial_seed(19, t), d);
    SolverOptions o;
    const auto& h = in.ch.per_subcarrier;
    const double w = spectral_efficiency_subspace(
        h, to_link(alternate_wmmse(h, d, o).beamformer), d.noise_var);
    const double m = spectral_efficiency_subspace(
        h, to_link(alternate_mmse(h, d, o).beamformer), d.noise_var);
    if (w >= m) ++wins;
  }
  EXPECT_GE(wins, 120);
}

// ---------------------------------------------------------------------------
// Quantization

TEST(Quantize, GridExamples) {
  CMat m(1, 5);
  m << std::polar(1.0, kPi / 3), std::polar(1.0, 0.8 * kPi), std::polar(1.0, kPi / 2),
      std::polar(1.0, -kPi / 2), std::polar(1.0, 0.3);
  const CMat q1 = quantize_matrix(m, 1);
  EXPECT_NEAR(std::abs(q1(0, 0) - cd(1.0, 0.0)), 0.0, 1e-15);
  // Ties round toward zero phase.
  EXPECT_NEAR(std::abs(q1(0, 2) - cd(1.0, 0.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(q1(0, 3) - cd(1.0, 0.0)), 0.0, 1e-15);
  const CMat q2 = quantize_matrix(m, 2);
  EXPECT_NEAR(std::abs(q2(0, 1) - cd(-1.0, 0.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(q2(0, 2) - cd(0.0, 1.0)), 0.0, 1e-15);
  EXPECT_LT((quantize_matrix(m, 3).array().abs() - 1.0).abs().maxCoeff(), 1e-15);
  EXPECT_THROW(quantize_matrix(m, 0), InvalidArgument);
}

TEST(Quantize, PhaseErrorWithinHalfStep) {
  Rng rng(14);
  const CMat m = random_unit_modulus(rng, 16, 4);
  for (int q = 1; q <= 8; ++q) {
    const CMat r = quantize_matrix(m, q);
    const double half = kPi / std::pow(2.0, q);
    EXPECT_LE((r.array() * m.array().conjugate()).arg().abs().maxCoeff(), half + 1e-12);
  }
}

TEST(Quantize, FineGridKeepsObjective) {
  // Converged runs only: at a loose stop the re-optimized digital parts alone
  // move the objective by ~1e-6.
  SolverOptions o;
  o.outer_tol = 1e-12;
  o.mo.rel_tol = 1e-14;
  o.mo.grad_tol = 1e-10;
  o.mo.max_iters = 5000;
  for (int t = 0; t < 4; ++t) {
    const auto d = dims_for(2, 2, t % 2 ? 4 : 1, -6.0);
    const auto in = make_instance(trial_seed(15, t), d);
    const auto r = alternate_mmse(in.ch.per_subcarrier, d, o);
    ASSERT_LT(r.trace.iterations(), o.outer_cap);
    const auto q = quantize_phases(r.beamformer, 16, in.ch.per_subcarrier, d.noise_var);
    EXPECT_NO_THROW(q.check_feasible());
    const double before = modified_mse(in.ch.per_subcarrier, r.beamformer, d.noise_var);
    const double after = modified_mse(in.ch.per_subcarrier, q, d.noise_var);
    EXPECT_LT(std::abs(after - before) / before, 1e-6);
  }
}

TEST(Quantize, CollapsedColumnsUseIndependentSubset) {
  // One bit maps the second column onto minus the first.
  const auto d = dims_for(2, 1, 1, 0.0);
  const auto in = make_instance(20, d);
  const auto& h = in.ch.per_subcarrier;
  Rng rng(21);
  HybridBeamformer bf;
  RVec ph = RVec::Random(16) * 1.2;
  bf.v_rf = CMat(16, 2);
  bf.w_rf = random_unit_modulus(rng, 16, 2);
  for (int i = 0; i < 16; ++i) {
    bf.v_rf(i, 0) = std::polar(1.0, ph(i));
    bf.v_rf(i, 1) = std::polar(1.0, ph(i) + kPi - 0.1);
  }
  bf.w_dig = {random_gaussian(rng, 2, 1)};
  bf.v_dig = {random_gaussian(rng, 2, 1)};
  bf.beta = {optimal_beta(bf.v_rf, bf.v_dig[0])};
  const auto q = quantize_phases(bf, 1, h, d.noise_var);
  EXPECT_LT((q.v_rf.col(1) + q.v_rf.col(0)).norm(), 1e-14);
  EXPECT_EQ(q.v_dig[0](1, 0), cd(0.0, 0.0));
  EXPECT_NO_THROW(q.check_feasible());
  // Same link as optimizing the digital part over the first column alone.
  const CMat w = q.w_rf * bf.w_dig[0];
  const CMat v1 = q.v_rf.col(0);
  const CMat vu = optimal_digital_precoder(v1, h[0].adjoint() * w, d.noise_var,
                                           combiner_energy(w));
  const CMat v = v1 * vu * optimal_beta(v1, vu);
  EXPECT_LT((q.precoder(0) - v).norm(), 1e-12);
}

TEST(Quantize, SolveAppliesQuantization) {
  SolverOptions o;
  o.quant_bits = 2;
  const auto d = dims_for(2, 2, 1, 0.0);
  const auto in = make_instance(16, d);
  const auto sol = solve(in.ch.per_subcarrier, d, o);
  ASSERT_TRUE(sol.hybrid.has_value());
  const CMat& v = sol.hybrid->beamformer.v_rf;
  EXPECT_EQ(quantize_matrix(v, 2), v);
}

// ---------------------------------------------------------------------------
// Options and plumbing

TEST(SolverOptions, Validation) {
  SolverOptions o;
  o.algorithm = Algorithm::GEVD;
  EXPECT_THROW(o.validate(dims_for(2, 2, 4, 0.0)), InvalidArgument);
  EXPECT_NO_THROW(o.validate(dims_for(2, 2, 1, 0.0)));
  o.algorithm = Algorithm::EVD_UB;
  o.criterion = Criterion::WMMSE;
  EXPECT_THROW(o.validate(dims_for(2, 2, 1, 0.0)), InvalidArgument);
  o = {};
  o.outer_tol = 0.0;
  EXPECT_THROW(o.validate(dims_for(2, 2, 1, 0.0)), InvalidArgument);
  o = {};
  o.quant_bits = 0;
  EXPECT_THROW(o.validate(dims_for(2, 2, 1, 0.0)), InvalidArgument);
  o = {};
  EXPECT_THROW(o.validate(dims_for(1, 2, 1, 0.0)), InvalidArgument);
}

TEST(SolverOptions, AlternationRejectsInconsistentInput) {
  SolverOptions o;
  const auto d = dims_for(2, 2, 1, 0.0);
  const auto in = make_instance(17, d);
  o.algorithm = Algorithm::OMP;
  EXPECT_THROW(alternate_mmse(in.ch.per_subcarrier, d, o), InvalidArgument);
  o.algorithm = Algorithm::FULL_DIGITAL;
  EXPECT_THROW(alternate_mmse(in.ch.per_subcarrier, d, o), InvalidArgument);
  o.algorithm = Algorithm::MO;
  EXPECT_THROW(alternate_mmse(in.ch.per_subcarrier, dims_for(2, 2, 2, 0.0), o), DimensionError);
}

TEST(Names, ParseAndPrint) {
  for (auto a : {Algorithm::MO, Algorithm::GEVD, Algorithm::EVD_LB, Algorithm::EVD_UB,
                 Algorithm::OMP, Algorithm::FULL_DIGITAL}) {
    EXPECT_EQ(parse_algorithm(to_string(a)), a);
  }
  EXPECT_EQ(parse_algorithm("EVD_LB"), Algorithm::EVD_LB);
  EXPECT_EQ(parse_criterion("WMMSE"), Criterion::WMMSE);
  EXPECT_EQ(parse_init_mode("random"), InitMode::RANDOM);
  EXPECT_THROW(parse_algorithm("svd"), InvalidArgument);
  EXPECT_THROW(parse_criterion("zf"), InvalidArgument);
  EXPECT_THROW(parse_init_mode("zero"), InvalidArgument);
}

TEST(RunTrace, CsvFormat) {
  RunTrace t;
  t.records = {{1, 0.5, 2.0}, {2, 0.25, 2.5}};
  std::ostringstream os;
  write_run_trace_csv(os, t);
  EXPECT_EQ(os.str(), "outer_iter,objective,spectral_efficiency\n1,0.5,2\n2,0.25,2.5\n");
}

}  // namespace
