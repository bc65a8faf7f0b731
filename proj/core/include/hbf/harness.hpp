#pragma once

// Monte Carlo link simulation: QPSK over the hybrid (or full-digital) link,
// SNR sweeps, convergence and quantization studies.
//
// Seeding: trial t draws its channel from trial_seed(seed, t, 0), shared by
// every SNR point and algorithm; symbols and noise for SNR index i come from
// trial_seed(seed, t, 1 + i), shared by every algorithm. Algorithms are
// therefore compared on common random numbers.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "hbf/channel.hpp"
#include "hbf/driver.hpp"
#include "hbf/mmse.hpp"
#include "hbf/rng.hpp"

namespace hbf::harness {

/// Bits are read pairwise (b1, b0) -> ((1 - 2 b1) + j (1 - 2 b0)) / sqrt(2).
/// Throws InvalidArgument on an odd count or a value other than 0/1.
CVec qpsk_modulate(const std::vector<std::uint8_t>& bits);

/// Sign slicing; a zero component decodes to bit 0.
std::vector<std::uint8_t> qpsk_demodulate(const CVec& symbols);

struct LinkTrialResult {
  std::int64_t bit_errors = 0;
  std::int64_t bits = 0;
  double empirical_mse = 0.0;  // mean ||beta^{-1} y - s||^2 per subcarrier use
  double mse_stderr = 0.0;     // standard error of that mean

  double ber() const { return bits > 0 ? static_cast<double>(bit_errors) / bits : 0.0; }
};

/// n_symbols QPSK vectors per subcarrier through y = W^H H V s + W^H u with
/// u ~ CN(0, noise_var I). The filtered noise W^H u is drawn directly from
/// CN(0, noise_var W^H W).
LinkTrialResult run_link_trial(const std::vector<CMat>& h, const LinkBeamformer& bf,
                               double noise_var, int n_symbols, Rng& rng);

struct ChannelParams {
  int clusters = 5;
  int rays = 10;
  double spread_deg = 10.0;
};

struct ExperimentConfig {
  SystemDims dims;
  ChannelParams channel;
  std::vector<double> snr_db{-10.0};
  int trials = 10;
  std::vector<driver::Algorithm> algorithms{driver::Algorithm::MO};
  driver::Criterion criterion = driver::Criterion::MMSE;
  driver::InitMode init = driver::InitMode::VFD;
  double outer_tol = 1e-5;
  int outer_cap = 50;
  int power_iters = 10;
  int symbols = 1000;  // per subcarrier per trial
  std::uint64_t seed = 1;
  std::vector<int> quant_bits;  // quantization study; 0 means unquantized
  std::string output = "out";

  void validate() const;
  std::string scenario() const { return dims.narrowband() ? "narrowband" : "broadband"; }
};

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

enum class Metric { MSE, BER, SE };
std::string to_string(Metric m);
inline constexpr Metric kAllMetrics[] = {Metric::MSE, Metric::BER, Metric::SE};

struct SweepRecord {
  std::string algorithm;
  std::string criterion;
  std::string scenario;
  double snr_db = 0.0;
  Metric metric = Metric::MSE;
  double value = 0.0;
  double stderr_ = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
};

/// Per-trial values indexed [algorithm][snr][metric][trial] (metric order as
/// kAllMetrics; MSE is the analytic value). The simulated MSE and its standard
/// error sit alongside, indexed [algorithm][snr][trial].
struct SweepData {
  std::vector<std::vector<std::vector<std::vector<double>>>> values;
  std::vector<std::vector<std::vector<double>>> empirical_mse;  // [alg][snr][trial]
  std::vector<std::vector<std::vector<double>>> empirical_mse_stderr;
  std::vector<std::vector<std::vector<int>>> outer_iterations;  // 0 for FD
};

struct Summary {
  double mean = 0.0;
  double stderr_ = 0.0;  // sample standard deviation / sqrt(n)
};

/// Fixed-order pairwise summation, so the result does not depend on how the
/// values were produced.
double pairwise_sum(const std::vector<double>& v);
Summary summarize(const std::vector<double>& v);

/// Worker count from HBF_THREADS, else the hardware concurrency (at least 1).
int thread_count();

/// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

/// Solver options implied by the experiment for one trial.
driver::SolverOptions solver_options(const ExperimentConfig& cfg, driver::Algorithm a,
                                     std::uint64_t trial_seed_value);

channel::ChannelRealization trial_channel(const ExperimentConfig& cfg, int trial);

SweepData run_sweep_data(const ExperimentConfig& cfg, int threads = 0);
std::vector<SweepRecord> summarize_sweep(const ExperimentConfig& cfg, const SweepData& d);
std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg, int threads = 0);

/// algorithm,criterion,scenario,snr_db,metric,value,stderr,trials,seed
void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records);

struct ConvergenceCurve {
  std::string algorithm;
  driver::InitMode init = driver::InitMode::VFD;
  std::vector<double> mean;    // per outer iteration, traces padded with their last value
  std::vector<double> stderr_;
  std::vector<int> iterations;  // per trial, outer iterations until the stop rule
  /// per trial, first outer iteration whose objective is within 1% of that
  /// trial's final objective
  std::vector<int> within_one_percent;
  std::vector<std::vector<double>> traces;  // per trial
};

/// Uses the first SNR in the config.
std::vector<ConvergenceCurve> run_convergence_study(const ExperimentConfig& cfg,
                                                    int threads = 0);

/// algorithm,init,outer_iter,objective,stderr,trials
void write_convergence_csv(std::ostream& os, const ExperimentConfig& cfg,
                           const std::vector<ConvergenceCurve>& curves);

struct QuantRecord {
  std::string algorithm;
  double snr_db = 0.0;
  int bits = 0;  // 0 = unquantized
  Metric metric = Metric::BER;
  double value = 0.0;
  double stderr_ = 0.0;
  int trials = 0;
};

/// Per-trial values [algorithm][snr][bits index][metric][trial].
struct QuantData {
  std::vector<std::vector<std::vector<std::vector<std::vector<double>>>>> values;
};

QuantData run_quantization_data(const ExperimentConfig& cfg, int threads = 0);
std::vector<QuantRecord> run_quantization_study(const ExperimentConfig& cfg,
                                                int threads = 0);

/// algorithm,criterion,scenario,snr_db,quant_bits,metric,value,stderr,trials,seed
void write_quantization_csv(std::ostream& os, const ExperimentConfig& cfg,
                            const std::vector<QuantRecord>& records);

}  // namespace hbf::harness
