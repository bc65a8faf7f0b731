#include "hbf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include <Eigen/Eigenvalues>

#include "hbf/linalg.hpp"
#include "hbf/matrix_io.hpp"

namespace hbf::harness {

using driver::Algorithm;

CVec qpsk_modulate(const std::vector<std::uint8_t>& bits) {
  if (bits.size() % 2 != 0) throw InvalidArgument("qpsk_modulate: odd bit count");
  const double a = 1.0 / std::sqrt(2.0);
  CVec out(static_cast<Eigen::Index>(bits.size() / 2));
  for (std::size_t i = 0; i < bits.size(); i += 2) {
    if (bits[i] > 1 || bits[i + 1] > 1) throw InvalidArgument("qpsk_modulate: bit not 0/1");
    out(static_cast<Eigen::Index>(i / 2)) =
        cd(a * (1 - 2 * bits[i]), a * (1 - 2 * bits[i + 1]));
  }
  return out;
}

std::vector<std::uint8_t> qpsk_demodulate(const CVec& symbols) {
  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(2 * symbols.size()));
  for (Eigen::Index i = 0; i < symbols.size(); ++i) {
    out.push_back(symbols(i).real() < 0.0 ? 1 : 0);
    out.push_back(symbols(i).imag() < 0.0 ? 1 : 0);
  }
  return out;
}

LinkTrialResult run_link_trial(const std::vector<CMat>& h, const LinkBeamformer& bf,
                               double noise_var, int n_symbols, Rng& rng) {
  if (h.size() != bf.precoders.size()) {
    throw DimensionError("run_link_trial: subcarrier count mismatch");
  }
  if (n_symbols < 1) throw InvalidArgument("run_link_trial: n_symbols must be positive");
  LinkTrialResult res;
  const double a = 1.0 / std::sqrt(2.0);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> bit(0, 1);
  double sum = 0.0;
  double sum_sq = 0.0;
  std::int64_t count = 0;

  for (std::size_t k = 0; k < h.size(); ++k) {
    const CMat& w = bf.combiners[k];
    const CMat e = (w.adjoint() * h[k] * bf.precoders[k]) / bf.beta[k];
    const auto ns = e.rows();
    // Square root of the filtered noise covariance noise_var W^H W / beta^2.
    Eigen::SelfAdjointEigenSolver<CMat> es(linalg::hermitian_part(w.adjoint() * w));
    const RVec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const CMat root = (std::sqrt(noise_var) / bf.beta[k]) * es.eigenvectors() *
                      ev.cast<cd>().asDiagonal();

    CVec s(ns), z(ns), est(ns);
    std::vector<int> b(static_cast<std::size_t>(2 * ns));
    for (int n = 0; n < n_symbols; ++n) {
      for (Eigen::Index i = 0; i < ns; ++i) {
        const int b1 = bit(rng);
        const int b0 = bit(rng);
        b[static_cast<std::size_t>(2 * i)] = b1;
        b[static_cast<std::size_t>(2 * i + 1)] = b0;
        s(i) = cd(a * (1 - 2 * b1), a * (1 - 2 * b0));
      }
      for (Eigen::Index i = 0; i < ns; ++i) {
        const double re = unit(rng);
        const double im = unit(rng);
        z(i) = cd(re, im) * a;
      }
      est.noalias() = e * s;
      est.noalias() += root * z;
      double err = 0.0;
      for (Eigen::Index i = 0; i < ns; ++i) {
        err += std::norm(est(i) - s(i));
        const int d1 = est(i).real() < 0.0 ? 1 : 0;
        const int d0 = est(i).imag() < 0.0 ? 1 : 0;
        res.bit_errors += (d1 != b[static_cast<std::size_t>(2 * i)]) +
                          (d0 != b[static_cast<std::size_t>(2 * i + 1)]);
      }
      res.bits += 2 * ns;
      sum += err;
      sum_sq += err * err;
      ++count;
    }
  }
  const double mean = sum / static_cast<double>(count);
  const double var =
      count > 1 ? std::max(0.0, (sum_sq - count * mean * mean) / (count - 1)) : 0.0;
  res.empirical_mse = mean;
  res.mse_stderr = std::sqrt(var / static_cast<double>(count));
  return res;
}

// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
  dims.validate();
  if (trials < 1) throw InvalidArgument("trials must be at least 1");
  if (snr_db.empty()) throw InvalidArgument("snr list is empty");
  if (algorithms.empty()) throw InvalidArgument("algorithm list is empty");
  if (symbols < 1) throw InvalidArgument("symbols must be positive");
  if (channel.clusters < 1 || channel.rays < 1) {
    throw InvalidArgument("clusters and rays must be positive");
  }
  if (channel.spread_deg < 0.0) throw InvalidArgument("angular spread must be >= 0");
  for (int q : quant_bits) {
    if (q < 0 || q > 30) throw InvalidArgument("quant_bits entries must lie in [0, 30]");
  }
  for (auto a : algorithms) {
    driver::SolverOptions o = solver_options(*this, a, 0);
    o.validate(dims);
  }
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  const auto dims_eq = a.dims.n_tx == b.dims.n_tx && a.dims.n_rx == b.dims.n_rx &&
                       a.dims.n_rf == b.dims.n_rf && a.dims.n_streams == b.dims.n_streams &&
                       a.dims.n_subcarriers == b.dims.n_subcarriers &&
                       a.dims.noise_var == b.dims.noise_var;
  return dims_eq && a.channel.clusters == b.channel.clusters &&
         a.channel.rays == b.channel.rays && a.channel.spread_deg == b.channel.spread_deg &&
         a.snr_db == b.snr_db && a.trials == b.trials && a.algorithms == b.algorithms &&
         a.criterion == b.criterion && a.init == b.init && a.outer_tol == b.outer_tol &&
         a.outer_cap == b.outer_cap && a.power_iters == b.power_iters &&
         a.symbols == b.symbols && a.seed == b.seed && a.quant_bits == b.quant_bits &&
         a.output == b.output;
}

std::string to_string(Metric m) {
  switch (m) {
    case Metric::MSE: return "mse";
    case Metric::BER: return "ber";
    case Metric::SE: return "se";
  }
  return "?";
}

double pairwise_sum(const std::vector<double>& v) {
  const std::function<double(std::size_t, std::size_t)> rec = [&](std::size_t lo,
                                                                    std::size_t hi) {
    if (hi - lo <= 8) {
      double acc = 0.0;
      for (std::size_t i = lo; i < hi; ++i) acc += v[i];
      return acc;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return rec(lo, mid) + rec(mid, hi);
  };
  return rec(0, v.size());
}

Summary summarize(const std::vector<double>& v) {
  Summary s;
  if (v.empty()) return s;
  const double n = static_cast<double>(v.size());
  s.mean = pairwise_sum(v) / n;
  if (v.size() > 1) {
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) dev[i] = (v[i] - s.mean) * (v[i] - s.mean);
    s.stderr_ = std::sqrt(pairwise_sum(dev) / (n - 1.0) / n);
  }
  return s;
}

int thread_count() {
  if (const char* env = std::getenv("HBF_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0) threads = thread_count();
  threads = std::min(threads, std::max(count, 1));
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

driver::SolverOptions solver_options(const ExperimentConfig& cfg, Algorithm a,
                                     std::uint64_t trial_seed_value) {
  driver::SolverOptions o;
  o.algorithm = a;
  o.criterion = cfg.criterion;
  o.init = cfg.init;
  o.outer_tol = cfg.outer_tol;
  o.outer_cap = cfg.outer_cap;
  o.power_iters = cfg.power_iters;
  o.seed = trial_seed_value;
  return o;
}

channel::ChannelRealization trial_channel(const ExperimentConfig& cfg, int trial) {
  return channel::random_channel(trial_seed(cfg.seed, static_cast<std::uint64_t>(trial), 0),
                                 cfg.dims.n_tx, cfg.dims.n_rx, cfg.dims.n_subcarriers,
                                 cfg.channel.clusters, cfg.channel.rays,
                                 cfg.channel.spread_deg);
}

namespace {

double noise_var_from_snr(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

std::uint64_t link_seed(const ExperimentConfig& cfg, int trial, std::size_t snr_index) {
  return trial_seed(cfg.seed, static_cast<std::uint64_t>(trial), 1 + snr_index);
}

std::uint64_t solver_seed(const ExperimentConfig& cfg, int trial) {
  return trial_seed(cfg.seed, static_cast<std::uint64_t>(trial), 0x501);
}

struct TrialMetrics {
  double mse = 0.0;
  double ber = 0.0;
  double se = 0.0;
  double empirical_mse = 0.0;
  double empirical_stderr = 0.0;
};

TrialMetrics evaluate(const std::vector<CMat>& h, const LinkBeamformer& link,
                      double noise_var, int symbols, std::uint64_t seed) {
  TrialMetrics m;
  const double n = static_cast<double>(h.size());
  m.mse = modified_mse(h, link, noise_var) / n;
  m.se = spectral_efficiency_subspace(h, link, noise_var);
  Rng rng(seed);
  const LinkTrialResult lt = run_link_trial(h, link, noise_var, symbols, rng);
  m.ber = lt.ber();
  m.empirical_mse = lt.empirical_mse;
  m.empirical_stderr = lt.mse_stderr;
  return m;
}

template <typename T>
std::vector<T> filled(std::size_t n, const T& v) {
  return std::vector<T>(n, v);
}

}  // namespace

SweepData run_sweep_data(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  const std::size_t na = cfg.algorithms.size();
  const std::size_t ns = cfg.snr_db.size();
  const auto nt = static_cast<std::size_t>(cfg.trials);
  SweepData d;
  d.values = filled(na, filled(ns, filled(std::size(kAllMetrics), filled(nt, 0.0))));
  d.empirical_mse = filled(na, filled(ns, filled(nt, 0.0)));
  d.empirical_mse_stderr = d.empirical_mse;
  d.outer_iterations = filled(na, filled(ns, filled(nt, 0)));

  const int items = static_cast<int>(nt * ns);
  parallel_for(items, threads, [&](int item) {
    const int trial = item / static_cast<int>(ns);
    const auto si = static_cast<std::size_t>(item % static_cast<int>(ns));
    const auto t = static_cast<std::size_t>(trial);
    const channel::ChannelRealization ch = trial_channel(cfg, trial);
    const driver::Dictionaries dicts = driver::make_dictionaries(ch);
    SystemDims dims = cfg.dims;
    dims.noise_var = noise_var_from_snr(cfg.snr_db[si]);
    for (std::size_t a = 0; a < na; ++a) {
      const driver::SolverOptions o =
          solver_options(cfg, cfg.algorithms[a], solver_seed(cfg, trial));
      const driver::LinkSolution sol = driver::solve(ch.per_subcarrier, dims, o, &dicts);
      const TrialMetrics m = evaluate(ch.per_subcarrier, sol.link, dims.noise_var,
                                      cfg.symbols, link_seed(cfg, trial, si));
      d.values[a][si][0][t] = m.mse;
      d.values[a][si][1][t] = m.ber;
      d.values[a][si][2][t] = m.se;
      d.empirical_mse[a][si][t] = m.empirical_mse;
      d.empirical_mse_stderr[a][si][t] = m.empirical_stderr;
      d.outer_iterations[a][si][t] = sol.hybrid ? sol.hybrid->trace.iterations() : 0;
    }
  });
  return d;
}

std::vector<SweepRecord> summarize_sweep(const ExperimentConfig& cfg, const SweepData& d) {
  std::vector<SweepRecord> out;
  for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
    for (std::size_t si = 0; si < cfg.snr_db.size(); ++si) {
      for (std::size_t mi = 0; mi < std::size(kAllMetrics); ++mi) {
        const Summary s = summarize(d.values[a][si][mi]);
        SweepRecord r;
        r.algorithm = driver::to_string(cfg.algorithms[a]);
        r.criterion = driver::to_string(cfg.criterion);
        r.scenario = cfg.scenario();
        r.snr_db = cfg.snr_db[si];
        r.metric = kAllMetrics[mi];
        r.value = s.mean;
        r.stderr_ = s.stderr_;
        r.trials = cfg.trials;
        r.seed = cfg.seed;
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg, int threads) {
  return summarize_sweep(cfg, run_sweep_data(cfg, threads));
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  os << "algorithm,criterion,scenario,snr_db,metric,value,stderr,trials,seed\n";
  for (const auto& r : records) {
    os << r.algorithm << ',' << r.criterion << ',' << r.scenario << ','
       << io::format_double(r.snr_db) << ',' << to_string(r.metric) << ','
       << io::format_double(r.value) << ',' << io::format_double(r.stderr_) << ','
       << r.trials << ',' << r.seed << '\n';
  }
}

// ---------------------------------------------------------------------------

std::vector<ConvergenceCurve> run_convergence_study(const ExperimentConfig& cfg,
                                                    int threads) {
  cfg.validate();
  const driver::InitMode modes[] = {driver::InitMode::VFD, driver::InitMode::RANDOM};
  std::vector<Algorithm> algs;
  for (auto a : cfg.algorithms) {
    if (a != Algorithm::FULL_DIGITAL) algs.push_back(a);
  }
  const auto nt = static_cast<std::size_t>(cfg.trials);
  // [alg][mode][trial]
  std::vector<std::vector<std::vector<std::vector<double>>>> traces(
      algs.size(), filled(std::size(modes), filled(nt, std::vector<double>{})));

  parallel_for(cfg.trials, threads, [&](int trial) {
    const channel::ChannelRealization ch = trial_channel(cfg, trial);
    const driver::Dictionaries dicts = driver::make_dictionaries(ch);
    SystemDims dims = cfg.dims;
    dims.noise_var = noise_var_from_snr(cfg.snr_db.front());
    for (std::size_t a = 0; a < algs.size(); ++a) {
      for (std::size_t m = 0; m < std::size(modes); ++m) {
        driver::SolverOptions o = solver_options(cfg, algs[a], solver_seed(cfg, trial));
        o.init = modes[m];
        const driver::SolveResult r =
            cfg.criterion == driver::Criterion::MMSE
                ? driver::alternate_mmse(ch.per_subcarrier, dims, o, &dicts)
                : driver::alternate_wmmse(ch.per_subcarrier, dims, o, &dicts);
        std::vector<double> tr;
        for (const auto& rec : r.trace.records) tr.push_back(rec.objective);
        traces[a][m][static_cast<std::size_t>(trial)] = std::move(tr);
      }
    }
  });

  std::vector<ConvergenceCurve> out;
  for (std::size_t a = 0; a < algs.size(); ++a) {
    for (std::size_t m = 0; m < std::size(modes); ++m) {
      ConvergenceCurve c;
      c.algorithm = driver::to_string(algs[a]);
      c.init = modes[m];
      c.traces = traces[a][m];
      std::size_t len = 0;
      for (const auto& tr : c.traces) len = std::max(len, tr.size());
      for (const auto& tr : c.traces) {
        c.iterations.push_back(static_cast<int>(tr.size()));
        const double fin = tr.back();
        int hit = static_cast<int>(tr.size());
        for (std::size_t i = 0; i < tr.size(); ++i) {
          if (std::abs(tr[i] - fin) <= 0.01 * std::abs(fin)) {
            hit = static_cast<int>(i) + 1;
            break;
          }
        }
        c.within_one_percent.push_back(hit);
      }
      for (std::size_t i = 0; i < len; ++i) {
        std::vector<double> col;
        for (const auto& tr : c.traces) col.push_back(i < tr.size() ? tr[i] : tr.back());
        const Summary s = summarize(col);
        c.mean.push_back(s.mean);
        c.stderr_.push_back(s.stderr_);
      }
      out.push_back(std::move(c));
    }
  }
  return out;
}

void write_convergence_csv(std::ostream& os, const ExperimentConfig& cfg,
                           const std::vector<ConvergenceCurve>& curves) {
  os << "algorithm,init,outer_iter,objective,stderr,trials\n";
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.mean.size(); ++i) {
      os << c.algorithm << ',' << driver::to_string(c.init) << ',' << i + 1 << ','
         << io::format_double(c.mean[i]) << ',' << io::format_double(c.stderr_[i]) << ','
         << cfg.trials << '\n';
    }
  }
}

// ---------------------------------------------------------------------------

QuantData run_quantization_data(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  if (cfg.quant_bits.empty()) throw InvalidArgument("quantization study needs quant_bits");
  const std::size_t na = cfg.algorithms.size();
  const std::size_t ns = cfg.snr_db.size();
  const std::size_t nq = cfg.quant_bits.size();
  const auto nt = static_cast<std::size_t>(cfg.trials);
  QuantData d;
  d.values = filled(na, filled(ns, filled(nq, filled(std::size(kAllMetrics),
                                                     filled(nt, 0.0)))));
  const int items = static_cast<int>(nt * ns);
  parallel_for(items, threads, [&](int item) {
    const int trial = item / static_cast<int>(ns);
    const auto si = static_cast<std::size_t>(item % static_cast<int>(ns));
    const auto t = static_cast<std::size_t>(trial);
    const channel::ChannelRealization ch = trial_channel(cfg, trial);
    const driver::Dictionaries dicts = driver::make_dictionaries(ch);
    SystemDims dims = cfg.dims;
    dims.noise_var = noise_var_from_snr(cfg.snr_db[si]);
    for (std::size_t a = 0; a < na; ++a) {
      const driver::SolverOptions o =
          solver_options(cfg, cfg.algorithms[a], solver_seed(cfg, trial));
      const driver::LinkSolution sol = driver::solve(ch.per_subcarrier, dims, o, &dicts);
      for (std::size_t qi = 0; qi < nq; ++qi) {
        LinkBeamformer link = sol.link;
        const int bits = cfg.quant_bits[qi];
        if (bits > 0 && sol.hybrid) {
          link = to_link(driver::quantize_phases(sol.hybrid->beamformer, bits,
                                                 ch.per_subcarrier, dims.noise_var));
        }
        const TrialMetrics m = evaluate(ch.per_subcarrier, link, dims.noise_var,
                                        cfg.symbols, link_seed(cfg, trial, si));
        d.values[a][si][qi][0][t] = m.mse;
        d.values[a][si][qi][1][t] = m.ber;
        d.values[a][si][qi][2][t] = m.se;
      }
    }
  });
  return d;
}

std::vector<QuantRecord> run_quantization_study(const ExperimentConfig& cfg, int threads) {
  const QuantData d = run_quantization_data(cfg, threads);
  std::vector<QuantRecord> out;
  for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
    for (std::size_t si = 0; si < cfg.snr_db.size(); ++si) {
      for (std::size_t qi = 0; qi < cfg.quant_bits.size(); ++qi) {
        for (std::size_t mi = 0; mi < std::size(kAllMetrics); ++mi) {
          const Summary s = summarize(d.values[a][si][qi][mi]);
          out.push_back({driver::to_string(cfg.algorithms[a]), cfg.snr_db[si],
                         cfg.quant_bits[qi], kAllMetrics[mi], s.mean, s.stderr_,
                         cfg.trials});
        }
      }
    }
  }
  return out;
}

void write_quantization_csv(std::ostream& os, const ExperimentConfig& cfg,
                            const std::vector<QuantRecord>& records) {
  os << "algorithm,criterion,scenario,snr_db,quant_bits,metric,value,stderr,trials,seed\n";
  for (const auto& r : records) {
    os << r.algorithm << ',' << driver::to_string(cfg.criterion) << ',' << cfg.scenario()
       << ',' << io::format_double(r.snr_db) << ',' << r.bits << ',' << to_string(r.metric)
       << ',' << io::format_double(r.value) << ',' << io::format_double(r.stderr_) << ','
       << r.trials << ',' << cfg.seed << '\n';
  }
}

}  // namespace hbf::harness
