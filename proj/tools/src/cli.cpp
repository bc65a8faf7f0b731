#include "hbf_cli/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "hbf/driver.hpp"
#include "hbf/harness.hpp"
#include "hbf/manifold.hpp"
#include "hbf/matrix_io.hpp"
#include "hbf/plot.hpp"
#include "hbf_cli/config.hpp"

namespace hbf::cli {
namespace {

namespace fs = std::filesystem;

struct Flags {
  std::string config;
  std::string algo;
  std::string criterion;
  std::string scenario;
  std::string snr;
  std::string quant_bits;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool paper_scale = false;
  bool trace = false;
  bool plot = false;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("config", f.config, "Experiment config file (defaults are used if omitted)");
  sub->add_option("--algo", f.algo, "Comma list: mo, gevd, evd-lb, evd-ub, omp, fd");
  sub->add_option("--criterion", f.criterion, "mmse or wmmse");
  sub->add_option("--scenario", f.scenario, "narrowband or broadband");
  sub->add_option("--snr", f.snr, "SNR list in dB: a,b,c or start:step:stop");
  sub->add_option("--trials", f.trials, "Monte Carlo trials");
  sub->add_option("--seed", f.seed, "Master seed");
  sub->add_option("--quant-bits", f.quant_bits, "Comma list of phase bits (0 = unquantized)");
  sub->add_option("--out", f.out, "Output directory");
  sub->add_flag("--paper-scale", f.paper_scale, "64x64 arrays, 64 subcarriers, 1000 trials");
  sub->add_flag("--trace", f.trace, "Write solver iteration CSVs");
  sub->add_flag("--plot", f.plot, "Write SVG charts next to the sweep CSV");
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void apply_overrides(harness::ExperimentConfig& cfg, const Flags& f, std::ostream& err) {
  if (!f.algo.empty()) {
    cfg.algorithms.clear();
    for (const auto& a : split_commas(f.algo)) cfg.algorithms.push_back(driver::parse_algorithm(a));
  }
  if (!f.criterion.empty()) cfg.criterion = driver::parse_criterion(f.criterion);
  if (!f.snr.empty()) cfg.snr_db = parse_snr_list(f.snr);
  if (f.trials) cfg.trials = *f.trials;
  if (f.seed) cfg.seed = *f.seed;
  if (!f.quant_bits.empty()) {
    cfg.quant_bits.clear();
    for (const auto& q : split_commas(f.quant_bits)) cfg.quant_bits.push_back(std::stoi(q));
  }
  if (!f.out.empty()) cfg.output = f.out;
  if (!f.scenario.empty()) {
    if (f.scenario == "narrowband") {
      cfg.dims.n_subcarriers = 1;
    } else if (f.scenario == "broadband") {
      if (cfg.dims.n_subcarriers == 1) cfg.dims.n_subcarriers = 16;
    } else {
      throw InvalidArgument("--scenario must be narrowband or broadband");
    }
  }
  if (f.paper_scale) {
    cfg.dims.n_tx = 64;
    cfg.dims.n_rx = 64;
    if (cfg.dims.n_subcarriers > 1) cfg.dims.n_subcarriers = 64;
    if (!f.trials) cfg.trials = 1000;
    err << "warning: --paper-scale uses 64x64 arrays";
    if (cfg.dims.n_subcarriers > 1) err << ", 64 subcarriers";
    err << " and " << cfg.trials
        << " trials; expect hours to days of single-core runtime (set HBF_THREADS)\n";
  }
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  if (!os) throw Error("cannot open '" + p.string() + "' for writing");
  os << text;
  if (!os) throw Error("write failed for '" + p.string() + "'");
}

template <typename Fn>
void write_file(const fs::path& p, Fn&& fn) {
  std::ofstream os(p);
  if (!os) throw Error("cannot open '" + p.string() + "' for writing");
  fn(os);
  if (!os) throw Error("write failed for '" + p.string() + "'");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_trial0_traces(const harness::ExperimentConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  const auto ch = harness::trial_channel(cfg, 0);
  const auto dicts = driver::make_dictionaries(ch);
  SystemDims dims = cfg.dims;
  dims.noise_var = std::pow(10.0, -cfg.snr_db.front() / 10.0);
  for (auto a : cfg.algorithms) {
    if (a == driver::Algorithm::FULL_DIGITAL) continue;
    auto o = harness::solver_options(cfg, a, trial_seed(cfg.seed, 0, 0x501));
    const auto sol = driver::solve(ch.per_subcarrier, dims, o, &dicts);
    write_file(dir / (driver::to_string(a) + "_trial0.csv"),
               [&](std::ostream& os) { driver::write_run_trace_csv(os, sol.hybrid->trace); });
  }
}

int run_sweep(const harness::ExperimentConfig& cfg, const Flags& f, std::ostream& err) {
  const fs::path dir(cfg.output);
  const auto t0 = std::chrono::steady_clock::now();
  const auto records = harness::run_sweep(cfg);
  write_file(dir / "sweep.csv", [&](std::ostream& os) { harness::write_sweep_csv(os, records); });
  if (f.plot) plot::write_sweep_plots((dir / "sweep").string(), records);
  if (f.trace) write_trial0_traces(cfg, dir / "traces");
  err << "sweep: " << records.size() << " records in " << seconds_since(t0) << " s -> "
      << (dir / "sweep.csv").string() << "\n";
  return kOk;
}

int run_converge(const harness::ExperimentConfig& cfg, const Flags& f, std::ostream& err) {
  const fs::path dir(cfg.output);
  const auto t0 = std::chrono::steady_clock::now();
  const auto curves = harness::run_convergence_study(cfg);
  write_file(dir / "convergence.csv",
             [&](std::ostream& os) { harness::write_convergence_csv(os, cfg, curves); });
  if (f.trace) write_trial0_traces(cfg, dir / "traces");
  for (const auto& c : curves) {
    double mean_it = 0.0;
    for (int it : c.iterations) mean_it += it;
    err << "converge: " << c.algorithm << "/" << driver::to_string(c.init)
        << " mean outer iterations " << mean_it / static_cast<double>(c.iterations.size())
        << "\n";
  }
  err << "converge: done in " << seconds_since(t0) << " s\n";
  return kOk;
}

int run_quantize(harness::ExperimentConfig cfg, const Flags& f, std::ostream& err) {
  if (cfg.quant_bits.empty()) cfg.quant_bits = {0, 1, 2, 3, 4, 5, 6, 8};
  const fs::path dir(cfg.output);
  const auto t0 = std::chrono::steady_clock::now();
  const auto records = harness::run_quantization_study(cfg);
  write_file(dir / "quantization.csv",
             [&](std::ostream& os) { harness::write_quantization_csv(os, cfg, records); });
  if (f.trace) write_trial0_traces(cfg, dir / "traces");
  err << "quantize: " << records.size() << " records in " << seconds_since(t0) << " s\n";
  return kOk;
}

int run_solve_one(const harness::ExperimentConfig& cfg, const Flags& f, std::ostream& out,
                  std::ostream& err) {
  const fs::path dir(cfg.output);
  const auto ch = harness::trial_channel(cfg, 0);
  const auto dicts = driver::make_dictionaries(ch);
  SystemDims dims = cfg.dims;
  dims.noise_var = std::pow(10.0, -cfg.snr_db.front() / 10.0);
  const auto alg = cfg.algorithms.front();
  auto o = harness::solver_options(cfg, alg, trial_seed(cfg.seed, 0, 0x501));
  driver::RunControl ctl;
  ctl.keep_inner_traces = f.trace;
  const auto sol = driver::solve(ch.per_subcarrier, dims, o, &dicts, ctl);

  io::write_channel_file((dir / "channel.csv").string(), ch.per_subcarrier);
  write_file(dir / "beamformer.csv", [&](std::ostream& os) {
    if (sol.hybrid) {
      const auto& bf = sol.hybrid->beamformer;
      io::write_block(os, "v_rf", {bf.v_rf});
      io::write_block(os, "w_rf", {bf.w_rf});
      io::write_block(os, "v_dig", bf.v_dig);
      io::write_block(os, "w_dig", bf.w_dig);
      std::vector<CMat> beta;
      for (double b : bf.beta) beta.push_back(CMat::Constant(1, 1, cd(b, 0.0)));
      io::write_block(os, "beta", beta);
    } else {
      io::write_block(os, "v", sol.link.precoders);
      io::write_block(os, "w", sol.link.combiners);
    }
  });
  if (sol.hybrid) {
    write_file(dir / "trace.csv",
               [&](std::ostream& os) { driver::write_run_trace_csv(os, sol.hybrid->trace); });
    if (f.trace) {
      const auto& inner = sol.hybrid->trace.inner;
      for (std::size_t i = 0; i < inner.size(); ++i) {
        write_file(dir / ("inner_" + std::to_string(i) + ".csv"),
                   [&](std::ostream& os) { manifold::write_trace_csv(os, inner[i]); });
      }
    }
  }
  const double mse = modified_mse(ch.per_subcarrier, sol.link, dims.noise_var);
  const double se = spectral_efficiency_subspace(ch.per_subcarrier, sol.link, dims.noise_var);
  out << "algorithm=" << driver::to_string(alg) << " criterion=" << driver::to_string(cfg.criterion)
      << " snr_db=" << cfg.snr_db.front() << " mse=" << io::format_double(mse)
      << " se=" << io::format_double(se) << "\n";
  err << "solve-one: wrote " << (dir / "beamformer.csv").string() << "\n";
  return kOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hybrid beamforming solvers and Monte Carlo experiments", "hbf"};
  app.require_subcommand(1);
  Flags f;
  const char* names[] = {"sweep", "converge", "quantize", "solve-one"};
  const char* help[] = {"Metric sweep over SNR", "Outer-iteration convergence study",
                        "Phase quantization study", "Solve one channel and dump beamformers"};
  std::vector<CLI::App*> subs;
  for (int i = 0; i < 4; ++i) {
    subs.push_back(app.add_subcommand(names[i], help[i]));
    add_common(subs.back(), f);
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  std::string which;
  for (int i = 0; i < 4; ++i) {
    if (subs[static_cast<std::size_t>(i)]->parsed()) which = names[i];
  }

  harness::ExperimentConfig cfg;
  try {
    if (!f.config.empty()) cfg = load_config(f.config);
    apply_overrides(cfg, f, err);
    cfg.validate();
  } catch (const ConfigError& e) {
    err << "config error:\n" << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    fs::create_directories(cfg.output);
    write_text(fs::path(cfg.output) / "config.json", config_json(cfg));
    if (which == "sweep") return run_sweep(cfg, f, err);
    if (which == "converge") return run_converge(cfg, f, err);
    if (which == "quantize") return run_quantize(cfg, f, err);
    return run_solve_one(cfg, f, out, err);
  } catch (const std::exception& e) {
    err << "solver failure: " << e.what() << "\n";
    return kSolverError;
  }
}

}  // namespace hbf::cli
