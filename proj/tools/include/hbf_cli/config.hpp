#pragma once

// Experiment config files: `[section]` headers, `key = value` lines, `#`
// comments. Lists are comma separated; an SNR list may also be written as
// start:step:stop (inclusive).
//
//   [system]      n_tx n_rx n_rf n_streams n_subcarriers
//   [channel]     clusters rays angular_spread_deg
//   [experiment]  algorithm criterion init snr_db trials symbols seed
//                 quant_bits output
//   [solver]      outer_tol outer_cap power_iters

#include <stdexcept>
#include <string>
#include <vector>

#include "hbf/harness.hpp"

namespace hbf::cli {

struct ConfigIssue {
  int line = 0;  // 0 when the issue is not tied to one line
  std::string message;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

/// Parses and validates; throws ConfigError listing every problem found.
harness::ExperimentConfig parse_config(const std::string& text);

harness::ExperimentConfig load_config(const std::string& path);

/// Text that parse_config maps back to an equal config.
std::string serialize_config(const harness::ExperimentConfig& cfg);

/// Resolved config as pretty-printed JSON.
std::string config_json(const harness::ExperimentConfig& cfg);

/// Parses "a,b,c" or "start:step:stop".
std::vector<double> parse_snr_list(const std::string& text);

}  // namespace hbf::cli
