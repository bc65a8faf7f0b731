#include "hbf_cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"

#include "hbf/matrix_io.hpp"

namespace hbf::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::string join_messages(const std::vector<ConfigIssue>& issues) {
  std::string msg;
  for (const auto& i : issues) {
    if (!msg.empty()) msg += '\n';
    msg += i.line > 0 ? "line " + std::to_string(i.line) + ": " + i.message : i.message;
  }
  return msg;
}

template <typename T>
T parse_number(const std::string& s) {
  T v{};
  const char* b = s.data();
  const char* e = s.data() + s.size();
  const auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e) throw std::invalid_argument("not a number");
  return v;
}

double parse_real(const std::string& s) {
  const double v = parse_number<double>(s);
  if (!std::isfinite(v)) throw std::invalid_argument("not finite");
  return v;
}

template <typename T>
std::string join(const std::vector<T>& v, const std::function<std::string(const T&)>& f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    out += f(v[i]);
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : std::runtime_error(join_messages(issues)), issues_(std::move(issues)) {}

std::vector<double> parse_snr_list(const std::string& text) {
  const std::string t = trim(text);
  if (t.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(t);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(trim(p));
    if (parts.size() != 3) throw std::invalid_argument("range must be start:step:stop");
    const double a = parse_real(parts[0]);
    const double step = parse_real(parts[1]);
    const double b = parse_real(parts[2]);
    if (!(step > 0.0) || b < a) throw std::invalid_argument("range needs step > 0, stop >= start");
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(a + step * static_cast<double>(i));
    return out;
  }
  std::vector<double> out;
  for (const auto& s : split_list(t)) out.push_back(parse_real(s));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

harness::ExperimentConfig parse_config(const std::string& text) {
  harness::ExperimentConfig cfg;
  std::vector<ConfigIssue> issues;
  std::map<std::string, int> seen;  // "section.key" -> line

  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"system.n_tx", [&](const std::string& v) { cfg.dims.n_tx = parse_number<int>(v); }},
      {"system.n_rx", [&](const std::string& v) { cfg.dims.n_rx = parse_number<int>(v); }},
      {"system.n_rf", [&](const std::string& v) { cfg.dims.n_rf = parse_number<int>(v); }},
      {"system.n_streams",
       [&](const std::string& v) { cfg.dims.n_streams = parse_number<int>(v); }},
      {"system.n_subcarriers",
       [&](const std::string& v) { cfg.dims.n_subcarriers = parse_number<int>(v); }},
      {"channel.clusters",
       [&](const std::string& v) { cfg.channel.clusters = parse_number<int>(v); }},
      {"channel.rays", [&](const std::string& v) { cfg.channel.rays = parse_number<int>(v); }},
      {"channel.angular_spread_deg",
       [&](const std::string& v) { cfg.channel.spread_deg = parse_real(v); }},
      {"experiment.algorithm",
       [&](const std::string& v) {
         cfg.algorithms.clear();
         for (const auto& a : split_list(v)) cfg.algorithms.push_back(driver::parse_algorithm(a));
       }},
      {"experiment.criterion",
       [&](const std::string& v) { cfg.criterion = driver::parse_criterion(v); }},
      {"experiment.init", [&](const std::string& v) { cfg.init = driver::parse_init_mode(v); }},
      {"experiment.snr_db", [&](const std::string& v) { cfg.snr_db = parse_snr_list(v); }},
      {"experiment.trials", [&](const std::string& v) { cfg.trials = parse_number<int>(v); }},
      {"experiment.symbols", [&](const std::string& v) { cfg.symbols = parse_number<int>(v); }},
      {"experiment.seed",
       [&](const std::string& v) { cfg.seed = parse_number<std::uint64_t>(v); }},
      {"experiment.quant_bits",
       [&](const std::string& v) {
         cfg.quant_bits.clear();
         for (const auto& q : split_list(v)) cfg.quant_bits.push_back(parse_number<int>(q));
       }},
      {"experiment.output", [&](const std::string& v) { cfg.output = v; }},
      {"solver.outer_tol", [&](const std::string& v) { cfg.outer_tol = parse_real(v); }},
      {"solver.outer_cap", [&](const std::string& v) { cfg.outer_cap = parse_number<int>(v); }},
      {"solver.power_iters",
       [&](const std::string& v) { cfg.power_iters = parse_number<int>(v); }},
  };

  std::istringstream is(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        issues.push_back({line_no, "malformed section header '" + line + "'"});
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section != "system" && section != "channel" && section != "experiment" &&
          section != "solver") {
        issues.push_back({line_no, "unknown section [" + section + "]"});
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      issues.push_back({line_no, "expected 'key = value'"});
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      issues.push_back({line_no, "key '" + key + "' appears before any [section]"});
      continue;
    }
    const std::string full = section + "." + key;
    const auto it = setters.find(full);
    if (it == setters.end()) {
      issues.push_back({line_no, "unknown key '" + key + "' in [" + section + "]"});
      continue;
    }
    if (seen.count(full)) {
      issues.push_back({line_no, "duplicate key '" + key + "' (first set on line " +
                                     std::to_string(seen[full]) + ")"});
      continue;
    }
    seen[full] = line_no;
    try {
      it->second(value);
    } catch (const std::exception& e) {
      issues.push_back({line_no, "bad value '" + value + "' for '" + key + "': " + e.what()});
    }
  }

  if (issues.empty()) {
    const bool gevd = std::find(cfg.algorithms.begin(), cfg.algorithms.end(),
                                driver::Algorithm::GEVD) != cfg.algorithms.end();
    if (gevd && cfg.dims.n_subcarriers > 1) {
      const int la = seen.count("experiment.algorithm") ? seen["experiment.algorithm"] : 0;
      const int ln = seen.count("system.n_subcarriers") ? seen["system.n_subcarriers"] : 0;
      issues.push_back({la, "GEVD requires narrowband: 'algorithm' (line " +
                                std::to_string(la) + ") includes gevd but 'n_subcarriers' (line " +
                                std::to_string(ln) + ") is " +
                                std::to_string(cfg.dims.n_subcarriers)});
    } else {
      try {
        cfg.validate();
      } catch (const std::exception& e) {
        issues.push_back({0, e.what()});
      }
    }
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return cfg;
}

harness::ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError({{0, "cannot read config file '" + path + "'"}});
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const harness::ExperimentConfig& cfg) {
  std::ostringstream os;
  const auto algs = join<driver::Algorithm>(
      cfg.algorithms, [](const driver::Algorithm& a) { return driver::to_string(a); });
  const auto snrs =
      join<double>(cfg.snr_db, [](const double& d) { return io::format_double(d); });
  const auto qbits =
      join<int>(cfg.quant_bits, [](const int& q) { return std::to_string(q); });
  os << "[system]\n"
     << "n_tx = " << cfg.dims.n_tx << "\n"
     << "n_rx = " << cfg.dims.n_rx << "\n"
     << "n_rf = " << cfg.dims.n_rf << "\n"
     << "n_streams = " << cfg.dims.n_streams << "\n"
     << "n_subcarriers = " << cfg.dims.n_subcarriers << "\n\n"
     << "[channel]\n"
     << "clusters = " << cfg.channel.clusters << "\n"
     << "rays = " << cfg.channel.rays << "\n"
     << "angular_spread_deg = " << io::format_double(cfg.channel.spread_deg) << "\n\n"
     << "[experiment]\n"
     << "algorithm = " << algs << "\n"
     << "criterion = " << driver::to_string(cfg.criterion) << "\n"
     << "init = " << driver::to_string(cfg.init) << "\n"
     << "snr_db = " << snrs << "\n"
     << "trials = " << cfg.trials << "\n"
     << "symbols = " << cfg.symbols << "\n"
     << "seed = " << cfg.seed << "\n";
  if (!cfg.quant_bits.empty()) os << "quant_bits = " << qbits << "\n";
  os << "output = " << cfg.output << "\n\n"
     << "[solver]\n"
     << "outer_tol = " << io::format_double(cfg.outer_tol) << "\n"
     << "outer_cap = " << cfg.outer_cap << "\n"
     << "power_iters = " << cfg.power_iters << "\n";
  return os.str();
}

std::string config_json(const harness::ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["system"] = {{"n_tx", cfg.dims.n_tx},
                 {"n_rx", cfg.dims.n_rx},
                 {"n_rf", cfg.dims.n_rf},
                 {"n_streams", cfg.dims.n_streams},
                 {"n_subcarriers", cfg.dims.n_subcarriers}};
  j["channel"] = {{"clusters", cfg.channel.clusters},
                  {"rays", cfg.channel.rays},
                  {"angular_spread_deg", cfg.channel.spread_deg}};
  std::vector<std::string> algs;
  for (auto a : cfg.algorithms) algs.push_back(driver::to_string(a));
  j["experiment"] = {{"algorithm", algs},
                     {"criterion", driver::to_string(cfg.criterion)},
                     {"init", driver::to_string(cfg.init)},
                     {"scenario", cfg.scenario()},
                     {"snr_db", cfg.snr_db},
                     {"trials", cfg.trials},
                     {"symbols", cfg.symbols},
                     {"seed", cfg.seed},
                     {"quant_bits", cfg.quant_bits},
                     {"output", cfg.output}};
  j["solver"] = {{"outer_tol", cfg.outer_tol},
                 {"outer_cap", cfg.outer_cap},
                 {"power_iters", cfg.power_iters}};
  return j.dump(2) + "\n";
}

}  // namespace hbf::cli
