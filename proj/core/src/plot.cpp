#include "hbf/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace hbf::plot {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_svg(std::ostream& os, const ChartSpec& spec, const std::vector<Series>& series) {
  const double left = 70, right = 150, top = 40, bottom = 55;
  const double pw = spec.width - left - right;
  const double ph = spec.height - top - bottom;

  auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (spec.log_y && !(s.y[i] > 0.0)) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (spec.log_y) {
    y0 = std::floor(y0);
    y1 = std::ceil(y1);
  }
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (1.0 - (ty(y) - y0) / (y1 - y0)) * ph; };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width
     << "\" height=\"" << spec.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(spec.title) << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0;
    os << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 18
       << "\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
  }
  const int yticks = spec.log_y ? static_cast<int>(y1 - y0) : 5;
  for (int i = 0; i <= yticks; ++i) {
    const double yt = y0 + (y1 - y0) * i / yticks;
    const double yy = top + (1.0 - (yt - y0) / (y1 - y0)) * ph;
    const std::string label = spec.log_y ? "1e" + fmt(yt) : fmt(yt);
    os << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << yy << "\" y2=\""
       << yy << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << yy + 4 << "\" text-anchor=\"end\">"
       << label << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << spec.height - 12
     << "\" text-anchor=\"middle\">" << escape(spec.x_label) << "</text>\n";
  os << "<text transform=\"translate(16," << top + ph / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(spec.y_label) << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % std::size(kPalette)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (spec.log_y && !(s.y[i] > 0.0)) continue;
      os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    os << "\"/>\n";
    const double ly = top + 16 + 18.0 * static_cast<double>(si);
    os << "<line x1=\"" << left + pw + 12 << "\" x2=\"" << left + pw + 36 << "\" y1=\"" << ly
       << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly + 4 << "\">" << escape(s.label)
       << "</text>\n";
  }
  os << "</svg>\n";
}

std::vector<Series> series_for_metric(const std::vector<harness::SweepRecord>& records,
                                      harness::Metric metric) {
  std::vector<Series> out;
  std::map<std::string, std::size_t> index;
  for (const auto& r : records) {
    if (r.metric != metric) continue;
    auto it = index.find(r.algorithm);
    if (it == index.end()) {
      it = index.emplace(r.algorithm, out.size()).first;
      out.push_back({r.algorithm, {}, {}});
    }
    out[it->second].x.push_back(r.snr_db);
    out[it->second].y.push_back(r.value);
  }
  return out;
}

std::vector<std::string> write_sweep_plots(const std::string& prefix,
                                           const std::vector<harness::SweepRecord>& records) {
  std::vector<std::string> paths;
  for (auto m : harness::kAllMetrics) {
    const auto series = series_for_metric(records, m);
    if (series.empty()) continue;
    ChartSpec spec;
    spec.title = harness::to_string(m) + " vs SNR";
    spec.x_label = "SNR (dB)";
    spec.y_label = m == harness::Metric::BER   ? "bit error rate"
                   : m == harness::Metric::MSE ? "MSE per subcarrier"
                                               : "spectral efficiency (bit/s/Hz)";
    spec.log_y = m == harness::Metric::BER;
    const std::string path = prefix + "_" + harness::to_string(m) + ".svg";
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    write_svg(os, spec, series);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace hbf::plot
