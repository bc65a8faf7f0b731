#include "hbf/matrix_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hbf::io {
namespace {

std::vector<double> split_doubles(const std::string& line, int line_no) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
    } catch (const std::exception&) {
      throw Error("matrix csv line " + std::to_string(line_no) +
                  ": bad number '" + cell + "'");
    }
  }
  return out;
}

bool next_line(std::istream& is, std::string& line, int& line_no) {
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return true;
  }
  return false;
}

std::vector<int> read_header_values(std::istream& is, const std::string& expect,
                                    int& line_no) {
  std::string line;
  if (!next_line(is, line, line_no) || line != expect) {
    throw Error("matrix csv line " + std::to_string(line_no) + ": expected header '" +
                expect + "'");
  }
  if (!next_line(is, line, line_no)) {
    throw Error("matrix csv: missing header values");
  }
  std::vector<int> vals;
  for (double d : split_doubles(line, line_no)) vals.push_back(static_cast<int>(d));
  if (vals.size() != 3 || vals[0] < 0 || vals[1] < 0 || vals[2] < 0) {
    throw Error("matrix csv line " + std::to_string(line_no) + ": bad header values");
  }
  return vals;
}

std::vector<CMat> read_mats(std::istream& is, int rows, int cols, int count,
                            int& line_no) {
  std::vector<CMat> mats;
  std::string line;
  for (int k = 0; k < count; ++k) {
    CMat m(rows, cols);
    for (int r = 0; r < rows; ++r) {
      if (!next_line(is, line, line_no)) throw Error("matrix csv: truncated data");
      const auto vals = split_doubles(line, line_no);
      if (static_cast<int>(vals.size()) != 2 * cols) {
        throw Error("matrix csv line " + std::to_string(line_no) +
                    ": expected " + std::to_string(2 * cols) + " values");
      }
      for (int c = 0; c < cols; ++c) m(r, c) = cd(vals[2 * c], vals[2 * c + 1]);
    }
    mats.push_back(std::move(m));
  }
  return mats;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void write_matrix_rows(std::ostream& os, const CMat& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) os << ',';
      os << format_double(m(r, c).real()) << ',' << format_double(m(r, c).imag());
    }
    os << '\n';
  }
}

void write_channel_csv(std::ostream& os, const std::vector<CMat>& h) {
  if (h.empty()) throw InvalidArgument("write_channel_csv: no subcarriers");
  os << "nr,nt,nsub\n" << h[0].rows() << ',' << h[0].cols() << ',' << h.size() << '\n';
  for (const auto& m : h) {
    if (m.rows() != h[0].rows() || m.cols() != h[0].cols()) {
      throw DimensionError("write_channel_csv: subcarrier shapes differ");
    }
    write_matrix_rows(os, m);
  }
}

std::vector<CMat> read_channel_csv(std::istream& is) {
  int line_no = 0;
  const auto hdr = read_header_values(is, "nr,nt,nsub", line_no);
  return read_mats(is, hdr[0], hdr[1], hdr[2], line_no);
}

void write_channel_file(const std::string& path, const std::vector<CMat>& h) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_channel_csv(os, h);
  if (!os) throw Error("write failed for '" + path + "'");
}

std::vector<CMat> read_channel_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path + "' for reading");
  return read_channel_csv(is);
}

void write_block(std::ostream& os, const std::string& name,
                 const std::vector<CMat>& mats) {
  const Eigen::Index rows = mats.empty() ? 0 : mats[0].rows();
  const Eigen::Index cols = mats.empty() ? 0 : mats[0].cols();
  os << "# " << name << "\nrows,cols,count\n"
     << rows << ',' << cols << ',' << mats.size() << '\n';
  for (const auto& m : mats) write_matrix_rows(os, m);
}

std::vector<NamedBlock> read_blocks(std::istream& is) {
  std::vector<NamedBlock> out;
  int line_no = 0;
  std::string line;
  while (next_line(is, line, line_no)) {
    if (line.rfind("# ", 0) != 0) {
      throw Error("matrix csv line " + std::to_string(line_no) +
                  ": expected '# <name>'");
    }
    NamedBlock b;
    b.name = line.substr(2);
    const auto hdr = read_header_values(is, "rows,cols,count", line_no);
    b.mats = read_mats(is, hdr[0], hdr[1], hdr[2], line_no);
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace hbf::io
