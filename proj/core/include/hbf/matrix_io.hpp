#pragma once

// Plain-text matrix fixtures.
//
// Channel file:
//   nr,nt,nsub
//   <nr>,<nt>,<nsub>
//   then nsub*nr lines, one matrix row each, as re,im,re,im,... (row-major,
//   subcarrier 0 first).
//
// Matrix block (used for beamformer dumps):
//   # <name>
//   rows,cols,count
//   <rows>,<cols>,<count>
//   count*rows lines of interleaved re,im.
//
// Values are written with 17 significant digits so a read-back is exact.

#include <iosfwd>
#include <string>
#include <vector>

#include "hbf/types.hpp"

namespace hbf::io {

void write_matrix_rows(std::ostream& os, const CMat& m);

void write_channel_csv(std::ostream& os, const std::vector<CMat>& per_subcarrier);
std::vector<CMat> read_channel_csv(std::istream& is);

void write_channel_file(const std::string& path, const std::vector<CMat>& h);
std::vector<CMat> read_channel_file(const std::string& path);

void write_block(std::ostream& os, const std::string& name,
                 const std::vector<CMat>& mats);

struct NamedBlock {
  std::string name;
  std::vector<CMat> mats;
};
std::vector<NamedBlock> read_blocks(std::istream& is);

/// Shortest round-trippable decimal form of a double.
std::string format_double(double x);

}  // namespace hbf::io
