// TGF1 binary snapshot files.
//
// Layout (all integers little-endian):
//   magic   "TGF1"            4 bytes
//   version u16               currently 1
//   dim     u16               1 or 2
//   cells   u64 x dim         cells per axis
//   count   u16               number of fields
//   names   count entries     u16 length + ASCII bytes each
//   payload count * prod(cells) f64, row-major (axis 0 fastest), fields
//           concatenated in name order
//
// Round trips are bit-exact; readers refuse wrong magic or version and any
// truncation.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tgc/grid.hpp"

namespace tgc {

struct SnapshotData {
  int dim = 1;
  std::vector<std::uint64_t> cells;
  std::vector<std::pair<std::string, std::vector<double>>> fields;

  std::uint64_t cell_count() const {
    std::uint64_t total = 1;
    for (std::uint64_t c : cells) total *= c;
    return total;
  }
};

void write_snapshot(const std::string& path,
                    const std::vector<std::pair<std::string, Field>>& fields);

SnapshotData read_snapshot(const std::string& path);

// Binds raw snapshot data onto a domain (lengths are not stored in the file).
// Throws FormatError if the cell shape disagrees.
std::vector<std::pair<std::string, Field>> bind_snapshot(const SnapshotData& data,
                                                         const Domain& domain);

}  // namespace tgc
