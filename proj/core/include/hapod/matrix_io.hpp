#pragma once

// Binary matrix format:
//   "HPD1" | version u16 | rows u64 | cols u64 | weighted u8
//   [rows x f64 weights if weighted] | rows*cols x f64 column-major
// All integers and floats little-endian.

#include "hapod/space.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>

namespace hapod::io {

inline constexpr std::uint16_t kMatrixFormatVersion = 1;
inline constexpr std::size_t kMatrixHeaderBytes = 23;

struct MatrixHeader {
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  bool weighted = false;
};

void write_matrix(std::ostream& out, const SnapshotBlock& block);
SnapshotBlock read_matrix(std::istream& in);

void write_matrix(const std::filesystem::path& path, const SnapshotBlock& block);
SnapshotBlock read_matrix(const std::filesystem::path& path);

/// Reads a file column by column without loading the payload.
class MatrixReader {
 public:
  explicit MatrixReader(const std::filesystem::path& path);

  const MatrixHeader& header() const { return header_; }
  const InnerProductSpace& space() const { return space_; }
  std::uint64_t remaining() const { return header_.cols - consumed_; }

  /// Up to `n` further columns (fewer at the end of the file).
  SnapshotBlock read_columns(std::uint64_t n);

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  MatrixHeader header_;
  InnerProductSpace space_{1};
  std::uint64_t consumed_ = 0;
};

/// Header only; throws IoError on a bad magic or version.
MatrixHeader read_header(const std::filesystem::path& path);

/// Comma-separated text, one snapshot per column, one grid point per row.
SnapshotBlock read_csv(const std::filesystem::path& path);

/// Dispatches on extension: ".csv" is text, anything else binary.
SnapshotBlock load_snapshots(const std::filesystem::path& path);

}  // namespace hapod::io
