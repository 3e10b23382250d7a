#include "hapod/matrix_io.hpp"

#include "hapod/error.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace hapod::io {
namespace {

constexpr std::array<char, 4> kMagic{'H', 'P', 'D', '1'};

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw IoError("truncated matrix header");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}

void put_doubles(std::ostream& out, const double* data, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  } else {
    for (std::size_t i = 0; i < n; ++i) put_le(out, std::bit_cast<std::uint64_t>(data[i]));
  }
}

void get_doubles(std::istream& in, double* data, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw IoError("truncated matrix payload");
  } else {
    for (std::size_t i = 0; i < n; ++i) data[i] = std::bit_cast<double>(get_le<std::uint64_t>(in));
  }
}

MatrixHeader parse_header(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw IoError("not a HPD1 matrix file (bad magic)");
  const auto version = get_le<std::uint16_t>(in);
  if (version != kMatrixFormatVersion) throw IoError("unsupported matrix format version " + std::to_string(version));
  MatrixHeader h;
  h.rows = get_le<std::uint64_t>(in);
  h.cols = get_le<std::uint64_t>(in);
  const auto flag = get_le<std::uint8_t>(in);
  if (flag > 1) throw IoError("invalid weight flag " + std::to_string(flag));
  h.weighted = flag == 1;
  if (h.rows == 0) throw IoError("matrix file declares zero rows");
  return h;
}

InnerProductSpace read_space(std::istream& in, const MatrixHeader& h) {
  if (!h.weighted) return InnerProductSpace(static_cast<Index>(h.rows));
  Vector w(static_cast<Index>(h.rows));
  get_doubles(in, w.data(), h.rows);
  return InnerProductSpace(std::move(w));
}

// Rejects headers whose declared payload disagrees with the file length
// before anything is allocated.
void check_file_size(const std::filesystem::path& path, const MatrixHeader& h) {
  constexpr std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / 8;
  const std::uint64_t weight_doubles = h.weighted ? h.rows : 0;
  if (h.cols != 0 && h.rows > (limit - weight_doubles) / h.cols) throw IoError("declared matrix size overflows");
  const std::uint64_t expected = kMatrixHeaderBytes + 8 * (weight_doubles + h.rows * h.cols);
  const std::uint64_t actual = std::filesystem::file_size(path);
  if (actual != expected) {
    throw IoError("file holds " + std::to_string(actual) + " bytes, header implies " + std::to_string(expected));
  }
}

template <typename F>
auto with_path(const std::filesystem::path& path, F&& f) {
  try {
    return f();
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace

void write_matrix(std::ostream& out, const SnapshotBlock& block) {
  const InnerProductSpace& space = block.space();
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint16_t>(out, kMatrixFormatVersion);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(block.dim()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(block.count()));
  put_le<std::uint8_t>(out, space.weighted() ? 1 : 0);
  if (space.weighted()) put_doubles(out, space.weights().data(), static_cast<std::size_t>(space.dim()));
  put_doubles(out, block.values().data(), static_cast<std::size_t>(block.values().size()));
  if (!out) throw IoError("write failed");
}

SnapshotBlock read_matrix(std::istream& in) {
  const MatrixHeader h = parse_header(in);
  InnerProductSpace space = read_space(in, h);
  Matrix values(static_cast<Index>(h.rows), static_cast<Index>(h.cols));
  get_doubles(in, values.data(), h.rows * h.cols);
  if (in.peek() != std::char_traits<char>::eof()) throw IoError("trailing bytes after matrix payload");
  return SnapshotBlock(std::move(space), std::move(values));
}

void write_matrix(const std::filesystem::path& path, const SnapshotBlock& block) {
  with_path(path, [&] {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing");
    write_matrix(out, block);
    out.close();
    if (!out) throw IoError("write failed");
  });
}

SnapshotBlock read_matrix(const std::filesystem::path& path) {
  return with_path(path, [&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading");
    check_file_size(path, parse_header(in));
    in.seekg(0);
    return read_matrix(in);
  });
}

MatrixHeader read_header(const std::filesystem::path& path) {
  return with_path(path, [&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading");
    return parse_header(in);
  });
}

MatrixReader::MatrixReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
  with_path(path_, [&] {
    if (!in_) throw IoError("cannot open for reading");
    header_ = parse_header(in_);
    check_file_size(path_, header_);
    space_ = read_space(in_, header_);
  });
}

SnapshotBlock MatrixReader::read_columns(std::uint64_t n) {
  return with_path(path_, [&] {
    const std::uint64_t take = std::min(n, remaining());
    Matrix values(static_cast<Index>(header_.rows), static_cast<Index>(take));
    get_doubles(in_, values.data(), header_.rows * take);
    consumed_ += take;
    return SnapshotBlock(space_, std::move(values));
  });
}

SnapshotBlock read_csv(const std::filesystem::path& path) {
  return with_path(path, [&] {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading");
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      std::vector<double> row;
      const char* p = line.data();
      const char* end = p + line.size();
      while (true) {
        while (p < end && (*p == ' ' || *p == '\t')) ++p;
        double v = 0.0;
        auto [next, ec] = std::from_chars(p, end, v);
        if (ec != std::errc()) throw IoError("line " + std::to_string(line_no) + ": expected a number");
        row.push_back(v);
        p = next;
        while (p < end && (*p == ' ' || *p == '\t')) ++p;
        if (p == end) break;
        if (*p != ',') throw IoError("line " + std::to_string(line_no) + ": expected ','");
        ++p;
      }
      if (!rows.empty() && row.size() != rows.front().size()) {
        throw IoError("line " + std::to_string(line_no) + ": inconsistent number of columns");
      }
      rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError("empty CSV file");
    Matrix values(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < rows[i].size(); ++j) values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
    InnerProductSpace space(values.rows());
    return SnapshotBlock(std::move(space), std::move(values));
  });
}

SnapshotBlock load_snapshots(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return read_csv(path);
  return read_matrix(path);
}

}  // namespace hapod::io
