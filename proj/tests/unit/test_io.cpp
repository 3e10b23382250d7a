#include "hapod/error.hpp"
#include "hapod/matrix_io.hpp"
#include "hapod/tree_io.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace hapod {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hapod_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

bool same_bits(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

using MatrixFile = TempDir;

TEST_F(MatrixFile, RoundTripIsBitExact) {
  Matrix v(4, 3);
  v << 0.0, -0.0, 1.0, std::numeric_limits<double>::denorm_min(), -std::numeric_limits<double>::max(), 1e-300,
      std::nextafter(1.0, 2.0), -1.5, 3.14159, 2.0, -0.0, 7.0;
  const SnapshotBlock block(InnerProductSpace(4), v);
  const fs::path p = dir_ / "a.hpd";
  io::write_matrix(p, block);
  EXPECT_EQ(fs::file_size(p), io::kMatrixHeaderBytes + 8u * 12u);
  const SnapshotBlock back = io::read_matrix(p);
  EXPECT_TRUE(same_bits(back.values(), v));
  EXPECT_TRUE(std::signbit(back.values()(0, 1)));
  EXPECT_FALSE(back.space().weighted());

  const fs::path q = dir_ / "b.hpd";
  io::write_matrix(q, back);
  EXPECT_EQ(slurp(p), slurp(q));
}

TEST_F(MatrixFile, RandomPayloadsRoundTrip) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Index d = 1 + static_cast<Index>(rng() % 30), m = static_cast<Index>(rng() % 30);
    Matrix v(d, m);
    for (Index i = 0; i < v.size(); ++i) {
      double x;
      do {
        const std::uint64_t bits = rng();
        std::memcpy(&x, &bits, sizeof x);
      } while (!std::isfinite(x));
      v.data()[i] = x;
    }
    const SnapshotBlock block(InnerProductSpace(d), v);
    std::stringstream buffer;
    io::write_matrix(buffer, block);
    EXPECT_TRUE(same_bits(io::read_matrix(buffer).values(), v));
  }
}

TEST_F(MatrixFile, HeaderLayoutIsLittleEndian) {
  const SnapshotBlock block(InnerProductSpace(Vector::Constant(2, 0.5)), Matrix::Constant(2, 1, 1.0));
  std::stringstream buffer;
  io::write_matrix(buffer, block);
  const std::string bytes = buffer.str();
  ASSERT_EQ(bytes.size(), io::kMatrixHeaderBytes + 8u * 2u + 8u * 2u);
  EXPECT_EQ(bytes.substr(0, 4), "HPD1");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[5]), 0u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[6]), 2u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[14]), 1u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[22]), 1u);
  // 0.5 = 0x3FE0000000000000, lowest byte first.
  EXPECT_EQ(static_cast<unsigned char>(bytes[23]), 0u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[30]), 0x3Fu);
  const SnapshotBlock back = io::read_matrix(buffer);
  ASSERT_TRUE(back.space().weighted());
  EXPECT_EQ(back.space().weights(), Vector::Constant(2, 0.5));
}

TEST_F(MatrixFile, RejectsCorruptFiles) {
  const fs::path p = dir_ / "m.hpd";
  io::write_matrix(p, SnapshotBlock(InnerProductSpace(3), Matrix::Ones(3, 2)));
  std::string bytes = slurp(p);

  const auto write = [&](const std::string& content) {
    std::ofstream(p, std::ios::binary | std::ios::trunc) << content;
  };
  write(bytes.substr(0, bytes.size() - 1));
  EXPECT_THROW(io::read_matrix(p), IoError);
  write(bytes + "x");
  EXPECT_THROW(io::read_matrix(p), IoError);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  write(bad_magic);
  EXPECT_THROW(io::read_matrix(p), IoError);
  std::string bad_version = bytes;
  bad_version[4] = 2;
  write(bad_version);
  EXPECT_THROW(io::read_matrix(p), IoError);
  std::string huge = bytes;
  huge[13] = 0x7f;  // rows ~ 2^63
  write(huge);
  EXPECT_THROW(io::read_matrix(p), IoError);
  std::string nan = bytes;
  const double q = std::numeric_limits<double>::quiet_NaN();
  std::memcpy(nan.data() + io::kMatrixHeaderBytes, &q, 8);
  write(nan);
  EXPECT_THROW(io::read_matrix(p), InputError);
  try {
    io::read_matrix(dir_ / "missing.hpd");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("missing.hpd"), std::string::npos);
  }
}

TEST_F(MatrixFile, StreamingReaderMatchesWholeRead) {
  std::mt19937_64 rng(2);
  const Matrix v = testing::random_matrix(7, 23, rng);
  const fs::path p = dir_ / "s.hpd";
  io::write_matrix(p, SnapshotBlock(InnerProductSpace(7), v));
  EXPECT_EQ(io::read_header(p).cols, 23u);
  io::MatrixReader reader(p);
  EXPECT_EQ(reader.header().rows, 7u);
  Index col = 0;
  while (reader.remaining() > 0) {
    const SnapshotBlock part = reader.read_columns(5);
    EXPECT_TRUE(same_bits(part.values(), v.middleCols(col, part.count())));
    col += part.count();
  }
  EXPECT_EQ(col, 23);
  EXPECT_EQ(reader.read_columns(5).count(), 0);
}

TEST_F(MatrixFile, CsvColumnsAreSnapshots) {
  const fs::path p = dir_ / "x.csv";
  std::ofstream(p) << "1, 2,3\n4,5 ,6.5e-1\r\n\n-0,0.1,1e300\n";
  const SnapshotBlock b = io::load_snapshots(p);
  ASSERT_EQ(b.dim(), 3);
  ASSERT_EQ(b.count(), 3);
  EXPECT_EQ(b.values()(1, 2), 0.65);
  EXPECT_EQ(b.values()(0, 1), 2.0);
  EXPECT_EQ(b.values()(2, 2), 1e300);
  EXPECT_TRUE(std::signbit(b.values()(2, 0)));

  std::ofstream(p, std::ios::trunc) << "1,2\n3\n";
  EXPECT_THROW(io::read_csv(p), IoError);
  std::ofstream(p, std::ios::trunc) << "1,abc\n";
  EXPECT_THROW(io::read_csv(p), IoError);
  std::ofstream(p, std::ios::trunc) << "";
  EXPECT_THROW(io::read_csv(p), IoError);
}

TEST(TreeText, RoundTrip) {
  std::mt19937_64 rng(3);
  for (const RootedTree& t : {build_star(4), build_chain(5), build_balanced(30, 3)}) {
    const std::string text = io::format_tree(t);
    EXPECT_EQ(io::parse_tree(text), t);
  }
  for (int trial = 0; trial < 50; ++trial) {
    const RootedTree t = testing::random_tree(1 + rng() % 40, rng);
    EXPECT_EQ(io::parse_tree(io::format_tree(t)), t);
  }
  EXPECT_EQ(io::format_tree(build_star(2)), "0 1 2\n1\n2\n");
}

TEST(TreeText, CommentsAndErrors) {
  EXPECT_EQ(io::parse_tree("# star\n0 1 2  # root\n\n1\n2\n"), build_star(2));
  EXPECT_THROW(io::parse_tree(""), ParameterError);
  EXPECT_THROW(io::parse_tree("0 1\n1 0\n"), ParameterError);
  EXPECT_THROW(io::parse_tree("0 1 2\n1\n5\n"), ParameterError);
  EXPECT_THROW(io::parse_tree("0 1\n1\n1\n"), ParameterError);
  EXPECT_THROW(io::parse_tree("0 x\n"), ParameterError);
  EXPECT_THROW(io::parse_tree("-1\n"), ParameterError);
  EXPECT_THROW(io::parse_tree("0 1 1\n1\n"), ParameterError);
}

}  // namespace
}  // namespace hapod
