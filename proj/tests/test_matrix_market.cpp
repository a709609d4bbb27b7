#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "sssvd/matrix_market.hpp"
#include "sssvd/problems.hpp"

using namespace sssvd;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& contents = {})
      : path((std::filesystem::temp_directory_path() / name).string()) {
    if (!contents.empty()) {
      std::ofstream out(path);
      out << contents;
    }
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("array format, column-major order") {
  TempFile f("mm_array.mtx",
             "%%MatrixMarket matrix array real general\n"
             "% a 2x2 example\n"
             "2 2\n1\n3\n2\n4\n");
  const auto a = read_matrix_market<double>(f.path);
  Matrix<double> expected(2, 2);
  expected << 1, 2, 3, 4;
  CHECK((a.to_dense() - expected).norm() == 0.0);
  CHECK_FALSE(a.is_sparse());
}

TEST_CASE("coordinate format with duplicate entries summed") {
  TempFile f("mm_dup.mtx",
             "%%MatrixMarket matrix coordinate real general\n"
             "3 2 3\n"
             "1 1 0.5\n"
             "1 1 0.5\n"
             "3 2 2.0\n");
  const auto a = read_matrix_market<double>(f.path);
  CHECK(a.is_sparse());
  const auto dense = a.to_dense();
  CHECK(dense(0, 0) == 1.0);
  CHECK(dense(2, 1) == 2.0);
  CHECK(dense.rows() == 3);
}

TEST_CASE("symmetric coordinate storage expands") {
  TempFile f("mm_sym.mtx",
             "%%MatrixMarket matrix coordinate real symmetric\n"
             "2 2 2\n"
             "1 1 5\n"
             "2 1 3\n");
  const auto dense = read_matrix_market<double>(f.path).to_dense();
  CHECK(dense(0, 1) == 3.0);
  CHECK(dense(1, 0) == 3.0);
  CHECK(dense(0, 0) == 5.0);
}

TEST_CASE("pattern and complex fields are rejected") {
  TempFile fp("mm_pat.mtx", "%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 1\n");
  CHECK_THROWS_WITH_AS(read_matrix_market<double>(fp.path),
                       doctest::Contains("unsupported field"), MatrixMarketError);
  TempFile fc("mm_cpx.mtx",
              "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1.0 0.0\n");
  CHECK_THROWS_AS(read_matrix_market<double>(fc.path), MatrixMarketError);
}

TEST_CASE("parse errors carry the line number") {
  TempFile f("mm_bad.mtx",
             "%%MatrixMarket matrix coordinate real general\n"
             "% comment\n"
             "2 2 2\n"
             "1 1 1.0\n"
             "oops\n");
  try {
    read_matrix_market<double>(f.path);
    FAIL("expected a parse error");
  } catch (const MatrixMarketError& ex) {
    CHECK(std::string(ex.what()).find(":5:") != std::string::npos);
  }
}

TEST_CASE("out-of-range indices are rejected") {
  TempFile f("mm_oob.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n");
  CHECK_THROWS_AS(read_matrix_market<double>(f.path), MatrixMarketError);
}

TEST_CASE("round trip of model problem 1 is lossless") {
  ModelSpec<double> spec;
  spec.which = ModelKind::Model1;
  spec.rows = 60;  // small instance, same construction
  spec.cols = 20;
  const auto problem = build_model(spec);
  TempFile f("mm_round.mtx");
  write_matrix_market(f.path, problem.matrix, "round trip");
  const auto back = read_matrix_market<double>(f.path);
  CHECK((back.to_dense() - problem.matrix.to_dense()).norm() == 0.0);  // 17 digits round-trip
}

TEST_CASE("round trip preserves the user orientation of wide matrices") {
  Matrix<double> wide(2, 5);
  for (Index j = 0; j < 5; ++j)
    for (Index i = 0; i < 2; ++i) wide(i, j) = double(10 * (i + 1) + j);
  const auto p = ProblemMatrix<double>::from_dense(wide);
  CHECK(p.transposed());
  TempFile f("mm_wide.mtx");
  write_matrix_market(f.path, p, "");
  const auto back = read_matrix_market<double>(f.path);
  // file stores 2x5; reading re-normalizes to 5x2 transposed again
  CHECK(back.transposed());
  CHECK((back.to_dense() - wide.transpose()).norm() == 0.0);
}

TEST_CASE("sparse round trip") {
  SparseMatrix<double> s(4, 3);
  s.insert(0, 0) = 1.25;
  s.insert(3, 2) = -7.5e-13;
  s.makeCompressed();
  const auto p = ProblemMatrix<double>::from_sparse(s);
  TempFile f("mm_sparse.mtx");
  write_matrix_market(f.path, p, "");
  const auto back = read_matrix_market<double>(f.path);
  CHECK(back.is_sparse());
  CHECK((back.to_dense() - p.to_dense()).norm() == 0.0);
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(read_matrix_market<double>("/nonexistent/path.mtx"), std::runtime_error);
}
