#include <doctest.h>

#include "../support/fixtures.hpp"

#include "pwu/errors.hpp"
#include "pwu/evaluation.hpp"
#include "pwu/train.hpp"

#include <zlib.h>

#include <filesystem>
#include <fstream>

using namespace pwu;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "pwu_unit";
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary) << bytes;
}

std::string be32(std::uint32_t v) {
  return {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8), static_cast<char>(v)};
}

std::string idx_images(std::uint32_t n, std::uint32_t rows, std::uint32_t cols) {
  std::string s = be32(0x803) + be32(n) + be32(rows) + be32(cols);
  for (std::uint32_t i = 0; i < n * rows * cols; ++i) {
    s.push_back(static_cast<char>(i % 256));
  }
  return s;
}

std::string idx_labels(std::uint32_t n) {
  std::string s = be32(0x801) + be32(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    s.push_back(static_cast<char>(i % 10));
  }
  return s;
}

} // namespace

TEST_CASE("IDX loader") {
  write_file(scratch("img"), idx_images(3, 2, 2));
  write_file(scratch("lab"), idx_labels(3));
  const Dataset d = load_idx(scratch("img"), scratch("lab"));
  CHECK(d.size() == 3);
  CHECK(d.dim() == 4);
  CHECK(d.x(1, 0) == doctest::Approx(1.0 / 255));
  CHECK(d.y == std::vector<int>{0, 1, 2});

  write_file(scratch("short"), idx_images(3, 2, 2).substr(0, 20));
  CHECK_THROWS_WITH_AS(load_idx(scratch("short"), scratch("lab")), doctest::Contains("byte"), ParseError);
  write_file(scratch("magic"), be32(0x804) + idx_images(1, 1, 1).substr(4));
  CHECK_THROWS_AS(load_idx(scratch("magic"), scratch("lab")), ParseError);
  write_file(scratch("lab2"), idx_labels(2));
  CHECK_THROWS_AS(load_idx(scratch("img"), scratch("lab2")), ValidationError);

  // gzip input through zlib
  gzFile gz = gzopen(scratch("img.gz").c_str(), "wb");
  const std::string raw = idx_images(3, 2, 2);
  gzwrite(gz, raw.data(), static_cast<unsigned>(raw.size()));
  gzclose(gz);
  CHECK(load_idx(scratch("img.gz"), scratch("lab")).x == d.x);
}

TEST_CASE("bundled MNIST subset") {
  const fs::path dir = fs::path(PWU_SOURCE_DIR) / "data" / "mnist10k";
  const Dataset d = load_idx(dir / "train-images-idx3-ubyte.gz", dir / "train-labels-idx1-ubyte.gz");
  CHECK(d.dim() == 784);
  CHECK(d.size() == 8000);
  CHECK(d.x.minCoeff() >= 0.0);
  CHECK(d.x.maxCoeff() <= 1.0);
}

TEST_CASE("CSV loader") {
  write_file(scratch("toy.csv"), "f1,f2,label\n1,2,0\n3,4,1\n5,6,2\n");
  const Dataset d = load_csv(scratch("toy.csv"), 2, true);
  CHECK(d.size() == 3);
  CHECK(d.dim() == 2);
  CHECK(d.y == std::vector<int>{0, 1, 2});
  CHECK(d.x(1, 2) == 6.0);
  CHECK_THROWS_AS(load_csv(scratch("toy.csv"), 5, true), ValidationError);
  write_file(scratch("ragged.csv"), "1,2,0\n3,1\n");
  CHECK_THROWS_WITH_AS(load_csv(scratch("ragged.csv"), 2, false), doctest::Contains("row"), ParseError);
  write_file(scratch("nan.csv"), "1,2,0\n3,x,1\n");
  CHECK_THROWS_AS(load_csv(scratch("nan.csv"), 2, false), ParseError);

  const Standardization s = fit_standardization(d);
  CHECK(s.mean[0] == doctest::Approx(3.0));
  CHECK(s.apply(d.x.col(1))[0] == doctest::Approx(0.0));
}

TEST_CASE("CSV data specs standardize with train statistics") {
  write_file(scratch("tr.csv"), "1,10,0\n3,30,1\n5,50,0\n");
  write_file(scratch("te.csv"), "3,30,1\n");
  const DataBundle b = load_data("csv:train=" + scratch("tr.csv").string() + ",test=" + scratch("te.csv").string() + ",label=2");
  REQUIRE(b.standardize);
  CHECK(b.standardize->apply(b.test.x.col(0)).norm() == doctest::Approx(0.0));
  CHECK(b.domain.contains(b.standardize->apply(b.train.x.col(2))));
}

TEST_CASE("blobs") {
  BlobOptions o;
  o.per_class = 200;
  const auto [train, test] = gen_blobs(o);
  CHECK(train.size() == 480);
  CHECK(test.size() == 120);
  CHECK(gen_blobs(o).first.x == train.x);

  o.spread = 0.0;
  const auto [tight, tight_test] = gen_blobs(o);
  for (Eigen::Index i = 1; i < tight.size(); ++i) {
    if (tight.y[static_cast<std::size_t>(i)] == tight.y[0]) {
      CHECK(tight.x.col(i) == tight.x.col(0));
    } else {
      CHECK(tight.x.col(i) != tight.x.col(0));
    }
  }
  o.classes = 1;
  CHECK_THROWS_AS(gen_blobs(o), ValidationError);
  CHECK_THROWS_AS(load_data("blobs:clases=3"), ValidationError);
}

TEST_CASE("canonical CSV round-trip") {
  const auto [train, test] = gen_blobs({});
  save_canonical_csv(test, scratch("canon.csv"));
  const Dataset back = load_canonical_csv(scratch("canon.csv"), Split::test);
  CHECK(back.x == test.x);
  CHECK(back.y == test.y);
}

TEST_CASE("training is deterministic and learns the fixture") {
  const auto& fx = testing::blob_fixture();
  CHECK(accuracy(fx.model, fx.data.test) >= 97.0);
  TrainOptions o;
  o.epochs = 3;
  const MlpNetwork a = train_mlp(fx.data.train.x, fx.data.train.y, 3, o);
  const MlpNetwork b = train_mlp(fx.data.train.x, fx.data.train.y, 3, o);
  CHECK(a == b);
  o.seed = 2;
  CHECK_FALSE(train_mlp(fx.data.train.x, fx.data.train.y, 3, o) == a);

  o.epochs = 0;
  const MlpNetwork init = train_mlp(fx.data.train.x, fx.data.train.y, 3, o);
  CHECK(init == init_mlp(2, o.widths, 3, o.seed));
  for (const AffineLayer& l : init.layers()) {
    CHECK(l.bias.isZero());
  }
}

TEST_CASE("divergence is reported with the epoch") {
  const auto& fx = testing::blob_fixture();
  TrainOptions o;
  o.epochs = 5;
  o.lr = 1e6;
  CHECK_THROWS_WITH_AS(train_mlp(fx.data.train.x * 1e3, fx.data.train.y, 3, o), doctest::Contains("epoch"),
                       NumericError);
}
