// Copyright 2026 The symce Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#include <catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include <zlib.h>

#include "symce/data_io.hpp"
#include "symce/errors.hpp"

using namespace symce;
namespace fs = std::filesystem;

using Bytes = std::vector<std::uint8_t>;

namespace {

Bytes header(std::uint32_t magic, std::vector<std::uint32_t> dims) {
  Bytes b;
  dims.insert(dims.begin(), magic);
  for (std::uint32_t v : dims) {
    for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<std::uint8_t>(v >> s));
  }
  return b;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("symce_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_bytes(const fs::path& p, const Bytes& b) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

void write_gzip(const fs::path& p, const Bytes& b) {
  gzFile f = gzopen(p.c_str(), "wb");
  REQUIRE(f != nullptr);
  REQUIRE(gzwrite(f, b.data(), static_cast<unsigned>(b.size())) == static_cast<int>(b.size()));
  gzclose(f);
}

}  // namespace

TEST_CASE("parse_idx_images examples", "[data_io]") {
  Bytes ok = header(kIdxImageMagic, {1, 2, 2});
  for (std::uint8_t v : {0, 255, 0, 255}) ok.push_back(v);
  const Matrix m = parse_idx_images(ok);
  REQUIRE(m.rows() == 1);
  REQUIRE(m.cols() == 4);
  CHECK(m(0, 0) == 0.0);
  CHECK(m(0, 1) == 1.0);
  CHECK(m(0, 2) == 0.0);
  CHECK(m(0, 3) == 1.0);

  Bytes wrong = ok;
  wrong[3] = 0x01;
  CHECK_THROWS_AS(parse_idx_images(wrong), FormatError);

  Bytes short_payload = header(kIdxImageMagic, {2, 2, 2});
  for (int i = 0; i < 4; ++i) short_payload.push_back(7);
  CHECK_THROWS_AS(parse_idx_images(short_payload), LengthError);
  CHECK_THROWS_AS(parse_idx_images(Bytes{0, 0, 8}), LengthError);
}

TEST_CASE("parse_idx_labels examples", "[data_io]") {
  Bytes b = header(kIdxLabelMagic, {3});
  for (std::uint8_t v : {5, 0, 4}) b.push_back(v);
  CHECK(parse_idx_labels(b) == std::vector<std::size_t>{5, 0, 4});

  Bytes wrong = b;
  wrong[3] = 0x03;
  CHECK_THROWS_AS(parse_idx_labels(wrong), FormatError);
  CHECK(parse_idx_labels(header(kIdxLabelMagic, {0})).empty());

  Bytes big = header(kIdxLabelMagic, {1});
  big.push_back(10);
  CHECK_THROWS_AS(parse_idx_labels(big), FormatError);
  CHECK(parse_idx_labels(big, 11) == std::vector<std::size_t>{10});

  Bytes truncated = header(kIdxLabelMagic, {2});
  truncated.push_back(1);
  CHECK_THROWS_AS(parse_idx_labels(truncated), LengthError);
}

TEST_CASE("IDX serializers round-trip exactly", "[data_io][property]") {
  RngStream rng(12);
  for (int t = 0; t < 20; ++t) {
    const std::uint32_t n = 1 + rng.uniform_index(6), r = 1 + rng.uniform_index(5),
                        c = 1 + rng.uniform_index(5);
    Bytes pixels(n * r * c), labels(n);
    for (auto& v : pixels) v = static_cast<std::uint8_t>(rng.uniform_index(256));
    for (auto& v : labels) v = static_cast<std::uint8_t>(rng.uniform_index(10));
    const Matrix m = parse_idx_images(idx_image_bytes(n, r, c, pixels));
    REQUIRE(m.size() == pixels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) CHECK(m.values()[i] == pixels[i] / 255.0);
    const auto parsed = parse_idx_labels(idx_label_bytes(labels));
    REQUIRE(parsed.size() == labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) CHECK(parsed[i] == labels[i]);
  }
}

TEST_CASE("gzip input is inflated transparently", "[data_io]") {
  const fs::path dir = scratch_dir("gzip");
  const Bytes raw = idx_label_bytes(Bytes{3, 1, 4, 1, 5});
  write_gzip(dir / "labels.gz", raw);
  write_bytes(dir / "labels", raw);
  CHECK(read_file_bytes(dir / "labels.gz") == raw);
  CHECK(read_file_bytes(dir / "labels") == raw);
  CHECK(maybe_gunzip(raw) == raw);
  CHECK_THROWS_AS(maybe_gunzip(Bytes{0x1f, 0x8b, 8, 0, 0}), LengthError);
  CHECK_THROWS(read_file_bytes(dir / "missing"));
  fs::remove_all(dir);
}

TEST_CASE("load_mnist reads plain and gzip files with stratified limits", "[data_io]") {
  const fs::path dir = scratch_dir("mnist");
  Bytes train_px(30 * 4), train_lb(30), test_px(6 * 4), test_lb(6);
  for (std::size_t i = 0; i < 30; ++i) {
    train_lb[i] = static_cast<std::uint8_t>(i % 10);
    for (int j = 0; j < 4; ++j) train_px[i * 4 + j] = static_cast<std::uint8_t>(i);
  }
  for (std::size_t i = 0; i < 6; ++i) test_lb[i] = static_cast<std::uint8_t>(i % 10);
  write_gzip(dir / "train-images-idx3-ubyte.gz", idx_image_bytes(30, 2, 2, train_px));
  write_bytes(dir / "train-labels-idx1-ubyte", idx_label_bytes(train_lb));
  write_bytes(dir / "t10k-images-idx3-ubyte", idx_image_bytes(6, 2, 2, test_px));
  write_gzip(dir / "t10k-labels-idx1-ubyte.gz", idx_label_bytes(test_lb));

  const auto [train, test] = load_mnist({dir, 0, 0});
  CHECK(train.size() == 30);
  CHECK(test.size() == 6);
  CHECK(train.dim() == 4);
  CHECK(train.classes == 10);
  CHECK(train.split == Split::Train);
  CHECK(test.split == Split::Test);

  const auto [small, small_test] = load_mnist({dir, 7, 4});
  CHECK(small.size() == 7);
  CHECK(small_test.size() == 4);
  fs::remove(dir / "t10k-labels-idx1-ubyte.gz");
  CHECK_THROWS_AS(load_mnist({dir, 0, 0}), InvalidInput);
  fs::remove_all(dir);
}

TEST_CASE("stratified_subset keeps per-class quotas in file order", "[data_io]") {
  Dataset d;
  d.classes = 3;
  d.features = Matrix(12, 1);
  d.labels = {0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2};
  for (std::size_t i = 0; i < 12; ++i) d.features(i, 0) = static_cast<double>(i);
  const auto s = stratified_subset(d, 7);
  REQUIRE(s.size() == 7);
  std::vector<std::size_t> per(3, 0);
  for (auto y : s.labels) ++per[y];
  CHECK(per == std::vector<std::size_t>{3, 2, 2});
  CHECK(s.features(0, 0) == 0.0);
  CHECK(s.features(1, 0) == 1.0);

  d.labels = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 2};
  const auto short_class = stratified_subset(d, 9);
  per.assign(3, 0);
  for (auto y : short_class.labels) ++per[y];
  CHECK(per == std::vector<std::size_t>{3, 1, 1});
}

TEST_CASE("synthetic_blobs examples", "[data_io]") {
  RngStream rng(5);
  const auto [train, test] = synthetic_blobs(3, 3, 5, 10.0, rng);
  CHECK(train.size() == 12);
  CHECK(test.size() == 3);
  CHECK_NOTHROW(train.validate());
  CHECK_NOTHROW(test.validate());

  RngStream a(9), b(9);
  const auto da = synthetic_blobs(4, 2, 30, 6.0, a);
  const auto db = synthetic_blobs(4, 2, 30, 6.0, b);
  CHECK(da.first.features == db.first.features);
  CHECK(da.first.labels == db.first.labels);
  CHECK(da.second.features == db.second.features);

  RngStream c(1);
  CHECK_THROWS_AS(synthetic_blobs(3, 3, 5, 0.0, c), InvalidParameter);
  CHECK_THROWS_AS(synthetic_blobs(1, 3, 5, 1.0, c), InvalidParameter);
}

TEST_CASE("synthetic labels are balanced before the split", "[data_io][property]") {
  RngStream rng(14);
  for (std::size_t k : {2u, 3u, 7u}) {
    for (std::size_t n : {5u, 11u, 40u}) {
      const auto [train, test] = synthetic_blobs(k, 2, n, 4.0, rng);
      std::vector<std::size_t> tr(k, 0), te(k, 0);
      for (auto y : train.labels) ++tr[y];
      for (auto y : test.labels) ++te[y];
      for (std::size_t c = 0; c < k; ++c) {
        CHECK(tr[c] + te[c] == n);
        CHECK(te[c] == n / 5);
      }
    }
  }
}

TEST_CASE("blob centers follow the documented layout", "[data_io]") {
  RngStream rng(3);
  const std::size_t n = 2000;
  const auto [train, test] = synthetic_blobs(3, 4, n, 10.0, rng);
  std::vector<std::vector<double>> mean(3, std::vector<double>(4, 0.0));
  std::vector<std::size_t> count(3, 0);
  for (std::size_t i = 0; i < train.size(); ++i) {
    ++count[train.labels[i]];
    for (std::size_t j = 0; j < 4; ++j) mean[train.labels[i]][j] += train.features(i, j);
  }
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK_THAT(mean[c][j] / count[c], Catch::Matchers::WithinAbs(c == j ? 10.0 : 0.0, 0.15));
    }
  }
}

TEST_CASE("Dataset::validate rejects inconsistent data", "[data_io]") {
  Dataset d;
  d.classes = 2;
  d.features = Matrix(2, 1);
  d.labels = {0};
  CHECK_THROWS_AS(d.validate(), InvalidInput);
  d.labels = {0, 2};
  CHECK_THROWS_AS(d.validate(), InvalidInput);
  d.labels = {0, 1};
  CHECK_NOTHROW(d.validate());
}
