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

#include "symce/data_io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>

#include <zlib.h>

#include "symce/errors.hpp"

namespace symce {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void check_header(std::span<const std::uint8_t> bytes, std::size_t header_len,
                  std::uint32_t magic, const char* who) {
  if (bytes.size() < 4) throw LengthError(std::string(who) + ": missing header");
  const std::uint32_t found = read_be32(bytes, 0);
  if (found != magic) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s: bad magic 0x%08x", who, found);
    throw FormatError(buf);
  }
  if (bytes.size() < header_len) throw LengthError(std::string(who) + ": truncated header");
}

std::filesystem::path find_idx(const std::filesystem::path& dir, const std::string& stem) {
  for (const auto& name : {stem, stem + ".gz"}) {
    const auto p = dir / name;
    if (std::filesystem::exists(p)) return p;
  }
  throw InvalidInput("MNIST file " + stem + "[.gz] not found in " + dir.string());
}

}  // namespace

void Dataset::validate() const {
  if (features.rows() != labels.size()) {
    throw InvalidInput("Dataset: feature rows do not match label count");
  }
  for (std::size_t y : labels) {
    if (y >= classes) throw InvalidInput("Dataset: label out of range");
  }
}

Matrix parse_idx_images(std::span<const std::uint8_t> bytes) {
  check_header(bytes, 16, kIdxImageMagic, "parse_idx_images");
  const std::size_t count = read_be32(bytes, 4);
  const std::size_t rows = read_be32(bytes, 8);
  const std::size_t cols = read_be32(bytes, 12);
  const std::size_t pixels = rows * cols;
  if (bytes.size() - 16 < count * pixels) {
    throw LengthError("parse_idx_images: payload holds " + std::to_string(bytes.size() - 16) +
                      " bytes, header declares " + std::to_string(count * pixels));
  }
  Matrix out(count, pixels);
  auto dst = out.values();
  for (std::size_t i = 0; i < count * pixels; ++i) dst[i] = bytes[16 + i] / 255.0;
  return out;
}

std::vector<std::size_t> parse_idx_labels(std::span<const std::uint8_t> bytes,
                                          std::size_t max_classes) {
  check_header(bytes, 8, kIdxLabelMagic, "parse_idx_labels");
  const std::size_t count = read_be32(bytes, 4);
  if (bytes.size() - 8 < count) throw LengthError("parse_idx_labels: truncated payload");
  std::vector<std::size_t> labels(count);
  for (std::size_t i = 0; i < count; ++i) {
    labels[i] = bytes[8 + i];
    if (labels[i] >= max_classes) {
      throw FormatError("parse_idx_labels: label " + std::to_string(labels[i]) + " at item " +
                        std::to_string(i) + " exceeds class count");
    }
  }
  return labels;
}

std::vector<std::uint8_t> idx_image_bytes(std::uint32_t count, std::uint32_t rows,
                                          std::uint32_t cols,
                                          std::span<const std::uint8_t> pixels) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + pixels.size());
  write_be32(out, kIdxImageMagic);
  write_be32(out, count);
  write_be32(out, rows);
  write_be32(out, cols);
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

std::vector<std::uint8_t> idx_label_bytes(std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> out;
  write_be32(out, kIdxLabelMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

std::vector<std::uint8_t> maybe_gunzip(std::vector<std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 0x1f || bytes[1] != 0x8b) return bytes;

  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) throw FormatError("gzip: inflateInit2 failed");
  zs.next_in = bytes.data();
  zs.avail_in = static_cast<uInt>(bytes.size());

  std::vector<std::uint8_t> out;
  std::uint8_t chunk[1 << 16];
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = chunk;
    zs.avail_out = sizeof chunk;
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw FormatError("gzip: corrupt stream");
    }
    out.insert(out.end(), chunk, chunk + (sizeof chunk - zs.avail_out));
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      throw LengthError("gzip: truncated stream");
    }
  }
  inflateEnd(&zs);
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return maybe_gunzip(std::move(bytes));
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("SYMCE_DATA_DIR"); env && *env) return env;
#ifdef SYMCE_DEFAULT_DATA_DIR
  return SYMCE_DEFAULT_DATA_DIR;
#else
  return "data";
#endif
}

std::pair<Dataset, Dataset> load_mnist(const MnistOptions& options) {
  auto load = [&](const std::string& prefix, Split split) {
    Dataset d;
    d.features = parse_idx_images(read_file_bytes(find_idx(options.dir, prefix + "-images-idx3-ubyte")));
    d.labels = parse_idx_labels(read_file_bytes(find_idx(options.dir, prefix + "-labels-idx1-ubyte")));
    d.classes = 10;
    d.split = split;
    d.validate();
    return d;
  };
  Dataset train = load("train", Split::Train);
  Dataset test = load("t10k", Split::Test);
  if (options.train_limit && options.train_limit < train.size()) {
    train = stratified_subset(train, options.train_limit);
  }
  if (options.test_limit && options.test_limit < test.size()) {
    test = stratified_subset(test, options.test_limit);
  }
  return {std::move(train), std::move(test)};
}

Dataset stratified_subset(const Dataset& data, std::size_t count) {
  const std::size_t k = data.classes;
  std::vector<std::size_t> quota(k, count / k);
  for (std::size_t c = 0; c < count % k; ++c) ++quota[c];
  std::vector<std::size_t> picked;
  picked.reserve(count);
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto& left = quota[data.labels[i]];
    if (left > 0) {
      picked.push_back(i);
      --left;
    }
  }
  Dataset out;
  out.features = data.features.gather_rows(picked);
  out.labels.reserve(picked.size());
  for (std::size_t i : picked) out.labels.push_back(data.labels[i]);
  out.classes = k;
  out.split = data.split;
  return out;
}

std::pair<Dataset, Dataset> synthetic_blobs(std::size_t classes, std::size_t dim,
                                            std::size_t per_class, double separation,
                                            RngStream& rng) {
  if (classes < 2) throw InvalidParameter("synthetic_blobs: need at least two classes");
  if (dim == 0) throw InvalidParameter("synthetic_blobs: dimension must be positive");
  if (!(separation > 0.0)) throw InvalidParameter("synthetic_blobs: separation must be > 0");

  Matrix centers(classes, dim);
  for (std::size_t c = 0; c < classes; ++c) {
    if (dim >= classes) {
      centers(c, c) = separation;
    } else if (dim >= 2) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / classes;
      centers(c, 0) = separation * std::cos(angle);
      centers(c, 1) = separation * std::sin(angle);
    } else {
      centers(c, 0) = separation * static_cast<double>(c);
    }
  }

  const std::size_t test_per_class = per_class / 5;
  const std::size_t train_per_class = per_class - test_per_class;
  Dataset train, test;
  train.features = Matrix(classes * train_per_class, dim);
  test.features = Matrix(classes * test_per_class, dim);
  train.classes = test.classes = classes;
  train.split = Split::Train;
  test.split = Split::Test;

  std::size_t tr = 0, te = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      const bool to_train = i < train_per_class;
      auto row = to_train ? train.features.row(tr++) : test.features.row(te++);
      for (std::size_t j = 0; j < dim; ++j) row[j] = centers(c, j) + rng.normal();
      (to_train ? train.labels : test.labels).push_back(c);
    }
  }

  // Interleave classes so prefixes of the sets are not single-class.
  auto permute = [&rng](Dataset& d) {
    std::vector<std::size_t> order(d.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    d.features = d.features.gather_rows(order);
    std::vector<std::size_t> labels(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) labels[i] = d.labels[order[i]];
    d.labels = std::move(labels);
  };
  permute(train);
  permute(test);
  return {std::move(train), std::move(test)};
}

}  // namespace symce
