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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "symce/numerics.hpp"

namespace symce {

enum class Split { Train, Test };

struct Dataset {
  Matrix features;                  // n x d; images scaled to [0, 1]
  std::vector<std::size_t> labels;  // n entries, each < classes
  std::size_t classes = 0;
  Split split = Split::Train;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return features.cols(); }
  /// Throws InvalidInput if rows and labels disagree or a label is >= classes.
  void validate() const;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// IDX image container: magic, item count, rows, cols (big-endian u32),
/// then one unsigned byte per pixel. Pixels are divided by 255.
/// Throws FormatError on a wrong magic and LengthError on a short payload.
Matrix parse_idx_images(std::span<const std::uint8_t> bytes);

/// IDX label container: magic, item count, then one byte per label. Labels
/// >= max_classes raise FormatError.
std::vector<std::size_t> parse_idx_labels(std::span<const std::uint8_t> bytes,
                                          std::size_t max_classes = 10);

/// Serializers producing the exact byte layout the parsers accept.
std::vector<std::uint8_t> idx_image_bytes(std::uint32_t count, std::uint32_t rows,
                                          std::uint32_t cols, std::span<const std::uint8_t> pixels);
std::vector<std::uint8_t> idx_label_bytes(std::span<const std::uint8_t> labels);

/// Inflates gzip input (leading bytes 1f 8b); anything else is returned as is.
std::vector<std::uint8_t> maybe_gunzip(std::vector<std::uint8_t> bytes);

/// Reads a file and transparently decompresses gzip content.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

/// $SYMCE_DATA_DIR if set, else the directory configured at build time.
std::filesystem::path default_data_dir();

struct MnistOptions {
  std::filesystem::path dir;
  std::size_t train_limit = 0;  // 0 keeps everything; otherwise class-stratified
  std::size_t test_limit = 0;
};

/// Loads train-/t10k- images and labels from `dir`, accepting both the
/// plain names and a ".gz" suffix.
std::pair<Dataset, Dataset> load_mnist(const MnistOptions& options);

/// First `count / K` samples of each class in file order; the first
/// `count % K` classes take one extra. Classes short of their quota
/// contribute everything they have.
Dataset stratified_subset(const Dataset& data, std::size_t count);

/// K Gaussian blobs with unit isotropic noise. Class c is centered at
/// separation * e_c when d >= K, at separation * (cos, sin) of angle 2 pi c / K
/// when 2 <= d < K, and at c * separation when d = 1. Per class,
/// floor(n / 5) samples go to test and the rest to train.
std::pair<Dataset, Dataset> synthetic_blobs(std::size_t classes, std::size_t dim,
                                            std::size_t per_class, double separation,
                                            RngStream& rng);

}  // namespace symce
