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
#include <initializer_list>
#include <span>
#include <vector>

namespace symce {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  void fill(double v);
  bool all_finite() const noexcept;

  /// Rows `indices` gathered into a new matrix, in the given order.
  Matrix gather_rows(std::span<const std::size_t> indices) const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// out = a * b
void gemm(const Matrix& a, const Matrix& b, Matrix& out);
/// out = a^T * b
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& out);
/// out = a * b^T
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& out);

/// A point on the probability simplex.
class ProbVector {
 public:
  static constexpr double kSumTolerance = 1e-9;

  ProbVector() = default;
  /// Validates entries in [0, 1] summing to 1 within kSumTolerance.
  explicit ProbVector(std::vector<double> probs);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t k) const noexcept { return probs_[k]; }
  std::span<const double> values() const noexcept { return probs_; }
  const std::vector<double>& vec() const noexcept { return probs_; }

  bool operator==(const ProbVector&) const = default;

 private:
  struct Unchecked {};
  ProbVector(std::vector<double> probs, Unchecked) : probs_(std::move(probs)) {}
  friend ProbVector softmax(std::span<const double> logits);

  std::vector<double> probs_;
};

/// Max-shifted softmax. Throws InvalidInput on empty or non-finite input.
ProbVector softmax(std::span<const double> logits);

/// ln softmax(z), accurate to relative rounding even for the dominant
/// entry of saturated logits (uses log1p of the non-maximal mass).
std::vector<double> log_softmax(std::span<const double> logits);

/// ln(sum exp(z)), max-shifted. Throws InvalidInput on empty or non-finite input.
double log_sum_exp(std::span<const double> logits);

/// max(ln x, floor): the logarithm with ln 0 defined as `floor` (< 0).
double clamped_log(double x, double floor);

/// Index of the largest entry; ties go to the smallest index.
std::size_t argmax(std::span<const double> values);

/// Counter-based generator. A (seed, stream) pair names an independent,
/// reproducible draw sequence; draw n is a pure function of (seed, stream, n).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t position() const noexcept { return counter_; }

  /// Independent child stream; does not advance this stream.
  RngStream substream(std::uint64_t id) const;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  /// Standard normal via Box-Muller; consumes exactly two uniforms.
  double normal() noexcept;
  /// Uniform on {0, ..., n-1}; n must be positive.
  std::size_t uniform_index(std::size_t n) noexcept;

  void shuffle(std::span<std::size_t> values) noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Seed for repetition `rep` of a run seeded with `base`; rep 0 keeps `base`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t rep);

}  // namespace symce
