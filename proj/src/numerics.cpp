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

#include "symce/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Core>

#include "symce/errors.hpp"

namespace symce {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> view(const Matrix& m) {
  return {m.values().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

Eigen::Map<RowMajor> view(Matrix& m) {
  return {m.values().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

void require_finite(std::span<const double> z, const char* what) {
  if (z.empty()) throw InvalidInput(std::string(what) + ": empty input");
  for (double v : z) {
    if (!std::isfinite(v)) throw InvalidInput(std::string(what) + ": non-finite input");
  }
}

/// ln(sum_k exp(z_k - z_top)) via log1p over the non-maximal entries.
double log_mass_below(std::span<const double> z, std::size_t top) {
  double rest = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (k != top) rest += std::exp(z[k] - z[top]);
  }
  return std::log1p(rest);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw InvalidInput("Matrix: data length " + std::to_string(data_.size()) +
                       " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<std::vector<double>> v;
  for (const auto& r : rows) v.emplace_back(r);
  return from_rows(v);
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.front().size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw InvalidInput("Matrix::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix Matrix::gather_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows_) throw InvalidInput("Matrix::gather_rows: index out of range");
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(indices[i] * cols_), cols_,
                out.data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
  }
  return out;
}

void gemm(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols() != b.rows()) throw InvalidInput("gemm: inner dimensions differ");
  if (out.rows() != a.rows() || out.cols() != b.cols()) out = Matrix(a.rows(), b.cols());
  view(out).noalias() = view(a) * view(b);
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.rows() != b.rows()) throw InvalidInput("gemm_tn: inner dimensions differ");
  if (out.rows() != a.cols() || out.cols() != b.cols()) out = Matrix(a.cols(), b.cols());
  view(out).noalias() = view(a).transpose() * view(b);
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols() != b.cols()) throw InvalidInput("gemm_nt: inner dimensions differ");
  if (out.rows() != a.rows() || out.cols() != b.rows()) out = Matrix(a.rows(), b.rows());
  view(out).noalias() = view(a) * view(b).transpose();
}

ProbVector::ProbVector(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw InvalidInput("ProbVector: empty");
  double sum = 0.0;
  for (double v : probs_) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput("ProbVector: entry outside [0, 1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw InvalidInput("ProbVector: entries sum to " + std::to_string(sum));
  }
}

ProbVector softmax(std::span<const double> logits) {
  require_finite(logits, "softmax");
  const double shift = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] - shift);
    total += p[k];
  }
  for (double& v : p) v /= total;
  return ProbVector(std::move(p), ProbVector::Unchecked{});
}

std::vector<double> log_softmax(std::span<const double> logits) {
  require_finite(logits, "log_softmax");
  const std::size_t top = argmax(logits);
  const double shift = logits[top];
  const double log_norm = log_mass_below(logits, top);
  std::vector<double> out(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) out[k] = (logits[k] - shift) - log_norm;
  return out;
}

double log_sum_exp(std::span<const double> logits) {
  require_finite(logits, "log_sum_exp");
  const std::size_t top = argmax(logits);
  const double shift = logits[top];
  return shift + log_mass_below(logits, top);
}

double clamped_log(double x, double floor) {
  if (!(floor < 0.0)) throw InvalidParameter("clamped_log: floor A must be negative");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidInput("clamped_log: argument outside [0, 1]");
  if (x == 0.0) return floor;
  return std::max(std::log(x), floor);
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("argmax: empty input");
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[best]) best = k;
  }
  return best;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), key_(mix64(mix64(seed) ^ mix64(stream + kGolden))) {}

RngStream RngStream::substream(std::uint64_t id) const { return RngStream(key_, id); }

std::uint64_t RngStream::next_u64() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() noexcept {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t RngStream::uniform_index(std::size_t n) noexcept {
  const unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * n;
  return static_cast<std::size_t>(wide >> 64);
}

void RngStream::shuffle(std::span<std::size_t> values) noexcept {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::swap(values[i - 1], values[uniform_index(i)]);
  }
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t rep) {
  if (rep == 0) return base;
  return RngStream(base, 0x5eed0000ULL + rep).next_u64();
}

}  // namespace symce
