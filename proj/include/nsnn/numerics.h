// Copyright 2026 The NSNN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NSNN_NUMERICS_H_
#define NSNN_NUMERICS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nsnn {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  // Builds from nested initializer rows; every row must have equal length.
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool all_finite() const;
  void fill(double v);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);

// y = a * x
Vector matvec(const Matrix& a, std::span<const double> x);
// y = a^T * x
Vector matvec_transposed(const Matrix& a, std::span<const double> x);
// a += scale * u v^T
void add_outer(Matrix& a, std::span<const double> u, std::span<const double> v,
               double scale = 1.0);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

Vector softmax(std::span<const double> logits);

struct LossGrad {
  double loss = 0.0;
  Vector grad;
};

// Cross-entropy of softmax(logits) against a one-hot target; grad is with
// respect to the logits and sums to zero.
LossGrad softmax_cross_entropy(std::span<const double> logits,
                               std::size_t target_class);

// Counter-based random stream (Philox4x32-10). The seed is the cipher key,
// (stream_id, counter) is the 128-bit counter, so any (seed, stream_id) pair
// is an independent, replayable sequence regardless of the order in which
// streams are consumed.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  // Number of 64-bit words consumed so far.
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Zero-mean normal with the given standard deviation (Box-Muller).
  double gaussian(double sigma);

  // Derives an independent child stream. Same (parent, tag) gives the same
  // child; the parent's position is not affected.
  RngStream split(std::uint64_t tag) const;

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t counter_ = 0;
  // Second half of the most recent 128-bit Philox block.
  std::uint64_t spare_ = 0;
  bool has_spare_ = false;
  double gauss_spare_ = 0.0;
  bool has_gauss_spare_ = false;
};

// Raw Philox4x32-10 block function, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

double sample_gaussian(RngStream& rng, double sigma);
double sample_uniform(RngStream& rng);

// 64-bit finalizer from SplitMix64; used for stream derivation and hashing.
std::uint64_t mix64(std::uint64_t x);

}  // namespace nsnn

#endif  // NSNN_NUMERICS_H_
