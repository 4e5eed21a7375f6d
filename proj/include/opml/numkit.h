/*
 * Copyright 2026 The OPML Lab Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef OPML_NUMKIT_H_
#define OPML_NUMKIT_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace opml {

// Dense row-major matrix of doubles. Entries are checked for finiteness when
// the matrix is built from existing data; in-place writes are unchecked.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix Identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

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

  bool AllFinite() const;
  Matrix Transpose() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// a * b.
Matrix MatMul(const Matrix& a, const Matrix& b);
// a^T * b without materializing the transpose.
Matrix MatTMul(const Matrix& a, const Matrix& b);

// Deterministic splitmix64 stream. Each call to Next() performs
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
// Derived draws are documented next to each helper so other implementations
// can reproduce generated datasets bit for bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t Next();
  std::uint64_t state() const { return state_; }

  // Top 53 bits of Next() scaled by 2^-53; result in [0, 1).
  double Uniform();
  // lo + (hi - lo) * Uniform().
  double Uniform(double lo, double hi);
  // Box-Muller: u1 = 1 - Uniform() in (0, 1], u2 = Uniform(),
  // returns sqrt(-2 ln u1) * cos(2 pi u2). One pair of draws per call.
  double Gaussian();
  // Knuth's multiplication method: count Uniform() draws until the running
  // product falls to exp(-mean) or below.
  std::size_t Poisson(double mean);

 private:
  std::uint64_t state_;
};

// Unbiased index in [0, n) by rejection on the 64-bit stream: draws are
// rejected while below (2^64 - n) mod n, then reduced modulo n.
std::size_t rng_uniform_index(Rng& rng, std::size_t n);

// log(constant + sum_i exp(terms_i)), shifted by
// m = max(0 if constant > 0 else -inf, max_i terms_i).
double stable_log_sum(double constant, std::span<const double> terms);

// log(constant + sum_i weights_i * exp(terms_i)). Terms with zero weight are
// dropped before the shift is chosen; nonzero terms accumulate as
// exp(terms_i - m) * weights_i.
double stable_weighted_log_sum(double constant, std::span<const double> terms,
                               std::span<const double> weights);

// Numerically stable log(1 + exp(x)).
double softplus(double x);
// Numerically stable logistic function.
double sigmoid(double x);

// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
class Cholesky {
 public:
  // Throws NumericalError naming the first non-positive pivot.
  explicit Cholesky(const Matrix& spd);

  const Matrix& lower() const { return lower_; }
  // 2 * sum(log(diag(L))).
  double LogDet() const;
  // Solves A X = B column by column.
  Matrix Solve(const Matrix& rhs) const;

 private:
  Matrix lower_;
};

// log det(gram + epsilon * I) through a Cholesky factorization of the
// symmetrized, shifted matrix. gram must be square and symmetric to 1e-10.
double logdet_psd(const Matrix& gram, double epsilon);

using ScalarFn = std::function<double(const Matrix&)>;

// Central differences (f(x + h e_ij) - f(x - h e_ij)) / 2h for every entry.
Matrix finite_diff_grad(const ScalarFn& f, const Matrix& x, double h = 1e-5);

}  // namespace opml

#endif  // OPML_NUMKIT_H_
