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

#include "opml/numkit.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "opml/errors.h"

namespace opml {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (!std::isfinite(fill)) throw DomainError("Matrix: non-finite fill value");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ContractError("Matrix: " + std::to_string(data_.size()) +
                        " values for a " + std::to_string(rows_) + "x" +
                        std::to_string(cols_) + " matrix");
  }
  if (!AllFinite()) throw DomainError("Matrix: non-finite entry");
}

Matrix Matrix::Identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Matrix Matrix::Transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix MatMul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ContractError("MatMul: shape mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Matrix MatTMul(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ContractError("MatTMul: shape mismatch");
  Matrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const auto a_row = a.row(k);
    const auto b_row = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a_row[i];
      if (aki == 0.0) continue;
      auto out_row = out.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aki * b_row[j];
    }
  }
  return out;
}

std::uint64_t Rng::Next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::Uniform() {
  return static_cast<double>(Next() >> 11) * 0x1.0p-53;
}

double Rng::Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

double Rng::Gaussian() {
  const double u1 = 1.0 - Uniform();
  const double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::Poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw DomainError("Poisson: mean must be finite and non-negative");
  }
  const double limit = std::exp(-mean);
  std::size_t k = 0;
  double product = Uniform();
  while (product > limit) {
    ++k;
    product *= Uniform();
  }
  return k;
}

std::size_t rng_uniform_index(Rng& rng, std::size_t n) {
  if (n == 0) throw DomainError("rng_uniform_index: n must be >= 1");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t threshold = (0 - bound) % bound;
  std::uint64_t draw = rng.Next();
  while (draw < threshold) draw = rng.Next();
  return static_cast<std::size_t>(draw % bound);
}

double stable_log_sum(double constant, std::span<const double> terms) {
  if (!(constant >= 0.0)) {
    throw DomainError("stable_log_sum: constant must be non-negative");
  }
  if (constant == 0.0 && terms.empty()) {
    throw DomainError("stable_log_sum: log(0) with zero constant and no terms");
  }
  double shift = constant > 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  for (double t : terms) shift = std::max(shift, t);
  double acc = constant > 0.0 ? constant * std::exp(-shift) : 0.0;
  for (double t : terms) acc += std::exp(t - shift);
  return shift + std::log(acc);
}

double stable_weighted_log_sum(double constant, std::span<const double> terms,
                               std::span<const double> weights) {
  if (terms.size() != weights.size()) {
    throw ContractError("stable_weighted_log_sum: terms/weights size mismatch");
  }
  if (!(constant >= 0.0)) {
    throw DomainError("stable_weighted_log_sum: constant must be non-negative");
  }
  double shift = constant > 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  bool any_term = false;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (weights[i] < 0.0) {
      throw DomainError("stable_weighted_log_sum: negative weight");
    }
    if (weights[i] == 0.0) continue;
    any_term = true;
    shift = std::max(shift, terms[i]);
  }
  if (constant == 0.0 && !any_term) {
    throw DomainError("stable_weighted_log_sum: log(0)");
  }
  double acc = constant > 0.0 ? constant * std::exp(-shift) : 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (weights[i] == 0.0) continue;
    acc += std::exp(terms[i] - shift) * weights[i];
  }
  return shift + std::log(acc);
}

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Cholesky::Cholesky(const Matrix& spd) : lower_(spd.rows(), spd.cols()) {
  if (spd.rows() != spd.cols()) throw ContractError("Cholesky: matrix not square");
  const std::size_t n = spd.rows();
  for (std::size_t j = 0; j < n; ++j) {
    double diag = spd(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= lower_(j, k) * lower_(j, k);
    if (!(diag > 0.0) || !std::isfinite(diag)) {
      throw NumericalError("Cholesky: matrix not positive definite at pivot " +
                           std::to_string(j));
    }
    const double ljj = std::sqrt(diag);
    lower_(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = spd(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= lower_(i, k) * lower_(j, k);
      lower_(i, j) = v / ljj;
    }
  }
}

double Cholesky::LogDet() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < lower_.rows(); ++i) acc += std::log(lower_(i, i));
  return 2.0 * acc;
}

Matrix Cholesky::Solve(const Matrix& rhs) const {
  const std::size_t n = lower_.rows();
  if (rhs.rows() != n) throw ContractError("Cholesky::Solve: shape mismatch");
  Matrix x = rhs;
  for (std::size_t c = 0; c < rhs.cols(); ++c) {
    // Forward: L y = b.
    for (std::size_t i = 0; i < n; ++i) {
      double v = x(i, c);
      for (std::size_t k = 0; k < i; ++k) v -= lower_(i, k) * x(k, c);
      x(i, c) = v / lower_(i, i);
    }
    // Backward: L^T x = y.
    for (std::size_t ii = n; ii-- > 0;) {
      double v = x(ii, c);
      for (std::size_t k = ii + 1; k < n; ++k) v -= lower_(k, ii) * x(k, c);
      x(ii, c) = v / lower_(ii, ii);
    }
  }
  return x;
}

namespace {

Matrix ShiftedSymmetric(const Matrix& gram, double epsilon) {
  if (gram.rows() != gram.cols()) throw ContractError("logdet_psd: gram not square");
  const std::size_t n = gram.rows();
  Matrix shifted(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(gram(i, j) - gram(j, i)) > 1e-10) {
        throw ContractError("logdet_psd: gram not symmetric at (" +
                            std::to_string(i) + "," + std::to_string(j) + ")");
      }
      shifted(i, j) = 0.5 * (gram(i, j) + gram(j, i));
    }
    shifted(i, i) += epsilon;
  }
  return shifted;
}

}  // namespace

double logdet_psd(const Matrix& gram, double epsilon) {
  if (!(epsilon >= 0.0)) throw DomainError("logdet_psd: epsilon must be >= 0");
  return Cholesky(ShiftedSymmetric(gram, epsilon)).LogDet();
}

Matrix finite_diff_grad(const ScalarFn& f, const Matrix& x, double h) {
  if (!(h > 0.0)) throw DomainError("finite_diff_grad: h must be positive");
  Matrix grad(x.rows(), x.cols());
  Matrix probe = x;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double orig = x(i, j);
      probe(i, j) = orig + h;
      const double up = f(probe);
      probe(i, j) = orig - h;
      const double down = f(probe);
      probe(i, j) = orig;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw NumericalError("finite_diff_grad: non-finite value probing entry (" +
                             std::to_string(i) + "," + std::to_string(j) + ")");
      }
      grad(i, j) = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

}  // namespace opml
