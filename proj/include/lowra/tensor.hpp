// lowra/tensor.hpp

// Copyright 2026  The lowra authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LOWRA_TENSOR_HPP
#define LOWRA_TENSOR_HPP

#include <cstddef>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "lowra/error.hpp"
#include "lowra/rng.hpp"

namespace lowra {

// Dense row-major tensor of doubles.  Value type: copy/move freely.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
    data.assign(numel_of(shape), 0.0);
  }

  Tensor(std::vector<std::size_t> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != numel_of(shape))
      fail(ErrorCode::ShapeMismatch, "data length does not match shape " + shape_str());
  }

  static std::size_t numel_of(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
  }

  static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }

  static Tensor full(std::vector<std::size_t> s, double v) {
    Tensor t(std::move(s));
    for (auto& x : t.data) x = v;
    return t;
  }

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  // U(-a, a)
  static Tensor uniform(std::vector<std::size_t> s, double a, Rng& rng) {
    Tensor t(std::move(s));
    for (auto& x : t.data) x = rng.uniform(-a, a);
    return t;
  }

  std::size_t numel() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  bool is_scalar() const { return numel() == 1; }

  // 2-D accessors (rows x cols)
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }
  double* row(std::size_t r) { return data.data() + r * cols(); }
  const double* row(std::size_t r) const { return data.data() + r * cols(); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  std::string shape_str() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape.size(); ++i)
      os << (i ? "," : "") << shape[i];
    os << ")";
    return os.str();
  }
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b))
    fail(ErrorCode::ShapeMismatch, std::string(op) + ": " + a.shape_str() +
                                       " vs " + b.shape_str());
}

// ---- plain kernels, shared by the autodiff ops and inference paths ----

// c = a * b for a (m x k), b (k x n); accumulates over k in ikj order
inline void matmul_accum(const double* a, const double* b, double* c,
                         std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// c += a^T * b for a (k x m), b (k x n), c (m x n)
inline void matmul_accum_tn(const double* a, const double* b, double* c,
                            std::size_t k, std::size_t m, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a + p * m;
    const double* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// c += a * b^T for a (m x k), b (n x k), c (m x n)
inline void matmul_accum_nt(const double* a, const double* b, double* c,
                            std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] += acc;
    }
  }
}

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.shape[1] != b.shape[0])
    fail(ErrorCode::ShapeMismatch,
         "matmul: " + a.shape_str() + " x " + b.shape_str());
  Tensor c({a.shape[0], b.shape[1]});
  matmul_accum(a.data.data(), b.data.data(), c.data.data(), a.shape[0],
               a.shape[1], b.shape[1]);
  return c;
}

inline Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) fail(ErrorCode::ShapeMismatch, "transpose: rank != 2");
  Tensor t({a.shape[1], a.shape[0]});
  for (std::size_t i = 0; i < a.shape[0]; ++i)
    for (std::size_t j = 0; j < a.shape[1]; ++j)
      t.at(j, i) = a.at(i, j);
  return t;
}

// valid-padding strided 1-D convolution.
// input (c_in x len), weight (c_out x c_in x k), bias (c_out) -> (c_out x out_len)
inline std::size_t conv1d_out_len(std::size_t len, std::size_t k, std::size_t stride) {
  return (len - k) / stride + 1;
}

inline Tensor conv1d(const Tensor& input, const Tensor& weight,
                     const Tensor& bias, std::size_t stride) {
  if (input.rank() != 2 || weight.rank() != 3 || weight.shape[1] != input.shape[0])
    fail(ErrorCode::ShapeMismatch,
         "conv1d: input " + input.shape_str() + " weight " + weight.shape_str());
  const std::size_t c_in = input.shape[0], len = input.shape[1];
  const std::size_t c_out = weight.shape[0], k = weight.shape[2];
  if (bias.numel() != c_out)
    fail(ErrorCode::ShapeMismatch, "conv1d: bias " + bias.shape_str());
  if (len < k) fail(ErrorCode::TooShort, "conv1d: input shorter than kernel");
  const std::size_t out_len = conv1d_out_len(len, k, stride);
  Tensor out({c_out, out_len});
  for (std::size_t co = 0; co < c_out; ++co) {
    double* orow = out.row(co);
    for (std::size_t t = 0; t < out_len; ++t) orow[t] = bias.data[co];
    for (std::size_t ci = 0; ci < c_in; ++ci) {
      const double* irow = input.row(ci);
      const double* w = &weight.data[(co * c_in + ci) * k];
      for (std::size_t t = 0; t < out_len; ++t) {
        const double* seg = irow + t * stride;
        double acc = 0.0;
        for (std::size_t j = 0; j < k; ++j) acc += w[j] * seg[j];
        orow[t] += acc;
      }
    }
  }
  return out;
}

}  // namespace lowra

#endif  // LOWRA_TENSOR_HPP
