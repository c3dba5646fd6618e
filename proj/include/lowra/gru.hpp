// lowra/gru.hpp

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

#ifndef LOWRA_GRU_HPP
#define LOWRA_GRU_HPP

#include <array>
#include <cmath>
#include <memory>

#include "lowra/autodiff.hpp"
#include "lowra/tensor.hpp"

namespace lowra {

// Single GRU layer over a (T x D) sequence, zero initial state:
//   z_t = sigmoid(x_t Wz + h_{t-1} Uz + bz)
//   r_t = sigmoid(x_t Wr + h_{t-1} Ur + br)
//   hc_t = tanh(x_t Wh + (r_t . h_{t-1}) Uh + bh)
//   h_t = (1 - z_t) . h_{t-1} + z_t . hc_t

struct GruWeights {
  const Tensor* wz;  // (D x H)
  const Tensor* wr;
  const Tensor* wh;
  const Tensor* uz;  // (H x H)
  const Tensor* ur;
  const Tensor* uh;
  const Tensor* bz;  // (H)
  const Tensor* br;
  const Tensor* bh;
};

struct GruCache {
  Tensor z, r, hc, h;  // (T x H) each
};

inline Tensor gru_forward(const Tensor& x, const GruWeights& w,
                          GruCache* cache = nullptr) {
  if (x.rank() != 2) fail(ErrorCode::ShapeMismatch, "gru: input rank != 2");
  const std::size_t t_len = x.shape[0], d = x.shape[1];
  const std::size_t h_dim = w.wz->shape[1];
  if (w.wz->shape[0] != d || w.uz->shape[0] != h_dim ||
      w.uz->shape[1] != h_dim || w.bz->numel() != h_dim)
    fail(ErrorCode::ShapeMismatch, "gru: weight shapes");

  // input projections for the whole sequence at once
  const Tensor pz = matmul(x, *w.wz);
  const Tensor pr = matmul(x, *w.wr);
  const Tensor ph = matmul(x, *w.wh);

  Tensor out({t_len, h_dim});
  GruCache local;
  GruCache& c = cache ? *cache : local;
  c.z = Tensor({t_len, h_dim});
  c.r = Tensor({t_len, h_dim});
  c.hc = Tensor({t_len, h_dim});

  std::vector<double> h_prev(h_dim, 0.0);
  std::vector<double> az(h_dim), ar(h_dim), ah(h_dim), rh(h_dim);
  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t j = 0; j < h_dim; ++j) {
      az[j] = pz.at(t, j) + w.bz->data[j];
      ar[j] = pr.at(t, j) + w.br->data[j];
      ah[j] = ph.at(t, j) + w.bh->data[j];
    }
    matmul_accum(h_prev.data(), w.uz->data.data(), az.data(), 1, h_dim, h_dim);
    matmul_accum(h_prev.data(), w.ur->data.data(), ar.data(), 1, h_dim, h_dim);
    double* zr = c.z.row(t);
    double* rr = c.r.row(t);
    for (std::size_t j = 0; j < h_dim; ++j) {
      zr[j] = 1.0 / (1.0 + std::exp(-az[j]));
      rr[j] = 1.0 / (1.0 + std::exp(-ar[j]));
      rh[j] = rr[j] * h_prev[j];
    }
    matmul_accum(rh.data(), w.uh->data.data(), ah.data(), 1, h_dim, h_dim);
    double* hcr = c.hc.row(t);
    double* hr = out.row(t);
    for (std::size_t j = 0; j < h_dim; ++j) {
      hcr[j] = std::tanh(ah[j]);
      hr[j] = (1.0 - zr[j]) * h_prev[j] + zr[j] * hcr[j];
      h_prev[j] = hr[j];
    }
  }
  c.h = out;
  return out;
}

struct GruGradRefs {
  Tensor* gx = nullptr;
  Tensor* gwz = nullptr;
  Tensor* gwr = nullptr;
  Tensor* gwh = nullptr;
  Tensor* guz = nullptr;
  Tensor* gur = nullptr;
  Tensor* guh = nullptr;
  Tensor* gbz = nullptr;
  Tensor* gbr = nullptr;
  Tensor* gbh = nullptr;
};

// Accumulates BPTT gradients of sum(gy . output) into the provided buffers.
inline void gru_backward(const Tensor& x, const GruWeights& w,
                         const GruCache& c, const Tensor& gy,
                         const GruGradRefs& out) {
  const std::size_t t_len = x.shape[0], d = x.shape[1];
  const std::size_t h_dim = w.wz->shape[1];

  Tensor daz({t_len, h_dim}), dar({t_len, h_dim}), dah({t_len, h_dim});
  std::vector<double> dh(h_dim, 0.0), dh_new(h_dim), drh(h_dim);

  for (std::size_t t = t_len; t-- > 0;) {
    const double* h_prev = t > 0 ? c.h.row(t - 1) : nullptr;
    const double* zr = c.z.row(t);
    const double* rr = c.r.row(t);
    const double* hcr = c.hc.row(t);
    const double* gyr = gy.row(t);
    double* dazr = daz.row(t);
    double* darr = dar.row(t);
    double* dahr = dah.row(t);
    for (std::size_t j = 0; j < h_dim; ++j) {
      const double hp = h_prev ? h_prev[j] : 0.0;
      const double a = gyr[j] + dh[j];
      const double dz = a * (hcr[j] - hp);
      const double dhc = a * zr[j];
      dh_new[j] = a * (1.0 - zr[j]);
      dahr[j] = dhc * (1.0 - hcr[j] * hcr[j]);
      dazr[j] = dz * zr[j] * (1.0 - zr[j]);
    }
    // drh = dah * Uh^T, then split into r and h_prev parts
    for (std::size_t i = 0; i < h_dim; ++i) {
      const double* uhrow = w.uh->row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < h_dim; ++j) acc += dahr[j] * uhrow[j];
      drh[i] = acc;
    }
    for (std::size_t j = 0; j < h_dim; ++j) {
      const double hp = h_prev ? h_prev[j] : 0.0;
      const double dr = drh[j] * hp;
      dh_new[j] += drh[j] * rr[j];
      darr[j] = dr * rr[j] * (1.0 - rr[j]);
    }
    for (std::size_t i = 0; i < h_dim; ++i) {
      const double* uzrow = w.uz->row(i);
      const double* urrow = w.ur->row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < h_dim; ++j)
        acc += dazr[j] * uzrow[j] + darr[j] * urrow[j];
      dh_new[i] += acc;
    }
    std::swap(dh, dh_new);
  }

  // batched parameter and input gradients
  if (out.gwz) matmul_accum_tn(x.data.data(), daz.data.data(),
                               out.gwz->data.data(), t_len, d, h_dim);
  if (out.gwr) matmul_accum_tn(x.data.data(), dar.data.data(),
                               out.gwr->data.data(), t_len, d, h_dim);
  if (out.gwh) matmul_accum_tn(x.data.data(), dah.data.data(),
                               out.gwh->data.data(), t_len, d, h_dim);
  if (out.guz || out.gur || out.guh) {
    Tensor h_shift({t_len, h_dim});  // row t = h_{t-1}, row 0 = 0
    for (std::size_t t = 1; t < t_len; ++t)
      std::copy(c.h.row(t - 1), c.h.row(t - 1) + h_dim, h_shift.row(t));
    if (out.guz) matmul_accum_tn(h_shift.data.data(), daz.data.data(),
                                 out.guz->data.data(), t_len, h_dim, h_dim);
    if (out.gur) matmul_accum_tn(h_shift.data.data(), dar.data.data(),
                                 out.gur->data.data(), t_len, h_dim, h_dim);
    if (out.guh) {
      for (std::size_t i = 0; i < h_shift.numel(); ++i)
        h_shift.data[i] *= c.r.data[i];
      matmul_accum_tn(h_shift.data.data(), dah.data.data(),
                      out.guh->data.data(), t_len, h_dim, h_dim);
    }
  }
  for (std::size_t t = 0; t < t_len; ++t) {
    if (out.gbz)
      for (std::size_t j = 0; j < h_dim; ++j)
        out.gbz->data[j] += daz.at(t, j);
    if (out.gbr)
      for (std::size_t j = 0; j < h_dim; ++j)
        out.gbr->data[j] += dar.at(t, j);
    if (out.gbh)
      for (std::size_t j = 0; j < h_dim; ++j)
        out.gbh->data[j] += dah.at(t, j);
  }
  if (out.gx) {
    matmul_accum_nt(daz.data.data(), w.wz->data.data(), out.gx->data.data(),
                    t_len, h_dim, d);
    matmul_accum_nt(dar.data.data(), w.wr->data.data(), out.gx->data.data(),
                    t_len, h_dim, d);
    matmul_accum_nt(dah.data.data(), w.wh->data.data(), out.gx->data.data(),
                    t_len, h_dim, d);
  }
}

// weight node order: wz wr wh uz ur uh bz br bh
using GruParamIds = std::array<NodeId, 9>;

inline GruWeights gru_weights_from(Graph& g, const GruParamIds& p) {
  return GruWeights{&g.value(p[0]), &g.value(p[1]), &g.value(p[2]),
                    &g.value(p[3]), &g.value(p[4]), &g.value(p[5]),
                    &g.value(p[6]), &g.value(p[7]), &g.value(p[8])};
}

// Fused graph op; forward matches gru_forward exactly.
inline NodeId gru(Graph& g, NodeId x, const GruParamIds& p) {
  auto cache = std::make_shared<GruCache>();
  const GruWeights w = gru_weights_from(g, p);
  Tensor y = gru_forward(g.value(x), w, cache.get());
  std::vector<NodeId> inputs{x};
  inputs.insert(inputs.end(), p.begin(), p.end());
  return g.add_node(std::move(y), std::move(inputs), "gru",
                    [cache](Graph& g, NodeId self) {
    const auto& in = g.node(self).inputs;
    const GruWeights w =
        gru_weights_from(g, {in[1], in[2], in[3], in[4], in[5], in[6], in[7],
                             in[8], in[9]});
    GruGradRefs refs;
    refs.gx = g.requires_grad(in[0]) ? &g.grad(in[0]) : nullptr;
    Tensor** slots[] = {&refs.gwz, &refs.gwr, &refs.gwh, &refs.guz, &refs.gur,
                        &refs.guh, &refs.gbz, &refs.gbr, &refs.gbh};
    for (int i = 0; i < 9; ++i)
      if (g.requires_grad(in[1 + i])) *slots[i] = &g.grad(in[1 + i]);
    gru_backward(g.value(in[0]), w, *cache, g.grad_of(self), refs);
  });
}

}  // namespace lowra

#endif  // LOWRA_GRU_HPP
