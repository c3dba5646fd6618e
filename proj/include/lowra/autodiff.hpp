// lowra/autodiff.hpp

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

#ifndef LOWRA_AUTODIFF_HPP
#define LOWRA_AUTODIFF_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "lowra/error.hpp"
#include "lowra/tensor.hpp"

namespace lowra {

using NodeId = std::uint32_t;

// Append-only tape of eagerly evaluated ops.  Node inputs always precede
// outputs, so reverse creation order is a valid reverse-topological order
// and the backward sweep is a single deterministic pass.  One graph per
// training step; graphs are independent and never shared across threads.
class Graph {
 public:
  struct Node {
    Tensor value;
    Tensor grad;                 // empty until touched by backward
    std::vector<NodeId> inputs;
    std::function<void(Graph&, NodeId)> backward;  // empty for leaves
    bool requires_grad = false;
    bool is_param = false;
    const char* op = "leaf";
  };

  NodeId leaf(Tensor value) {
    return push(std::move(value), {}, "leaf", nullptr, false, false);
  }

  NodeId param(Tensor value) {
    const NodeId id = push(std::move(value), {}, "param", nullptr, true, true);
    params_.push_back(id);
    return id;
  }

  // Extension point for ops with bespoke adjoints (gru, ctc).
  NodeId add_node(Tensor value, std::vector<NodeId> inputs, const char* op,
                  std::function<void(Graph&, NodeId)> backward) {
    bool rq = false;
    for (NodeId i : inputs) rq = rq || nodes_[i].requires_grad;
    return push(std::move(value), std::move(inputs), op,
                rq ? std::move(backward) : nullptr, rq, false);
  }

  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  bool requires_grad(NodeId id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<NodeId>& params() const { return params_; }

  // Gradient buffer, allocated as zeros on first touch.
  Tensor& grad(NodeId id) {
    Node& n = nodes_[id];
    if (n.grad.data.empty() && n.value.numel() > 0)
      n.grad = Tensor::zeros(n.value.shape);
    return n.grad;
  }

  const Tensor& grad_of(NodeId id) const { return nodes_[id].grad; }

  // Reverse accumulation from a scalar loss.  Re-runnable: gradients are
  // reset first, so two sweeps over the same graph are bit-identical.
  void backward(NodeId loss) {
    if (!nodes_[loss].value.is_scalar())
      fail(ErrorCode::NonScalarLoss,
           "loss has shape " + nodes_[loss].value.shape_str());
    for (auto& n : nodes_) n.grad = Tensor();
    grad(loss).data[0] = 1.0;
    for (NodeId id = loss + 1; id-- > 0;) {
      Node& n = nodes_[id];
      if (!n.requires_grad || !n.backward) continue;
      if (n.grad.data.empty()) continue;  // not on a path to the loss
      n.backward(*this, id);
    }
    // parameters untouched by the loss still report zero gradients
    for (NodeId p : params_) grad(p);
  }

  // Gradients for all flagged parameters, in registration order.
  std::vector<Tensor> param_gradients() {
    std::vector<Tensor> out;
    out.reserve(params_.size());
    for (NodeId p : params_) out.push_back(grad(p));
    return out;
  }

  // ---- elementwise ----

  NodeId add(NodeId a, NodeId b) {
    require_same_shape(value(a), value(b), "add");
    Tensor v = value(a);
    for (std::size_t i = 0; i < v.numel(); ++i) v.data[i] += value(b).data[i];
    return add_node(std::move(v), {a, b}, "add", [](Graph& g, NodeId self) {
      const Tensor& gy = g.grad_of(self);
      const auto& in = g.nodes_[self].inputs;
      for (int which = 0; which < 2; ++which)
        if (g.requires_grad(in[which])) {
          Tensor& gi = g.grad(in[which]);
          for (std::size_t i = 0; i < gy.numel(); ++i) gi.data[i] += gy.data[i];
        }
    });
  }

  NodeId sub(NodeId a, NodeId b) {
    require_same_shape(value(a), value(b), "sub");
    Tensor v = value(a);
    for (std::size_t i = 0; i < v.numel(); ++i) v.data[i] -= value(b).data[i];
    return add_node(std::move(v), {a, b}, "sub", [](Graph& g, NodeId self) {
      const Tensor& gy = g.grad_of(self);
      const auto& in = g.nodes_[self].inputs;
      if (g.requires_grad(in[0])) {
        Tensor& ga = g.grad(in[0]);
        for (std::size_t i = 0; i < gy.numel(); ++i) ga.data[i] += gy.data[i];
      }
      if (g.requires_grad(in[1])) {
        Tensor& gb = g.grad(in[1]);
        for (std::size_t i = 0; i < gy.numel(); ++i) gb.data[i] -= gy.data[i];
      }
    });
  }

  NodeId mul(NodeId a, NodeId b) {
    require_same_shape(value(a), value(b), "mul");
    Tensor v = value(a);
    for (std::size_t i = 0; i < v.numel(); ++i) v.data[i] *= value(b).data[i];
    return add_node(std::move(v), {a, b}, "mul", [](Graph& g, NodeId self) {
      const Tensor& gy = g.grad_of(self);
      const auto& in = g.nodes_[self].inputs;
      if (g.requires_grad(in[0])) {
        Tensor& ga = g.grad(in[0]);
        const Tensor& bv = g.value(in[1]);
        for (std::size_t i = 0; i < gy.numel(); ++i)
          ga.data[i] += gy.data[i] * bv.data[i];
      }
      if (g.requires_grad(in[1])) {
        Tensor& gb = g.grad(in[1]);
        const Tensor& av = g.value(in[0]);
        for (std::size_t i = 0; i < gy.numel(); ++i)
          gb.data[i] += gy.data[i] * av.data[i];
      }
    });
  }

  NodeId tanh(NodeId a) {
    Tensor v = value(a);
    for (auto& x : v.data) x = std::tanh(x);
    return add_node(std::move(v), {a}, "tanh", [](Graph& g, NodeId self) {
      const Tensor& gy = g.grad_of(self);
      const Tensor& y = g.value(self);
      Tensor& ga = g.grad(g.nodes_[self].inputs[0]);
      for (std::size_t i = 0; i < gy.numel(); ++i)
        ga.data[i] += gy.data[i] * (1.0 - y.data[i] * y.data[i]);
    });
  }

  NodeId sigmoid(NodeId a) {
    Tensor v = value(a);
    for (auto& x : v.data) x = 1.0 / (1.0 + std::exp(-x));
    return add_node(std::move(v), {a}, "sigmoid", [](Graph& g, NodeId self) {
      const Tensor& gy = g.grad_of(self);
      const Tensor& y = g.value(self);
      Tensor& ga = g.grad(g.nodes_[self].inputs[0]);
      for (std::size_t i = 0; i < gy.numel(); ++i)
        ga.data[i] += gy.data[i] * y.data[i] * (1.0 - y.data[i]);
    });
  }

  NodeId relu(NodeId a) {
    Tensor v = value(a);
    for (auto& x : v.data) x = x > 0.0 ? x : 0.0;
    return add_node(std::move(v), {a}, "relu", [](Graph& g, NodeId self) {
      const Tensor& gy = g.grad_of(self);
      const Tensor& x = g.value(g.nodes_[self].inputs[0]);
      Tensor& ga = g.grad(g.nodes_[self].inputs[0]);
      for (std::size_t i = 0; i < gy.numel(); ++i)
        if (x.data[i] > 0.0) ga.data[i] += gy.data[i];
    });
  }

  NodeId exp(NodeId a) {
    Tensor v = value(a);
    for (auto& x : v.data) x = std::exp(x);
    return add_node(std::move(v), {a}, "exp", [](Graph& g, NodeId self) {
      const Tensor& gy = g.grad_of(self);
      const Tensor& y = g.value(self);
      Tensor& ga = g.grad(g.nodes_[self].inputs[0]);
      for (std::size_t i = 0; i < gy.numel(); ++i)
        ga.data[i] += gy.data[i] * y.data[i];
    });
  }

  NodeId log(NodeId a) {
    Tensor v = value(a);
    for (auto& x : v.data) x = std::log(x);
    return add_node(std::move(v), {a}, "log", [](Graph& g, NodeId self) {
      const Tensor& gy = g.grad_of(self);
      const Tensor& x = g.value(g.nodes_[self].inputs[0]);
      Tensor& ga = g.grad(g.nodes_[self].inputs[0]);
      for (std::size_t i = 0; i < gy.numel(); ++i)
        ga.data[i] += gy.data[i] / x.data[i];
    });
  }

  NodeId scale(NodeId a, double s) {
    Tensor v = value(a);
    for (auto& x : v.data) x *= s;
    return add_node(std::move(v), {a}, "scale", [s](Graph& g, NodeId self) {
      const Tensor& gy = g.grad_of(self);
      Tensor& ga = g.grad(g.nodes_[self].inputs[0]);
      for (std::size_t i = 0; i < gy.numel(); ++i)
        ga.data[i] += s * gy.data[i];
    });
  }

  // ---- linear algebra ----

  NodeId matmul(NodeId a, NodeId b) {
    Tensor v = lowra::matmul(value(a), value(b));
    return add_node(std::move(v), {a, b}, "matmul", [](Graph& g, NodeId self) {
      const Tensor& gy = g.grad_of(self);
      const auto& in = g.nodes_[self].inputs;
      const Tensor& av = g.value(in[0]);
      const Tensor& bv = g.value(in[1]);
      const std::size_t m = av.shape[0], k = av.shape[1], n = bv.shape[1];
      if (g.requires_grad(in[0])) {
        // ga += gy * b^T
        Tensor& ga = g.grad(in[0]);
        for (std::size_t i = 0; i < m; ++i) {
          const double* gyrow = gy.row(i);
          double* garow = ga.row(i);
          for (std::size_t p = 0; p < k; ++p) {
            const double* brow = bv.row(p);
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += gyrow[j] * brow[j];
            garow[p] += acc;
          }
        }
      }
      if (g.requires_grad(in[1])) {
        // gb += a^T * gy
        Tensor& gb = g.grad(in[1]);
        for (std::size_t i = 0; i < m; ++i) {
          const double* arow = av.row(i);
          const double* gyrow = gy.row(i);
          for (std::size_t p = 0; p < k; ++p) {
            const double apv = arow[p];
            if (apv == 0.0) continue;
            double* gbrow = gb.row(p);
            for (std::size_t j = 0; j < n; ++j) gbrow[j] += apv * gyrow[j];
          }
        }
      }
    });
  }

  NodeId transpose(NodeId a) {
    Tensor v = lowra::transpose(value(a));
    return add_node(std::move(v), {a}, "transpose", [](Graph& g, NodeId self) {
      const Tensor& gy = g.grad_of(self);
      Tensor& ga = g.grad(g.nodes_[self].inputs[0]);
      const std::size_t r = gy.shape[0], c = gy.shape[1];
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
          ga.at(j, i) += gy.at(i, j);
    });
  }

  // y[i][j] = m[i][j] + v[j]
  NodeId add_rowvec(NodeId m, NodeId vec) {
    const Tensor& mv = value(m);
    const Tensor& vv = value(vec);
    if (mv.rank() != 2 || vv.numel() != mv.shape[1])
      fail(ErrorCode::ShapeMismatch,
           "add_rowvec: " + mv.shape_str() + " + " + vv.shape_str());
    Tensor v = mv;
    for (std::size_t i = 0; i < mv.shape[0]; ++i)
      for (std::size_t j = 0; j < mv.shape[1]; ++j)
        v.at(i, j) += vv.data[j];
    return add_node(std::move(v), {m, vec}, "add_rowvec",
                    [](Graph& g, NodeId self) {
      const Tensor& gy = g.grad_of(self);
      const auto& in = g.nodes_[self].inputs;
      const std::size_t r = gy.shape[0], c = gy.shape[1];
      if (g.requires_grad(in[0])) {
        Tensor& gm = g.grad(in[0]);
        for (std::size_t i = 0; i < gy.numel(); ++i)
          gm.data[i] += gy.data[i];
      }
      if (g.requires_grad(in[1])) {
        Tensor& gv = g.grad(in[1]);
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j)
            gv.data[j] += gy.at(i, j);
      }
    });
  }

  NodeId conv1d(NodeId x, NodeId w, NodeId b, std::size_t stride) {
    Tensor v = lowra::conv1d(value(x), value(w), value(b), stride);
    return add_node(std::move(v), {x, w, b}, "conv1d",
                    [stride](Graph& g, NodeId self) {
      const Tensor& gy = g.grad_of(self);
      const auto& in = g.nodes_[self].inputs;
      const Tensor& xv = g.value(in[0]);
      const Tensor& wv = g.value(in[1]);
      const std::size_t c_in = xv.shape[0];
      const std::size_t c_out = wv.shape[0], k = wv.shape[2];
      const std::size_t out_len = gy.shape[1];
      if (g.requires_grad(in[0])) {
        Tensor& gx = g.grad(in[0]);
        for (std::size_t co = 0; co < c_out; ++co) {
          const double* gyrow = gy.row(co);
          for (std::size_t ci = 0; ci < c_in; ++ci) {
            const double* wrow = &wv.data[(co * c_in + ci) * k];
            double* gxrow = gx.row(ci);
            for (std::size_t t = 0; t < out_len; ++t) {
              const double gv = gyrow[t];
              if (gv == 0.0) continue;
              double* seg = gxrow + t * stride;
              for (std::size_t j = 0; j < k; ++j) seg[j] += gv * wrow[j];
            }
          }
        }
      }
      if (g.requires_grad(in[1])) {
        Tensor& gw = g.grad(in[1]);
        for (std::size_t co = 0; co < c_out; ++co) {
          const double* gyrow = gy.row(co);
          for (std::size_t ci = 0; ci < c_in; ++ci) {
            const double* xrow = xv.row(ci);
            double* gwrow = &gw.data[(co * c_in + ci) * k];
            for (std::size_t t = 0; t < out_len; ++t) {
              const double gv = gyrow[t];
              const double* seg = xrow + t * stride;
              for (std::size_t j = 0; j < k; ++j) gwrow[j] += gv * seg[j];
            }
          }
        }
      }
      if (g.requires_grad(in[2])) {
        Tensor& gb = g.grad(in[2]);
        for (std::size_t co = 0; co < c_out; ++co) {
          const double* gyrow = gy.row(co);
          double acc = 0.0;
          for (std::size_t t = 0; t < out_len; ++t) acc += gyrow[t];
          gb.data[co] += acc;
        }
      }
    });
  }

  // ---- shape / selection ----

  NodeId reshape(NodeId a, std::vector<std::size_t> shape) {
    if (Tensor::numel_of(shape) != value(a).numel())
      fail(ErrorCode::ShapeMismatch, "reshape: numel mismatch");
    Tensor v(std::move(shape), value(a).data);
    return add_node(std::move(v), {a}, "reshape", [](Graph& g, NodeId self) {
      const Tensor& gy = g.grad_of(self);
      Tensor& ga = g.grad(g.nodes_[self].inputs[0]);
      for (std::size_t i = 0; i < gy.numel(); ++i) ga.data[i] += gy.data[i];
    });
  }

  NodeId slice_rows(NodeId a, std::size_t r0, std::size_t r1) {
    const Tensor& av = value(a);
    if (av.rank() != 2 || r0 >= r1 || r1 > av.shape[0])
      fail(ErrorCode::ShapeMismatch, "slice_rows: bad range");
    const std::size_t c = av.shape[1];
    Tensor v({r1 - r0, c});
    std::copy(av.data.begin() + r0 * c, av.data.begin() + r1 * c,
              v.data.begin());
    return add_node(std::move(v), {a}, "slice_rows",
                    [r0](Graph& g, NodeId self) {
      const Tensor& gy = g.grad_of(self);
      Tensor& ga = g.grad(g.nodes_[self].inputs[0]);
      const std::size_t c = gy.shape[1];
      for (std::size_t i = 0; i < gy.shape[0]; ++i)
        for (std::size_t j = 0; j < c; ++j)
          ga.at(r0 + i, j) += gy.at(i, j);
    });
  }

  NodeId gather_rows(NodeId a, std::vector<std::size_t> idx) {
    const Tensor& av = value(a);
    if (av.rank() != 2) fail(ErrorCode::ShapeMismatch, "gather_rows: rank != 2");
    for (std::size_t i : idx)
      if (i >= av.shape[0])
        fail(ErrorCode::ShapeMismatch, "gather_rows: index out of range");
    const std::size_t c = av.shape[1];
    Tensor v({idx.size(), c});
    for (std::size_t i = 0; i < idx.size(); ++i)
      std::copy(av.row(idx[i]), av.row(idx[i]) + c, v.row(i));
    return add_node(std::move(v), {a}, "gather_rows",
                    [idx = std::move(idx)](Graph& g, NodeId self) {
      const Tensor& gy = g.grad_of(self);
      Tensor& ga = g.grad(g.nodes_[self].inputs[0]);
      const std::size_t c = gy.shape[1];
      for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < c; ++j)
          ga.at(idx[i], j) += gy.at(i, j);
    });
  }

  NodeId select_col(NodeId a, std::size_t col) {
    const Tensor& av = value(a);
    if (av.rank() != 2 || col >= av.shape[1])
      fail(ErrorCode::ShapeMismatch, "select_col: bad column");
    Tensor v({av.shape[0], 1});
    for (std::size_t i = 0; i < av.shape[0]; ++i) v.data[i] = av.at(i, col);
    return add_node(std::move(v), {a}, "select_col",
                    [col](Graph& g, NodeId self) {
      const Tensor& gy = g.grad_of(self);
      Tensor& ga = g.grad(g.nodes_[self].inputs[0]);
      for (std::size_t i = 0; i < gy.shape[0]; ++i)
        ga.at(i, col) += gy.data[i];
    });
  }

  // column-wise concatenation of 2-D values with equal row counts
  NodeId concat_cols(const std::vector<NodeId>& parts) {
    if (parts.empty()) fail(ErrorCode::ShapeMismatch, "concat_cols: empty");
    const std::size_t r = value(parts[0]).shape[0];
    std::size_t total = 0;
    for (NodeId p : parts) {
      const Tensor& pv = value(p);
      if (pv.rank() != 2 || pv.shape[0] != r)
        fail(ErrorCode::ShapeMismatch, "concat_cols: row mismatch");
      total += pv.shape[1];
    }
    Tensor v({r, total});
    std::size_t off = 0;
    for (NodeId p : parts) {
      const Tensor& pv = value(p);
      for (std::size_t i = 0; i < r; ++i)
        std::copy(pv.row(i), pv.row(i) + pv.shape[1], v.row(i) + off);
      off += pv.shape[1];
    }
    return add_node(std::move(v), parts, "concat_cols",
                    [](Graph& g, NodeId self) {
      const Tensor& gy = g.grad_of(self);
      const auto& in = g.nodes_[self].inputs;
      std::size_t off = 0;
      for (NodeId p : in) {
        const std::size_t pc = g.value(p).shape[1];
        if (g.requires_grad(p)) {
          Tensor& gp = g.grad(p);
          for (std::size_t i = 0; i < gy.shape[0]; ++i)
            for (std::size_t j = 0; j < pc; ++j)
              gp.at(i, j) += gy.at(i, off + j);
        }
        off += pc;
      }
    });
  }

  // per-row dot product of equally shaped matrices -> (rows x 1)
  NodeId rowwise_dot(NodeId a, NodeId b) {
    require_same_shape(value(a), value(b), "rowwise_dot");
    const Tensor& av = value(a);
    const std::size_t r = av.shape[0], c = av.shape[1];
    Tensor v({r, 1});
    for (std::size_t i = 0; i < r; ++i) {
      const double* ar = av.row(i);
      const double* br = value(b).row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < c; ++j) acc += ar[j] * br[j];
      v.data[i] = acc;
    }
    return add_node(std::move(v), {a, b}, "rowwise_dot",
                    [](Graph& g, NodeId self) {
      const Tensor& gy = g.grad_of(self);
      const auto& in = g.nodes_[self].inputs;
      const Tensor& av = g.value(in[0]);
      const Tensor& bv = g.value(in[1]);
      const std::size_t r = av.shape[0], c = av.shape[1];
      if (g.requires_grad(in[0])) {
        Tensor& ga = g.grad(in[0]);
        for (std::size_t i = 0; i < r; ++i) {
          const double gv = gy.data[i];
          const double* br = bv.row(i);
          double* gar = ga.row(i);
          for (std::size_t j = 0; j < c; ++j) gar[j] += gv * br[j];
        }
      }
      if (g.requires_grad(in[1])) {
        Tensor& gb = g.grad(in[1]);
        for (std::size_t i = 0; i < r; ++i) {
          const double gv = gy.data[i];
          const double* ar = av.row(i);
          double* gbr = gb.row(i);
          for (std::size_t j = 0; j < c; ++j) gbr[j] += gv * ar[j];
        }
      }
    });
  }

  // ---- softmax / reductions ----

  // log-softmax along the last axis (rows of a 2-D value)
  NodeId log_softmax(NodeId a) {
    const Tensor& av = value(a);
    if (av.rank() != 2) fail(ErrorCode::ShapeMismatch, "log_softmax: rank != 2");
    Tensor v = av;
    const std::size_t r = av.shape[0], c = av.shape[1];
    for (std::size_t i = 0; i < r; ++i) {
      double* row = v.row(i);
      double mx = row[0];
      for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
      double sum = 0.0;
      for (std::size_t j = 0; j < c; ++j) sum += std::exp(row[j] - mx);
      const double lse = mx + std::log(sum);
      for (std::size_t j = 0; j < c; ++j) row[j] -= lse;
    }
    return add_node(std::move(v), {a}, "log_softmax",
                    [](Graph& g, NodeId self) {
      const Tensor& gy = g.grad_of(self);
      const Tensor& y = g.value(self);
      Tensor& ga = g.grad(g.nodes_[self].inputs[0]);
      const std::size_t r = y.shape[0], c = y.shape[1];
      for (std::size_t i = 0; i < r; ++i) {
        const double* gyr = gy.row(i);
        const double* yr = y.row(i);
        double gsum = 0.0;
        for (std::size_t j = 0; j < c; ++j) gsum += gyr[j];
        double* gar = ga.row(i);
        for (std::size_t j = 0; j < c; ++j)
          gar[j] += gyr[j] - std::exp(yr[j]) * gsum;
      }
    });
  }

  NodeId sum(NodeId a) {
    double acc = 0.0;
    for (double x : value(a).data) acc += x;
    return add_node(Tensor::scalar(acc), {a}, "sum",
                    [](Graph& g, NodeId self) {
      const double gv = g.grad_of(self).data[0];
      Tensor& ga = g.grad(g.nodes_[self].inputs[0]);
      for (auto& x : ga.data) x += gv;
    });
  }

  NodeId mean(NodeId a) {
    const std::size_t n = value(a).numel();
    double acc = 0.0;
    for (double x : value(a).data) acc += x;
    return add_node(Tensor::scalar(acc / static_cast<double>(n)), {a}, "mean",
                    [n](Graph& g, NodeId self) {
      const double gv = g.grad_of(self).data[0] / static_cast<double>(n);
      Tensor& ga = g.grad(g.nodes_[self].inputs[0]);
      for (auto& x : ga.data) x += gv;
    });
  }

  Node& node(NodeId id) { return nodes_[id]; }

 private:
  NodeId push(Tensor value, std::vector<NodeId> inputs, const char* op,
              std::function<void(Graph&, NodeId)> backward, bool rq,
              bool is_param) {
    Node n;
    n.value = std::move(value);
    n.inputs = std::move(inputs);
    n.backward = std::move(backward);
    n.requires_grad = rq;
    n.is_param = is_param;
    n.op = op;
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  std::vector<Node> nodes_;
  std::vector<NodeId> params_;

  friend struct GraphTestAccess;
};

}  // namespace lowra

#endif  // LOWRA_AUTODIFF_HPP
