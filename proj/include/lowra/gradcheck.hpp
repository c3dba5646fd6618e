// lowra/gradcheck.hpp

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

#ifndef LOWRA_GRADCHECK_HPP
#define LOWRA_GRADCHECK_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "lowra/autodiff.hpp"
#include "lowra/tensor.hpp"

namespace lowra {

// Builds a scalar loss from parameter nodes.  Called repeatedly with
// perturbed parameter values, so any internal randomness must be
// reseeded identically on every call.
using LossBuilder =
    std::function<NodeId(Graph&, const std::vector<NodeId>&)>;

struct GradCheckEntry {
  std::size_t param;       // parameter index
  std::size_t coord;       // flat coordinate within the parameter
  double analytic;
  double numeric;
  double rel_err;
};

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::size_t n_checked = 0;
  bool pass = true;
  GradCheckEntry worst{};
};

// Central-difference gradient check over every coordinate of every
// parameter.  rel = |ad - fd| / max(1e-8, |ad| + |fd|), pass iff the
// maximum over all coordinates stays below tol.
inline GradCheckResult check_gradients(const std::vector<Tensor>& params,
                                       const LossBuilder& build,
                                       double eps = 1e-5,
                                       double tol = 1e-4) {
  const auto eval = [&](const std::vector<Tensor>& theta) {
    Graph g;
    std::vector<NodeId> ids;
    ids.reserve(theta.size());
    for (const Tensor& t : theta) ids.push_back(g.param(t));
    const NodeId loss = build(g, ids);
    return g.value(loss).data[0];
  };

  // analytic gradients from one backward pass
  std::vector<Tensor> analytic;
  {
    Graph g;
    std::vector<NodeId> ids;
    ids.reserve(params.size());
    for (const Tensor& t : params) ids.push_back(g.param(t));
    const NodeId loss = build(g, ids);
    g.backward(loss);
    analytic = g.param_gradients();
  }

  GradCheckResult out;
  std::vector<Tensor> theta = params;
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t i = 0; i < params[p].numel(); ++i) {
      const double orig = theta[p].data[i];
      theta[p].data[i] = orig + eps;
      const double f_plus = eval(theta);
      theta[p].data[i] = orig - eps;
      const double f_minus = eval(theta);
      theta[p].data[i] = orig;
      const double fd = (f_plus - f_minus) / (2.0 * eps);
      const double ad = analytic[p].data[i];
      const double rel =
          std::abs(ad - fd) / std::max(1e-8, std::abs(ad) + std::abs(fd));
      ++out.n_checked;
      if (rel > out.max_rel_err) {
        out.max_rel_err = rel;
        out.worst = {p, i, ad, fd, rel};
      }
    }
  }
  out.pass = out.max_rel_err < tol;
  return out;
}

}  // namespace lowra

#endif  // LOWRA_GRADCHECK_HPP
