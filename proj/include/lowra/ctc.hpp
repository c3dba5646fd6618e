// lowra/ctc.hpp

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

#ifndef LOWRA_CTC_HPP
#define LOWRA_CTC_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "lowra/autodiff.hpp"
#include "lowra/error.hpp"
#include "lowra/tensor.hpp"

namespace lowra {

inline constexpr int kCtcBlank = 0;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct CtcInput {
  Tensor log_probs;          // (T x V), rows are log-softmax outputs
  std::vector<int> targets;  // label ids in [1, V-1]
};

namespace detail {

inline double logadd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = a > b ? a : b;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// blank-interleaved extended labels: blank, l1, blank, l2, ..., blank
inline std::vector<int> extend_targets(const std::vector<int>& targets) {
  std::vector<int> ext(2 * targets.size() + 1, kCtcBlank);
  for (std::size_t i = 0; i < targets.size(); ++i) ext[2 * i + 1] = targets[i];
  return ext;
}

}  // namespace detail

// shortest feasible frame count: one slot per label plus a separating
// blank between adjacent duplicates
inline std::size_t min_ctc_len(const std::vector<int>& targets) {
  std::size_t dups = 0;
  for (std::size_t i = 1; i < targets.size(); ++i)
    if (targets[i] == targets[i - 1]) ++dups;
  return targets.size() + dups;
}

inline void validate_ctc_input(const CtcInput& in, bool check_length = true) {
  if (in.log_probs.rank() != 2 || in.log_probs.shape[0] < 1 ||
      in.log_probs.shape[1] < 2)
    fail(ErrorCode::ShapeMismatch,
         "ctc: log_probs must be (T x V) with V >= 2, got " +
             in.log_probs.shape_str());
  const auto v = static_cast<int>(in.log_probs.shape[1]);
  for (const int t : in.targets) {
    if (t == kCtcBlank)
      fail(ErrorCode::BlankInTargets, "ctc: blank id in targets");
    if (t < 0 || t >= v)
      fail(ErrorCode::ShapeMismatch,
           "ctc: target id " + std::to_string(t) + " outside [1, " +
               std::to_string(v - 1) + "]");
  }
  for (std::size_t t = 0; t < in.log_probs.shape[0]; ++t) {
    double s = 0.0;
    const double* row = in.log_probs.row(t);
    for (int j = 0; j < v; ++j) s += std::exp(row[j]);
    if (std::abs(s - 1.0) > 1e-9)
      fail(ErrorCode::ShapeMismatch,
           "ctc: row " + std::to_string(t) + " exp-sums to " +
               std::to_string(s));
  }
  if (check_length && in.log_probs.shape[0] < min_ctc_len(in.targets))
    fail(ErrorCode::InfeasibleLength,
         "ctc: " + std::to_string(in.log_probs.shape[0]) +
             " frames cannot carry " + std::to_string(in.targets.size()) +
             " labels (need " + std::to_string(min_ctc_len(in.targets)) + ")");
}

namespace detail {

// log-domain forward lattice; alphas is (T x S) with S = 2L+1
inline double ctc_alphas(const Tensor& lp, const std::vector<int>& ext,
                         Tensor& alphas) {
  const std::size_t t_len = lp.shape[0], s_len = ext.size();
  alphas = Tensor::full({t_len, s_len}, kNegInf);
  alphas.at(0, 0) = lp.at(0, ext[0]);
  if (s_len > 1) alphas.at(0, 1) = lp.at(0, ext[1]);
  for (std::size_t t = 1; t < t_len; ++t)
    for (std::size_t s = 0; s < s_len; ++s) {
      double a = alphas.at(t - 1, s);
      if (s >= 1) a = logadd(a, alphas.at(t - 1, s - 1));
      if (s >= 2 && ext[s] != kCtcBlank && ext[s] != ext[s - 2])
        a = logadd(a, alphas.at(t - 1, s - 2));
      alphas.at(t, s) = a == kNegInf ? kNegInf : a + lp.at(t, ext[s]);
    }
  double log_p = alphas.at(t_len - 1, s_len - 1);
  if (s_len >= 2) log_p = logadd(log_p, alphas.at(t_len - 1, s_len - 2));
  return log_p;
}

// companion lattice such that logsumexp_s(alpha[t][s] + beta[t][s])
// equals log p(targets) for every t
inline void ctc_betas(const Tensor& lp, const std::vector<int>& ext,
                      Tensor& betas) {
  const std::size_t t_len = lp.shape[0], s_len = ext.size();
  betas = Tensor::full({t_len, s_len}, kNegInf);
  betas.at(t_len - 1, s_len - 1) = 0.0;
  if (s_len >= 2) betas.at(t_len - 1, s_len - 2) = 0.0;
  for (std::size_t t = t_len - 1; t-- > 0;)
    for (std::size_t s = 0; s < s_len; ++s) {
      double b = betas.at(t + 1, s) + lp.at(t + 1, ext[s]);
      if (s + 1 < s_len)
        b = logadd(b, betas.at(t + 1, s + 1) + lp.at(t + 1, ext[s + 1]));
      if (s + 2 < s_len && ext[s + 2] != kCtcBlank && ext[s + 2] != ext[s])
        b = logadd(b, betas.at(t + 1, s + 2) + lp.at(t + 1, ext[s + 2]));
      betas.at(t, s) = b;
    }
}

}  // namespace detail

// negative log-likelihood, forward algorithm in log space
inline double ctc_nll(const CtcInput& in) {
  validate_ctc_input(in);
  const auto ext = detail::extend_targets(in.targets);
  Tensor alphas;
  return -detail::ctc_alphas(in.log_probs, ext, alphas);
}

// Graph op over a log-prob node.  Gradient wrt log p_t(k) is the
// negated state posterior: -exp(logsumexp_{s: ext_s=k}(a_t(s)+b_t(s)) - logP).
inline NodeId ctc_loss(Graph& g, NodeId logp_node,
                       const std::vector<int>& targets) {
  const CtcInput in{g.value(logp_node), targets};
  validate_ctc_input(in);
  auto ext = std::make_shared<std::vector<int>>(detail::extend_targets(targets));
  auto alphas = std::make_shared<Tensor>();
  const double log_p = detail::ctc_alphas(in.log_probs, *ext, *alphas);
  return g.add_node(
      Tensor::scalar(-log_p), {logp_node}, "ctc_loss",
      [ext, alphas, log_p](Graph& g, NodeId self) {
        const NodeId lp_node = g.node(self).inputs[0];
        const Tensor& lp = g.value(lp_node);
        const double gy = g.grad_of(self).data[0];
        Tensor betas;
        detail::ctc_betas(lp, *ext, betas);
        const std::size_t t_len = lp.shape[0], v = lp.shape[1];
        Tensor post = Tensor::full({t_len, v}, kNegInf);
        for (std::size_t t = 0; t < t_len; ++t)
          for (std::size_t s = 0; s < ext->size(); ++s) {
            const int k = (*ext)[s];
            post.at(t, k) = detail::logadd(
                post.at(t, k), alphas->at(t, s) + betas.at(t, s));
          }
        Tensor& grad = g.grad(lp_node);
        for (std::size_t t = 0; t < t_len; ++t)
          for (std::size_t k = 0; k < v; ++k)
            if (post.at(t, k) != kNegInf)
              grad.at(t, k) -= gy * std::exp(post.at(t, k) - log_p);
      });
}

// Exhaustive testing oracle: enumerate every alignment, collapse
// repeats, strip blanks, and sum the probabilities of matches.
inline double ctc_brute_force(const CtcInput& in) {
  validate_ctc_input(in, /*check_length=*/false);
  const std::size_t t_len = in.log_probs.shape[0], v = in.log_probs.shape[1];
  double combos = 1.0;
  for (std::size_t t = 0; t < t_len; ++t) {
    combos *= static_cast<double>(v);
    if (combos > 1e7)
      fail(ErrorCode::TooLarge, "ctc_brute_force: V^T exceeds 1e7");
  }
  std::vector<std::size_t> align(t_len, 0);
  std::vector<int> collapsed;
  double log_total = kNegInf;
  for (;;) {
    collapsed.clear();
    int prev = -1;
    double lp = 0.0;
    for (std::size_t t = 0; t < t_len; ++t) {
      const int a = static_cast<int>(align[t]);
      lp += in.log_probs.at(t, a);
      if (a != prev && a != kCtcBlank) collapsed.push_back(a);
      prev = a;
    }
    if (collapsed == in.targets) log_total = detail::logadd(log_total, lp);
    std::size_t pos = 0;
    while (pos < t_len && ++align[pos] == v) align[pos++] = 0;
    if (pos == t_len) break;
  }
  return -log_total;
}

}  // namespace lowra

#endif  // LOWRA_CTC_HPP
