#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "lowra/autodiff.hpp"
#include "lowra/optim.hpp"
#include "lowra/tensor.hpp"

using lowra::adam_step;
using lowra::AdamState;
using lowra::Graph;
using lowra::Tensor;

TEST_CASE("zero gradient leaves parameters untouched") {
  Tensor theta({3}, {1.0, -2.0, 0.5});
  const auto before = theta.data;
  std::vector<Tensor*> params{&theta};
  AdamState st;
  for (int i = 0; i < 5; ++i) adam_step(params, {Tensor::zeros({3})}, st);
  REQUIRE(theta.data == before);
  REQUIRE(st.t == 5);
}

TEST_CASE("first step moves each coordinate by about lr in the gradient direction") {
  Tensor theta({4}, {0.0, 0.0, 0.0, 0.0});
  std::vector<Tensor*> params{&theta};
  AdamState st;
  st.lr = 1e-3;
  adam_step(params, {Tensor({4}, {2.0, -0.5, 1e-3, -7.0})}, st);
  for (int i = 0; i < 4; ++i) {
    const double sign = i % 2 == 0 ? 1.0 : -1.0;
    REQUIRE(theta.data[i] * sign < 0.0);  // moved against the gradient
    REQUIRE(std::abs(std::abs(theta.data[i]) - st.lr) < 1e-5);
  }
}

TEST_CASE("identical inputs give identical updates") {
  Tensor a({2, 2}, {1, 2, 3, 4}), b = a;
  const Tensor g({2, 2}, {0.1, -0.2, 0.3, -0.4});
  std::vector<Tensor*> pa{&a}, pb{&b};
  AdamState sa, sb;
  for (int i = 0; i < 10; ++i) {
    adam_step(pa, {g}, sa);
    adam_step(pb, {g}, sb);
  }
  REQUIRE(a.data == b.data);
  REQUIRE(sa.m[0].data == sb.m[0].data);
  REQUIRE(sa.v[0].data == sb.v[0].data);
}

TEST_CASE("mismatched shapes are rejected") {
  Tensor theta({3});
  std::vector<Tensor*> params{&theta};
  AdamState st;
  try {
    adam_step(params, {Tensor::zeros({4})}, st);
    FAIL("expected ShapeMismatch");
  } catch (const lowra::Error& e) {
    REQUIRE(e.code() == lowra::ErrorCode::ShapeMismatch);
  }
}

TEST_CASE("adam drives a quadratic to its minimum") {
  Tensor theta = Tensor::scalar(-4.0);
  const Tensor target = Tensor::scalar(3.0);
  std::vector<Tensor*> params{&theta};
  AdamState st;
  st.lr = 0.05;
  for (int i = 0; i < 2000; ++i) {
    Graph g;
    const auto t = g.param(theta);
    const auto diff = g.sub(t, g.leaf(target));
    const auto loss = g.sum(g.mul(diff, diff));
    g.backward(loss);
    adam_step(params, g.param_gradients(), st);
  }
  REQUIRE(std::abs(theta.data[0] - 3.0) < 1e-2);
}
