#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "lowra/rng.hpp"

using lowra::Rng;

TEST_CASE("same seed reproduces the stream") {
  Rng a(1234), b(1234);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge") {
  Rng a(1), b(2);
  int differ = 0;
  for (int i = 0; i < 64; ++i) differ += a.next_u64() != b.next_u64();
  REQUIRE(differ > 60);
}

TEST_CASE("uniform stays in range") {
  Rng r(7);
  for (int i = 0; i < 10000; ++i) {
    const double x = r.uniform(-2.5, 3.5);
    REQUIRE(x >= -2.5);
    REQUIRE(x < 3.5);
  }
}

TEST_CASE("uniform_int covers both endpoints inclusively") {
  Rng r(99);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = r.uniform_int(3, 8);
    REQUIRE(v >= 3);
    REQUIRE(v <= 8);
    seen.insert(v);
  }
  REQUIRE(seen.size() == 6);
}

TEST_CASE("normal has the requested moments") {
  Rng r(2024);
  const int n = 200000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal(1.5, 2.0);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  REQUIRE(std::abs(mean - 1.5) < 0.02);
  REQUIRE(std::abs(std::sqrt(var) - 2.0) < 0.02);
}

TEST_CASE("shuffle permutes") {
  Rng r(5);
  std::vector<int> v(100);
  for (int i = 0; i < 100; ++i) v[i] = i;
  auto w = v;
  r.shuffle(w);
  REQUIRE(w != v);
  std::sort(w.begin(), w.end());
  REQUIRE(w == v);
}

TEST_CASE("sample_without_replacement is distinct and respects exclusion") {
  Rng r(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto idx = r.sample_without_replacement(20, 10, 13);
    REQUIRE(idx.size() == 10);
    std::set<std::size_t> s(idx.begin(), idx.end());
    REQUIRE(s.size() == 10);
    REQUIRE(s.count(13) == 0);
    for (auto i : idx) REQUIRE(i < 20);
  }
}

TEST_CASE("sample_without_replacement can use every admissible value") {
  Rng r(3);
  const auto idx = r.sample_without_replacement(5, 4, 2);
  std::set<std::size_t> s(idx.begin(), idx.end());
  REQUIRE(s == std::set<std::size_t>{0, 1, 3, 4});
}
