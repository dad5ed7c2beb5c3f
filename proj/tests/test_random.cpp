#include "ekisel/random.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

using namespace ekisel;

TEST_CASE("splitmix64 reproduces the reference stream from seed 0") {
  // First outputs of the published splitmix64 reference implementation.
  std::uint64_t state = 0;
  CHECK(splitmix64(state) == 0xE220A8397B1DCDAFull);
  CHECK(splitmix64(state) == 0x6E789E6AA1B965F4ull);
  CHECK(splitmix64(state) == 0x06C45D188009454Full);
}

TEST_CASE("derive_seed separates paths and is reproducible") {
  const std::uint64_t a = derive_seed(1, {0, 0, 0});
  CHECK(a == derive_seed(1, {0, 0, 0}));
  CHECK(a != derive_seed(1, {0, 0, 1}));
  CHECK(a != derive_seed(1, {0, 1, 0}));
  CHECK(a != derive_seed(1, {1, 0, 0}));
  CHECK(a != derive_seed(2, {0, 0, 0}));

  // Path components are positional, not just accumulated.
  CHECK(derive_seed(7, {1, 2}) != derive_seed(7, {2, 1}));

  // A modest fan-out produces no collisions.
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 64; ++i)
    for (std::uint64_t p = 0; p < 4; ++p) seen.insert(derive_seed(42, {i, p}));
  CHECK(seen.size() == 64 * 4);
}

TEST_CASE("Rng streams are deterministic per seed") {
  Rng a(12345), b(12345), c(54321);
  bool all_equal = true;
  bool any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t va = a.next_u64();
    all_equal = all_equal && va == b.next_u64();
    any_diff = any_diff || va != c.next_u64();
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("uniform01 lands in [0,1) with mean near one half") {
  Rng rng(2026);
  double sum = 0.0;
  bool in_range = true;
  const int n = 10'000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform01();
    in_range = in_range && x >= 0.0 && x < 1.0;
    sum += x;
  }
  CHECK(in_range);
  CHECK(std::abs(sum / n - 0.5) < 0.02);  // sd of the mean ~ 0.003
}

TEST_CASE("bounded draws are in range and roughly uniform") {
  Rng rng(7);
  std::vector<int> hist(6, 0);
  for (int i = 0; i < 6000; ++i) {
    const std::uint64_t k = rng.bounded(6);
    REQUIRE(k < 6);
    ++hist[static_cast<int>(k)];
  }
  // Expected 1000 per bucket, sd ~ 29; allow 5 sigma.
  for (int count : hist) CHECK(std::abs(count - 1000) < 150);

  bool always_zero = true;
  for (int i = 0; i < 50; ++i) always_zero = always_zero && rng.bounded(1) == 0;
  CHECK(always_zero);
}

TEST_CASE("normal draws match the standard moments") {
  Rng rng(99);
  const int n = 20'000;
  double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum2 += x * x;
    sum4 += x * x * x * x;
  }
  CHECK(std::abs(sum / n) < 0.03);         // sd ~ 0.007
  CHECK(std::abs(sum2 / n - 1.0) < 0.05);  // sd ~ 0.010
  CHECK(std::abs(sum4 / n - 3.0) < 0.30);  // excess-kurtosis check
}

TEST_CASE("gaussian_matrix fills column by column in stream order") {
  Rng a(5), b(5);
  const Matrix m = a.gaussian_matrix(3, 2);
  const Vector v = b.gaussian_vector(6);
  for (int col = 0, k = 0; col < 2; ++col)
    for (int row = 0; row < 3; ++row, ++k) CHECK(m(row, col) == v[k]);
}

TEST_CASE("sample_without_replacement returns sorted distinct indices") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto idx = rng.sample_without_replacement(20, 7);
    REQUIRE(idx.size() == 7);
    CHECK(std::is_sorted(idx.begin(), idx.end()));
    for (std::size_t i = 1; i < idx.size(); ++i) CHECK(idx[i] != idx[i - 1]);
    CHECK(idx.front() >= 0);
    CHECK(idx.back() < 20);
  }
  const auto all = rng.sample_without_replacement(5, 5);
  CHECK(all == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("haar_orthogonal produces orthogonal matrices with uniform column mass") {
  Rng rng(321);
  const int n = 6;
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix q = haar_orthogonal(n, rng);
    CHECK((q.transpose() * q - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <
          1e-12);
  }

  // Haar invariance gives E[Q_ij^2] = 1/n for every entry.
  Rng stat_rng(17);
  const int trials = 3000;
  double sum_sq = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const Matrix q = haar_orthogonal(4, stat_rng);
    sum_sq += q(0, 0) * q(0, 0);
  }
  CHECK(std::abs(sum_sq / trials - 0.25) < 0.03);

  Rng seeded_a(88), seeded_b(88);
  CHECK((haar_orthogonal(5, seeded_a) - haar_orthogonal(5, seeded_b)).norm() ==
        0.0);
}
