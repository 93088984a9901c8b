#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "avsi/rng.hpp"

using avsi::Rng;
using avsi::seed_combine;

TEST_CASE("same seed reproduces the stream exactly") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge") {
  Rng a(1), b(2);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += (a.next_u64() == b.next_u64());
  CHECK(same == 0);
}

TEST_CASE("uniform stays in [0,1) with sane first and second moments") {
  Rng r(7);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sumsq += u * u;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
  CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.03));
}

TEST_CASE("uniform(lo,hi) respects its bounds") {
  Rng r(9);
  for (int i = 0; i < 10000; ++i) {
    const double v = r.uniform(-3.0, 5.0);
    REQUIRE(v >= -3.0);
    REQUIRE(v < 5.0);
  }
}

TEST_CASE("uniform_int is inclusive and covers the whole range") {
  Rng r(11);
  std::set<int64_t> seen;
  for (int i = 0; i < 5000; ++i) {
    const int64_t v = r.uniform_int(3, 10);
    REQUIRE(v >= 3);
    REQUIRE(v <= 10);
    seen.insert(v);
  }
  CHECK(seen.size() == 8);
  for (int i = 0; i < 100; ++i) CHECK(r.uniform_int(5, 5) == 5);
}

TEST_CASE("normal matches requested moments") {
  Rng r(13);
  const int n = 400000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = r.normal(900.0, 300.0);
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sumsq / n - mean * mean);
  CHECK(mean == doctest::Approx(900.0).epsilon(0.005));
  CHECK(sd == doctest::Approx(300.0).epsilon(0.01));
}

TEST_CASE("shuffle permutes and is seed-deterministic") {
  std::vector<int> base(100);
  for (int i = 0; i < 100; ++i) base[static_cast<size_t>(i)] = i;

  std::vector<int> a = base, b = base;
  Rng ra(5), rb(5);
  ra.shuffle(a);
  rb.shuffle(b);
  CHECK(a == b);
  CHECK(a != base);  // 1/100! chance of false alarm

  std::vector<int> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == base);
}

TEST_CASE("seed_combine separates tags and indices") {
  std::set<uint64_t> seen;
  seen.insert(seed_combine(1, "train"));
  seen.insert(seed_combine(1, "val"));
  seen.insert(seed_combine(1, "test"));
  seen.insert(seed_combine(2, "train"));
  for (uint64_t i = 0; i < 100; ++i) seen.insert(seed_combine(1, i));
  CHECK(seen.size() == 104);

  CHECK(seed_combine(1, "x") == seed_combine(1, "x"));
}
