#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "vlab/exact_sum.hpp"

using vlab::ExactSum;

TEST_CASE("exact sum recovers cancelled terms") {
  ExactSum s;
  s.add(1e100);
  s.add(1.0);
  s.sub(1e100);
  CHECK(s.value() == 1.0);

  ExactSum t;
  t.add(0.1);
  t.add(0.2);
  t.sub(0.3);
  // The three doubles sum exactly to 2^-55.
  CHECK(t.value() == std::ldexp(1.0, -55));
}

TEST_CASE("value is order independent and correctly rounded") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mant(-1, 1);
  std::uniform_int_distribution<int> ex(-60, 60);
  std::vector<double> xs(5000);
  for (double& x : xs) x = std::ldexp(mant(rng), ex(rng));
  ExactSum a, b;
  for (double x : xs) a.add(x);
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) b.add(*it);
  CHECK(a == b);
  CHECK(a.value() == b.value());

  // Two terms: the exact sum is the correctly rounded a + b.
  for (int i = 0; i < 1000; ++i) {
    const double x = xs[i], y = xs[i + 1];
    ExactSum s;
    s.add(x);
    s.add(y);
    CHECK(s.value() == x + y);
  }
}

TEST_CASE("prefix differences equal direct window sums") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 100);
  std::vector<double> xs(200);
  for (double& x : xs) x = u(rng);
  std::vector<ExactSum> prefix(xs.size() + 1);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    prefix[i + 1] = prefix[i];
    prefix[i + 1].add(xs[i]);
  }
  for (std::size_t a = 0; a < xs.size(); a += 7) {
    for (std::size_t b = a + 1; b <= xs.size(); b += 5) {
      ExactSum direct;
      for (std::size_t i = a; i < b; ++i) direct.add(xs[i]);
      CHECK((prefix[b] - prefix[a]) == direct);
    }
  }
}

TEST_CASE("extreme magnitudes and signs") {
  const double tiny = std::numeric_limits<double>::denorm_min();
  const double big = std::numeric_limits<double>::max();
  ExactSum s;
  s.add(tiny);
  s.add(tiny);
  CHECK(s.value() == 2 * tiny);
  s.add(big);
  CHECK(s.value() == big);
  s.add(big);
  CHECK(std::isinf(s.value()));
  s.sub(big);
  s.sub(big);
  CHECK(s.value() == 2 * tiny);
  CHECK(s.sign() == 1);

  ExactSum n;
  n.sub(3.5);
  CHECK(n.value() == -3.5);
  CHECK(n.sign() == -1);
  CHECK(ExactSum{}.is_zero());
}

TEST_CASE("many additions survive deferred carries") {
  ExactSum s;
  for (int i = 0; i < 3000000; ++i) s.add(0.75);
  CHECK(s.value() == 2250000.0);
}
