#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "vlab/grid.hpp"

using namespace vlab;
using namespace vlab::testing;

TEST_CASE("interval construction") {
  const GridDomain a = make_interval(0, 3, 0.01);
  CHECK(a.cell_count() == 300);
  CHECK(a.measure() == doctest::Approx(3.0).epsilon(1e-15));

  const GridDomain b = make_interval(0, 1, 1);
  CHECK(b.cell_count() == 1);
  CHECK(b.center(0)[0] == 0.5);

  const GridDomain c = make_interval(2, 3, 0.25);
  REQUIRE(c.cell_count() == 4);
  const double expected[] = {2.125, 2.375, 2.625, 2.875};
  for (std::size_t i = 0; i < 4; ++i) CHECK(c.center(i)[0] == expected[i]);
}

TEST_CASE("box construction") {
  CHECK(make_box({0, 0}, {1, 1}, 0.5).cell_count() == 4);
  CHECK(make_box({0, 0}, {1, 1}, 0.5).measure() == 1.0);
  CHECK(make_box({0, 0}, {2, 1}, 1).cell_count() == 2);
  CHECK(make_box({0, 0}, {1, 1}, 0.1).cell_count() == 100);
}

TEST_CASE("invalid domains are rejected") {
  CHECK_THROWS_AS(make_interval(1, 0, 0.1), GridError);
  CHECK_THROWS_AS(make_interval(0, 1, 0), GridError);
  CHECK_THROWS_AS(make_interval(0, 1, -1), GridError);
  CHECK_THROWS_AS(make_interval(0, INFINITY, 1), GridError);
  CHECK_THROWS_AS(make_interval(0, 0.1, 1), GridError);
}

TEST_CASE("tail and ball restriction") {
  const GridDomain d = make_interval(0, 10, 1);
  const GridDomain t = tail_restrict(d, 5);
  REQUIRE(t.cell_count() == 5);
  for (std::size_t k = 0; k < 5; ++k) CHECK(t.center(t.cells()[k])[0] == 5.5 + static_cast<double>(k));
  CHECK(tail_restrict(d, 0) == d);
  CHECK(tail_restrict(d, 100).empty());
  CHECK(measure(tail_restrict(d, 100)) == 0.0);
  CHECK_THROWS_AS(tail_restrict(d, -1), GridError);

  double last = 1e300;
  for (double r = 0; r < 12; r += 0.5) {
    const double m = measure(tail_restrict(d, r));
    CHECK(m <= last);
    last = m;
    CHECK(measure(ball_restrict(d, r)) + m == doctest::Approx(d.measure()));
  }
}

TEST_CASE("2D tail uses the Euclidean norm") {
  const GridDomain d = make_box({-2, -2}, {2, 2}, 1);
  const GridDomain t = tail_restrict(d, 1);
  // Centers (+-0.5, +-0.5) have norm ~0.707; the other 12 are beyond 1.
  CHECK(t.cell_count() == 12);
}

TEST_CASE("level sets") {
  const auto d = interval(0, 1, 0.5);
  const GridFunction p = function("2 - 1/(1+x^2)", d);
  CHECK(p[0] == doctest::Approx(2 - 1 / 1.0625));
  const GridDomain low = restrict_mask(p, [](double v) { return v <= 1.5; });
  CHECK(low.cell_count() == 2);
  CHECK(restrict_mask(p, [](double) { return false; }).measure() == 0.0);

  const GridFunction q = function("2 - 1/(1+x^2)", d);
  const GridDomain strict = restrict_mask(*d, [&](std::size_t c) { return p.at_box(c) < q.at_box(c); });
  CHECK(strict.empty());
}

TEST_CASE("serialization round trip") {
  const GridDomain d = make_box({-1.25, 0.1}, {3.75, 2.1}, 0.25);
  const GridDomain masked = restrict_mask(d, [&](std::size_t c) { return (c * 7) % 5 < 2; });
  for (const GridDomain* g : {&d, &masked}) {
    const GridDomain back = parse_domain(serialize(*g));
    CHECK(back == *g);
    CHECK(back.origin() == g->origin());
    CHECK(back.h() == g->h());
  }
  const GridDomain line = tail_restrict(make_interval(-3, 3, 0.1), 1.7);
  CHECK(parse_domain(serialize(line)) == line);
  CHECK_THROWS_AS(parse_domain("grid-domain 1\ndim 3\n"), GridError);
}

TEST_CASE("exponent fields require values >= 1") {
  const auto d = interval(0, 1, 0.25);
  CHECK_THROWS_AS(exponent("0.5 + x", d), GridError);
  CHECK_NOTHROW(exponent("1 + x", d));
}

TEST_CASE("truncation schedules") {
  const auto s = TruncationSchedule::geometric(3, 4);
  REQUIRE(s.radii.size() == 5);
  CHECK(s.radii.back() == 48);
  TruncationSchedule bad{{1, 2, 2}};
  CHECK_THROWS_AS(bad.validate(), GridError);
  CHECK_THROWS_AS(TruncationSchedule{}.validate(), GridError);
}
