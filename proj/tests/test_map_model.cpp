#include <doctest.h>

#include <cmath>

#include "dimlab/error.hpp"
#include "dimlab/map_model.hpp"
#include "oracles.hpp"

using namespace dimlab;

TEST_CASE("evaluation and derivatives") {
  auto man = IntervalMap::manneville(1.0);
  auto dbl = IntervalMap::doubling();
  CHECK(man.eval(0.5) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(dbl.eval(0.3) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(man.eval(0.8) == doctest::Approx(0.44).epsilon(1e-14));
  CHECK(man.derivative(0.0) == 1.0);
  CHECK(man.derivative(1.0) == doctest::Approx(3.0));
  CHECK(dbl.derivative(0.77) == 2.0);
}

TEST_CASE("inverse branches") {
  auto man = IntervalMap::manneville(1.0);
  CHECK(IntervalMap::doubling().inverse(0, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(std::fabs(man.inverse(0, 1.0) - 0.6180339887498949) < 1e-13);
  CHECK(man.inverse(0, 0.0) == 0.0);
  for (int a = 0; a < 2; ++a) {
    double prev = -1.0;
    for (int i = 0; i <= 1000; ++i) {
      const double y = i * 1e-3;
      const double x = man.inverse(a, y);
      CHECK(std::fabs(x - oracle::manneville_inverse(a, y)) < 1e-13);
      CHECK(std::fabs(man.branch(a).value(x) - y) <= 2 * kDefaultInverseTol + 1e-15);
      CHECK(x > prev);
      prev = x;
    }
  }
}

TEST_CASE("breakpoints come from the branch formula") {
  auto man = IntervalMap::manneville(1.0);
  CHECK(std::fabs(man.branch(0).hi - oracle::golden()) < 1e-14);
  CHECK(man.branch(1).lo == man.branch(0).hi);
  // shared endpoint goes to the branch starting there
  CHECK(man.branch_of(man.branch(1).lo) == 1);
  CHECK(IntervalMap::doubling().branch_of(0.5) == 1);
}

TEST_CASE("fixed points") {
  auto fp = find_fixed_points(IntervalMap::manneville(1.0));
  REQUIRE(fp.size() == 2);
  CHECK(fp[0].x == 0.0);
  CHECK(fp[0].parabolic);
  CHECK(std::fabs(fp[1].x - 1.0) < 1e-12);
  CHECK_FALSE(fp[1].parabolic);
  for (const auto& map : {IntervalMap::doubling(), IntervalMap::middle_thirds()}) {
    auto f = find_fixed_points(map);
    REQUIRE(f.size() == 2);
    CHECK(f[0].x == 0.0);
    CHECK(std::fabs(f[1].x - 1.0) < 1e-12);
    CHECK_FALSE(f[0].parabolic);
    CHECK_FALSE(f[1].parabolic);
  }
  for (const auto& p : fp) CHECK(p.parabolic == (std::fabs(std::fabs(p.derivative) - 1.0) <= kParabolicTol));
}

TEST_CASE("two parabolic fixed points") {
  std::vector<BranchSpec> bs(2);
  bs[0].kind = bs[1].kind = BranchKind::Polynomial;
  bs[0].lo = 0.0;
  bs[0].hi = 0.5;
  bs[0].params = {0.0, 1.0, 2.0};
  bs[1].lo = 0.5;
  bs[1].hi = 1.0;
  bs[1].params = {-2.0, 5.0, -2.0};
  IntervalMap map(bs, "twin");
  int parabolic = 0;
  for (const auto& f : map.fixed_points()) parabolic += f.parabolic;
  CHECK(parabolic == 2);
  CHECK(map.eval(0.25) == doctest::Approx(0.375));
}

TEST_CASE("invalid maps are rejected") {
  auto bad = [](std::vector<double> slopes, std::vector<double> left) {
    try {
      IntervalMap::linear(slopes, left);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::Io;
  };
  CHECK(bad({2.0, 2.0}, {0.0, 0.4}) == Errc::InvalidArgument);  // overlap
  CHECK(bad({1.0, 2.0}, {0.0, 0.5}) == Errc::InvalidArgument);  // not expanding
  CHECK(bad({2.0, 2.0}, {0.0, 0.6}) == Errc::InvalidArgument);  // second branch leaves [0,1]
  CHECK_THROWS_AS(IntervalMap::manneville(-1.0), Error);
}

TEST_CASE("maps with gaps") {
  auto m = IntervalMap::middle_thirds();
  CHECK(m.has_gaps());
  CHECK(m.is_linear());
  CHECK_FALSE(IntervalMap::manneville(1.0).is_linear());
  try {
    m.eval(0.5);
    FAIL("gap point evaluated");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::OutOfDomain);
  }
}
