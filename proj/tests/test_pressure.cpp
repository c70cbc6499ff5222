#include <doctest.h>

#include <cmath>

#include "dimlab/error.hpp"
#include "dimlab/pressure.hpp"
#include "oracles.hpp"

using namespace dimlab;

namespace {

IntervalMap cantor24() { return IntervalMap::linear({2.0, 4.0}, {0.0, 0.75}); }

const double kCantor24Dim = oracle::similarity_dimension({0.5, 0.25});
const double kMiddleThirdsDim = std::log(2.0) / std::log(3.0);

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Io;
}

}  // namespace

TEST_CASE("closed-form similarity dimension") {
  // u + u^2 = 1 with u = 2^-s
  const double u = std::pow(2.0, -kCantor24Dim);
  CHECK(u + u * u == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(kCantor24Dim == doctest::Approx(0.694242).epsilon(1e-6));
}

TEST_CASE("filter validation") {
  GoodCylinderFilter f{1, {0.5}, true, 0.1, 0.2};
  CHECK(code_of([&] { f.validate(); }) == Errc::InvalidArgument);
  f.eps = 0.05;
  f.validate();
  f.alpha.clear();
  CHECK(code_of([&] { f.validate(); }) == Errc::InvalidArgument);
}

TEST_CASE("selection on the doubling map") {
  auto dbl = IntervalMap::doubling();
  GoodCylinderFilter all{0, {}, true, 0.5, 0.1};
  CHECK(select_good(dbl, all, 5).count == 32);

  GoodCylinderFilter mean{1, {0.5}, true, 0.1, 0.05};
  // brute force: dyadic witnesses have exact orbits under doubling
  const int n = 10;
  std::uint64_t expected = 0;
  for (std::uint64_t k = 0; k < 1024; ++k) {
    bool pass = false;
    for (double x0 : {k / 1024.0, (k + 0.5) / 1024.0}) {
      double x = x0, acc = 0.0;
      for (int j = 0; j < n; ++j) {
        acc += x;
        x = x < 0.5 ? 2 * x : 2 * x - 1;
      }
      pass |= std::fabs(acc / n - 0.5) < 0.05;
    }
    expected += pass;
  }
  auto sel = select_good(dbl, mean, n, true, 2);
  CHECK(sel.count == expected);
  CHECK(sel.words.size() == expected);
  CHECK(std::is_sorted(sel.words.begin(), sel.words.end()));
}

TEST_CASE("selection excludes the parabolic cylinder") {
  auto man = IntervalMap::manneville(1.0);
  GoodCylinderFilter f{0, {}, true, 0.6, 0.05};
  auto sel = select_good(man, f, 8, true);
  Word zeros(8, 0);
  CHECK(std::find(sel.words.begin(), sel.words.end(), zeros) == sel.words.end());
  // both witnesses of 0^8 fail: the left end is the fixed point, the other
  // is S_0^8(1/2)
  std::vector<int> w(8, 0);
  double x = oracle::manneville_point(w), acc = 0.0;
  for (int j = 0; j < 8; ++j) {
    acc += std::log(1 + 2 * x);
    x = x + x * x;
  }
  CHECK(acc / 8 < 0.55);
  CHECK(sel.count < 256);
}

TEST_CASE("pressure sums on affine maps") {
  auto dbl = IntervalMap::doubling();
  for (double s : {0.0, 0.5, 1.0, 1.5}) {
    auto e = pressure_sums(dbl, GoodCylinderFilter::unconstrained(), s, 8, 16);
    CHECK(e.rate == doctest::Approx((1 - s) * std::log(2.0)).epsilon(1e-12));
  }
  auto mt = pressure_sums(IntervalMap::middle_thirds(), GoodCylinderFilter::unconstrained(), kMiddleThirdsDim, 8, 16);
  CHECK(std::fabs(mt.rate) < 1e-10);
  auto c = pressure_sums(cantor24(), GoodCylinderFilter::unconstrained(), kCantor24Dim, 8, 16);
  CHECK(std::fabs(c.rate) < 1e-6);
  for (const auto& map : {dbl, IntervalMap::middle_thirds(), cantor24()}) {
    for (double s : {0.3, 0.9}) {
      auto e = pressure_sums(map, GoodCylinderFilter::unconstrained(), s, 4, 14);
      for (std::size_t i = 0; i < e.log_sums_diam.size(); ++i) {
        CHECK(std::fabs(e.log_sums_diam[i] - e.log_sums_sup[i]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("rate decreases in s") {
  GoodCylinderFilter mean{1, {0.5}, true, 0.1, 0.05};
  std::vector<std::pair<IntervalMap, GoodCylinderFilter>> cases{
      {IntervalMap::doubling(), mean},
      {IntervalMap::manneville(1.0), GoodCylinderFilter::unconstrained()},
      {IntervalMap::manneville(1.0), GoodCylinderFilter{0, {}, true, 0.6, 0.05}},
      {cantor24(), GoodCylinderFilter::unconstrained()}};
  for (const auto& [map, f] : cases) {
    PressureTable table(map, f, 8, 14, false);
    double prev = table.estimate(0.0).rate;
    for (int i = 1; i <= 20; ++i) {
      double r = table.estimate(0.1 * i).rate;
      CHECK(r < prev);
      prev = r;
    }
  }
}

TEST_CASE("diam and sup rates approach each other on the Manneville map") {
  auto man = IntervalMap::manneville(1.0);
  double prev = 1e9;
  for (int n_max : {10, 13, 16}) {
    PressureTable t(man, GoodCylinderFilter::unconstrained(), n_max - 4, n_max, false);
    auto e = t.estimate(0.5);
    double gap = std::fabs(e.rate - e.rate_sup);
    CHECK(gap < prev);
    prev = gap;
  }
}

TEST_CASE("Bowen roots") {
  BowenOptions bo;
  bo.n_max = 16;
  auto mt = bowen_root(IntervalMap::middle_thirds(), GoodCylinderFilter::unconstrained(), bo);
  CHECK(std::fabs(mt.s - kMiddleThirdsDim) < 1e-3);
  auto c = bowen_root(cantor24(), GoodCylinderFilter::unconstrained(), bo);
  CHECK(std::fabs(c.s - kCantor24Dim) < 1e-3);
  CHECK(c.bracket_lo <= c.s);
  CHECK(c.s <= c.bracket_hi);
  GoodCylinderFilter thin{1, {0.999}, true, 0.1, 0.01};
  auto code = code_of([&] { bowen_root(IntervalMap::doubling(), thin, bo); });
  CHECK((code == Errc::NoBracket || code == Errc::EmptySelection));
}

TEST_CASE("extrapolation and fits") {
  CHECK(extrapolate_to_zero({0.1, 0.2, 0.3}, {2.3, 2.6, 2.9}) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(extrapolate_to_zero({0.1, 0.2, 0.3}, {1.01, 1.04, 1.09}) == doctest::Approx(1.0).epsilon(1e-13));
  auto fit = least_squares({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(fit.stderr_slope == doctest::Approx(0.0));
}

TEST_CASE("block measures from selections") {
  auto dbl = IntervalMap::doubling();
  auto uni = n_bernoulli_from_selection(dbl, GoodCylinderFilter::unconstrained(), 1.0, 8);
  CHECK(uni.entropy_step == doctest::Approx(std::log(2.0)).epsilon(1e-13));
  CHECK(uni.lyapunov_step == doctest::Approx(std::log(2.0)).epsilon(1e-13));

  auto eq = n_bernoulli_from_selection(cantor24(), GoodCylinderFilter::unconstrained(), kCantor24Dim, 10,
                                       BlockWeighting::Diam);
  CHECK(std::fabs(eq.entropy_step / eq.lyapunov_step - kCantor24Dim) < 1e-3);

  auto single = n_bernoulli_measure(4, {parse_word("0101")}, {1.0});
  CHECK(single.entropy() == 0.0);
}

TEST_CASE("entropy identity of block measures") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const int n = 3 + t % 5;
    std::vector<Word> words;
    std::vector<double> w;
    double total = 0.0;
    for (int i = 0; i < 6; ++i) {
      Word x;
      for (int j = 0; j < n; ++j) x.push_back(static_cast<Symbol>(rng() & 1));
      if (std::find(words.begin(), words.end(), x) != words.end()) continue;
      words.push_back(x);
      w.push_back(1.0 + static_cast<double>(rng() % 100));
      total += w.back();
    }
    double h = 0.0;
    for (auto& v : w) {
      v /= total;
      h -= v * std::log(v);
    }
    auto mu = n_bernoulli_measure(n, words, w);
    CHECK(std::fabs(mu.entropy() - h / n) <= 1e-12);
  }
}

TEST_CASE("variational optimizer") {
  MeasureEvaluator c24(cantor24());
  SupRatioOptions so;
  auto r = sup_dim_ratio(c24, so);
  CHECK(std::fabs(r.s_sup - kCantor24Dim) < 1e-3);
  CHECK(std::fabs(r.params[0] - std::pow(0.5, kCantor24Dim)) < 1e-3);
  CHECK(std::fabs(r.params[1] - std::pow(0.25, kCantor24Dim)) < 1e-3);

  MeasureEvaluator mt(IntervalMap::middle_thirds());
  auto m = sup_dim_ratio(mt, so);
  CHECK(std::fabs(m.s_sup - kMiddleThirdsDim) < 1e-3);
  CHECK(std::fabs(m.params[0] - 0.5) < 1e-3);

  MeasureEvaluator dbl(IntervalMap::doubling());
  so.ball = ConstraintBall{MeasureSpec::bernoulli({0.5, 0.5}), 0.0};
  auto d = sup_dim_ratio(dbl, so);
  CHECK(d.s_sup == doctest::Approx(1.0).epsilon(1e-12));

  // a ball away from the optimum keeps the result inside the ball
  so.ball = ConstraintBall{MeasureSpec::bernoulli({0.9, 0.1}), 0.02};
  auto b = sup_dim_ratio(c24, so);
  CHECK(b.ball_distance <= 0.02 + 1e-12);
  CHECK(b.s_sup < r.s_sup);

  so.ball.reset();
  so.lyapunov_floor = 10.0;
  CHECK(code_of([&] { sup_dim_ratio(c24, so); }) == Errc::Infeasible);
}

TEST_CASE("Markov family contains the Bernoulli optimum") {
  MeasureEvaluator c24(cantor24());
  SupRatioOptions so;
  so.order = 2;
  so.restarts = 6;
  auto r = sup_dim_ratio(c24, so);
  CHECK(r.s_sup <= kCantor24Dim + 1e-6);
  CHECK(std::fabs(r.s_sup - kCantor24Dim) < 2e-3);
}

TEST_CASE("optimizer is deterministic across thread counts") {
  MeasureEvaluator man(IntervalMap::manneville(1.0), 12);
  SupRatioOptions so;
  so.restarts = 5;
  so.threads = 1;
  auto a = sup_dim_ratio(man, so);
  so.threads = 3;
  auto b = sup_dim_ratio(man, so);
  CHECK(a.s_sup == b.s_sup);
  CHECK(a.params == b.params);
}
