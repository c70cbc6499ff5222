#include <doctest.h>

#include <cmath>
#include <random>

#include "dimlab/error.hpp"
#include "dimlab/measures.hpp"
#include "oracles.hpp"

using namespace dimlab;

TEST_CASE("entropy") {
  CHECK(MeasureSpec::bernoulli({0.5, 0.5}).entropy() == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(MeasureSpec::dirac(0).entropy() == 0.0);
  CHECK(MeasureSpec::bernoulli({0.9, 0.1}).entropy() == doctest::Approx(0.3250829734).epsilon(1e-9));
  // chain entropy: sum_i pi_i H(P_i) with pi the left eigenvector
  const double a = 0.1, b = 0.4;
  const double pi0 = b / (a + b);
  const double h = pi0 * oracle::binary_entropy(a) + (1 - pi0) * oracle::binary_entropy(b);
  auto mk = MeasureSpec::markov({{1 - a, a}, {b, 1 - b}});
  CHECK(mk.entropy() == doctest::Approx(h).epsilon(1e-13));
  auto st = std::get<Markov>(mk.variant()).stationary;
  CHECK(st[0] == doctest::Approx(pi0).epsilon(1e-12));
}

TEST_CASE("entropy bounds on random specs") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> p{u(rng), u(rng), u(rng)};
    double s = p[0] + p[1] + p[2];
    for (auto& x : p) x /= s;
    double h = MeasureSpec::bernoulli(p).entropy();
    CHECK(h >= 0.0);
    CHECK(h <= std::log(3.0) + 1e-15);
  }
}

TEST_CASE("invalid specs") {
  CHECK_THROWS_AS(MeasureSpec::bernoulli({0.6, 0.6}), Error);
  CHECK_THROWS_AS(MeasureSpec::bernoulli({1.2, -0.2}), Error);
  CHECK_THROWS_AS(MeasureSpec::markov({{0.5, 0.5}, {0.2, 0.7}}), Error);
}

TEST_CASE("Lyapunov exponents") {
  auto mt = IntervalMap::middle_thirds();
  auto c24 = IntervalMap::linear({2.0, 4.0}, {0.0, 0.75});
  auto man = IntervalMap::manneville(1.0);
  CHECK(lyapunov(MeasureSpec::bernoulli({0.3, 0.7}), mt) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
  CHECK(lyapunov(MeasureSpec::dirac(0), man) == 0.0);
  const double p = 0.618034;
  CHECK(lyapunov(MeasureSpec::bernoulli({p, 1 - p}), c24) ==
        doctest::Approx(p * std::log(2.0) + (1 - p) * std::log(4.0)).epsilon(1e-14));
  // quadrature depth does not matter for affine branches
  for (int d : {2, 8, 14}) {
    CHECK(lyapunov(MeasureSpec::bernoulli({p, 1 - p}), c24, d) ==
          doctest::Approx(p * std::log(2.0) + (1 - p) * std::log(4.0)).epsilon(1e-14));
  }
}

TEST_CASE("Manneville Lyapunov exponent against Monte Carlo") {
  // points pi(w) for random words through the quadratic formula
  std::mt19937_64 rng(11);
  const int samples = 200000;
  double sum = 0.0, sq = 0.0;
  for (int s = 0; s < samples; ++s) {
    std::vector<int> w(60);
    for (auto& c : w) c = static_cast<int>(rng() & 1);
    double x = oracle::manneville_point(w, 0.5);
    double v = std::log(1 + 2 * x);
    sum += v;
    sq += v * v;
  }
  const double mean = sum / samples;
  const double se = std::sqrt((sq / samples - mean * mean) / samples);
  double lam = lyapunov(MeasureSpec::bernoulli({0.5, 0.5}), IntervalMap::manneville(1.0));
  CHECK(std::fabs(lam - mean) < 4 * se + 1e-4);
}

TEST_CASE("moments") {
  auto dbl = IntervalMap::doubling();
  auto leb = moments(MeasureSpec::bernoulli({0.5, 0.5}), dbl);
  for (int j = 1; j <= 32; ++j) CHECK(leb.m[static_cast<std::size_t>(j - 1)] == doctest::Approx(1.0 / (j + 1)).epsilon(1e-13));
  // Cantor measure: mean 1/2, variance 1/8
  auto cantor = moments(MeasureSpec::bernoulli({0.5, 0.5}), IntervalMap::middle_thirds());
  CHECK(cantor.m[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(cantor.m[1] == doctest::Approx(0.375).epsilon(1e-14));
  auto d0 = moments(MeasureSpec::dirac(0), dbl);
  for (double v : d0.m) CHECK(v == 0.0);
  auto d1 = moments(MeasureSpec::dirac(1), dbl);
  for (double v : d1.m) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("metric values") {
  auto dbl = IntervalMap::doubling();
  auto leb = MeasureSpec::bernoulli({0.5, 0.5});
  CHECK(metric_d(leb, leb, dbl).value == 0.0);
  auto d01 = metric_d(MeasureSpec::dirac(0), MeasureSpec::dirac(1), dbl).value;
  CHECK(d01 >= 1.0 - std::ldexp(1.0, 1 - 32));
  CHECK(d01 <= 1.0);
  double partial = 0.0;
  for (int j = 1; j <= 32; ++j) partial += std::ldexp(1.0, -j) / (j + 1);
  CHECK(metric_d(lebesgue_moments(32), moments(MeasureSpec::dirac(0), dbl)).value == doctest::Approx(partial).epsilon(1e-14));
  CHECK(std::fabs(partial - (2 * std::log(2.0) - 1)) < 1e-10);
}

TEST_CASE("metric is a pseudometric on random triples") {
  auto man = IntervalMap::manneville(1.0);
  MeasureEvaluator eval(man, 12, 32);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  for (int t = 0; t < 100; ++t) {
    double p = u(rng), q = u(rng), r = u(rng);
    auto ma = eval.moments(MeasureSpec::bernoulli({p, 1 - p}));
    auto mb = eval.moments(MeasureSpec::markov({{q, 1 - q}, {r, 1 - r}}));
    auto mc = eval.moments(MeasureSpec::bernoulli({r, 1 - r}));
    double ab = metric_d(ma, mb).value, ba = metric_d(mb, ma).value;
    double bc = metric_d(mb, mc).value, ac = metric_d(ma, mc).value;
    CHECK(ab == ba);
    CHECK(ac <= ab + bc + 1e-12);
    CHECK(ab >= 0.0);
  }
}

TEST_CASE("level constraint checks") {
  auto dbl = IntervalMap::doubling();
  auto leb = lebesgue_moments(32);
  std::mt19937_64 rng(1);
  int passed = 0;
  for (int t = 0; t < 100; ++t) {
    // orbit of a point with uniform binary digits: the digits shifted
    std::vector<int> digits(65536 + 60);
    for (auto& d : digits) d = static_cast<int>(rng() & 1);
    std::vector<double> orbit(65536);
    for (std::size_t j = 0; j < orbit.size(); ++j) {
      double x = 0.0;
      for (int i = 59; i >= 0; --i) x = 0.5 * (x + digits[j + static_cast<std::size_t>(i)]);
      orbit[j] = x;
    }
    passed += level_constraint_check(orbit, leb, 3, 0.02).all();
  }
  CHECK(passed == 100);
  auto man = IntervalMap::manneville(1.0);
  MeasureEvaluator eval(man);
  CHECK(level_constraint_check(man, 0.0, 100, eval.moments(MeasureSpec::dirac(0)), 5, 1e-9).all());
  CHECK_FALSE(level_constraint_check(dbl, 0.0, 100, leb, 1, 0.1).all());
}

TEST_CASE("parabolic simplex and separation") {
  auto man = IntervalMap::manneville(1.0);
  MeasureEvaluator eval(man);
  auto simplex = parabolic_simplex(man);
  REQUIRE(simplex.points.size() == 1);
  CHECK(simplex.points[0] == 0.0);
  auto mu = MeasureSpec::bernoulli({0.5, 0.5});
  auto sep = separation_gamma(mu, 8, simplex, eval);
  CHECK(sep.gamma == doctest::Approx(metric_d(eval.moments(mu), eval.moments(MeasureSpec::dirac(0))).value).epsilon(1e-12));
  CHECK(sep.gamma > 0.0);
  CHECK_THROWS_AS(separation_gamma(MeasureSpec::dirac(0), 8, simplex, eval), Error);
}

TEST_CASE("separation on a segment of parabolic measures") {
  std::vector<BranchSpec> bs(2);
  bs[0].kind = bs[1].kind = BranchKind::Polynomial;
  bs[0].lo = 0.0;
  bs[0].hi = 0.5;
  bs[0].params = {0.0, 1.0, 2.0};
  bs[1].lo = 0.5;
  bs[1].hi = 1.0;
  bs[1].params = {-2.0, 5.0, -2.0};
  IntervalMap twin(bs, "twin");
  MeasureEvaluator eval(twin, 12, 32);
  auto simplex = parabolic_simplex(twin);
  REQUIRE(simplex.points.size() == 2);
  auto mu = MeasureSpec::bernoulli({0.3, 0.7});
  auto sep = separation_gamma(mu, 8, simplex, eval, 1e-3);
  // exhaustive grid over t delta_0 + (1 - t) delta_1
  auto mv = eval.moments(mu);
  double best = 1e9;
  for (int i = 0; i <= 10000; ++i) {
    double t = i * 1e-4, acc = 0.0;
    for (int j = 1; j <= 32; ++j) acc += std::ldexp(1.0, -j) * std::fabs(mv.m[static_cast<std::size_t>(j - 1)] - (1 - t));
    best = std::min(best, acc);
  }
  CHECK(std::fabs(sep.gamma - best) <= 1e-3);
}

TEST_CASE("sampling follows the symbol law") {
  auto mu = MeasureSpec::bernoulli({0.7, 0.3});
  std::mt19937_64 rng(9);
  Word w;
  mu.sample(rng, 100000, w);
  double ones = 0;
  for (auto c : w) ones += c;
  CHECK(ones / 100000 == doctest::Approx(0.3).epsilon(0.02));
  auto lp = mu.prefix_log_probs(parse_word("0110"));
  CHECK(lp.back() == doctest::Approx(2 * std::log(0.7) + 2 * std::log(0.3)).epsilon(1e-14));
  CHECK(mu.word_log_prob(parse_word("0110")) == doctest::Approx(lp.back()).epsilon(1e-15));
}
