#include <doctest.h>

#include <cmath>
#include <numeric>

#include "dimlab/error.hpp"
#include "dimlab/estimators.hpp"
#include "dimlab/moran.hpp"
#include "oracles.hpp"

using namespace dimlab;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Io;
}

IntervalMap cantor24() { return IntervalMap::linear({2.0, 4.0}, {0.0, 0.75}); }

// Two children per interval with ratios a and b, equal weights.
MoranScheme two_ratio_scheme(int levels, double a, double b) {
  MoranScheme s;
  MoranLevel prev;
  prev.lo = {0.0};
  prev.hi = {1.0};
  prev.weight = {1.0};
  for (int n = 0; n < levels; ++n) {
    MoranLevel l;
    for (std::size_t i = 0; i < prev.size(); ++i) {
      double len = prev.hi[i] - prev.lo[i];
      l.lo.push_back(prev.lo[i]);
      l.hi.push_back(prev.lo[i] + a * len);
      l.lo.push_back(prev.hi[i] - b * len);
      l.hi.push_back(prev.hi[i]);
      for (int c = 0; c < 2; ++c) {
        l.weight.push_back(prev.weight[i] / 2);
        l.parent.push_back(n == 0 ? -1 : static_cast<std::int64_t>(i));
      }
    }
    s.levels.push_back(l);
    prev = l;
  }
  return s;
}

}  // namespace

TEST_CASE("explicit scheme validation") {
  auto good = two_ratio_scheme(4, 1.0 / 3, 1.0 / 3);
  good.validate();

  auto overlap = good;
  overlap.levels[1].hi[0] = overlap.levels[1].lo[1] + 0.01;
  CHECK(code_of([&] { overlap.validate(); }) == Errc::MalformedScheme);

  auto escape = good;
  escape.levels[2].hi[0] = escape.levels[1].hi[0] + 0.01;
  CHECK(code_of([&] { escape.validate(); }) == Errc::MalformedScheme);

  auto weights = good;
  weights.levels[3].weight[0] += 1e-9;
  CHECK(code_of([&] { weights.validate(); }) == Errc::MalformedScheme);

  auto orphan = good;
  orphan.levels[2].parent[0] = 7;
  CHECK(code_of([&] { orphan.validate(); }) == Errc::MalformedScheme);
}

TEST_CASE("cylinder scheme of the middle-thirds map") {
  auto s = cylinder_scheme(IntervalMap::middle_thirds(), 8, MeasureSpec::bernoulli({0.5, 0.5}));
  s.validate();
  CHECK(s.levels.size() == 8);
  CHECK(s.levels[7].size() == 256);
  const double d = std::log(2.0) / std::log(3.0);
  for (int n = 1; n <= 8; ++n) {
    auto ld = local_dimension(s, n);
    CHECK(ld.min == doctest::Approx(d).epsilon(1e-12));
    CHECK(ld.max == doctest::Approx(d).epsilon(1e-12));
    CHECK(s.min_diam(static_cast<std::size_t>(n - 1)) == doctest::Approx(std::pow(3.0, -n)).epsilon(1e-12));
  }
  auto rep = check_abstract_scheme(s);
  for (const auto& l : rep.levels) {
    CHECK(l.growth_ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(l.balance == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_FALSE(rep.balance_flag);
}

TEST_CASE("unequal ratios are flagged") {
  auto s = two_ratio_scheme(10, 1.0 / 3, 1.0 / 9);
  auto rep = check_abstract_scheme(s);
  // log R_n / log r_n = n log 3 / (2 n log 3)
  CHECK(rep.levels.back().growth_ratio == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(rep.growth_flag);
  CHECK(rep.violated());
}

TEST_CASE("local dimensions of a Bernoulli cylinder scheme") {
  const double p = 0.7;
  auto s = cylinder_scheme(IntervalMap::doubling(), 12, MeasureSpec::bernoulli({p, 1 - p}));
  auto ld = local_dimension(s, 12);
  CHECK(ld.values.size() == 4096);
  CHECK(ld.min == doctest::Approx(-std::log2(p)).epsilon(1e-12));
  CHECK(ld.max == doctest::Approx(-std::log2(1 - p)).epsilon(1e-12));
  auto rep = check_abstract_scheme(s);
  CHECK(rep.balance_flag);
}

TEST_CASE("block schedule") {
  CHECK(code_of([] { make_schedule({8}, false); }) == Errc::InvalidArgument);
  CHECK(code_of([] { make_schedule({8, 12}, false); }) == Errc::InvalidArgument);
  CHECK(code_of([] { make_schedule({0, 8}, false); }) == Errc::InvalidArgument);

  auto s = make_schedule({8, 16, 32, 64}, false);
  CHECK(s.stages() == 3);
  CHECK(s.lengths.size() == 56);
  CHECK(s.lengths.front() == 8);
  CHECK(s.lengths.back() == 63);
  for (std::size_t t = 1; t < s.lengths.size(); ++t) CHECK(s.lengths[t] == s.lengths[t - 1] + 1);
  CHECK(s.total_length() == (8 + 63) * 56 / 2);
  CHECK(s.eps == std::vector<double>{1.0, 0.5, 1.0 / 3});

  auto r = check_schedule(s);
  CHECK(r.max_step_ratio[0] == doctest::Approx(9.0 / 8));
  CHECK(r.max_step_ratio[2] == doctest::Approx(33.0 / 32));
  for (std::size_t i = 1; i < r.partial_sum_ratio.size(); ++i) CHECK(r.partial_sum_ratio[i] < r.partial_sum_ratio[i - 1]);

  auto padded = make_schedule({8, 16, 32, 64, 128}, true);
  CHECK(padded.pad_factor == std::vector<int>{1, 2, 2, 2});
  std::uint64_t expected = 0;
  for (int l = 8; l < 16; ++l) expected += 2 * l;
  for (int l = 16; l < 128; ++l) expected += 3 * l;
  CHECK(padded.total_length() == expected);
  auto pr = check_schedule(padded);
  CHECK(pr.pad_eps[3] == doctest::Approx(0.5));
  CHECK(pr.pad_ratio == std::vector<double>{2.0, 1.0, 1.0});
}

TEST_CASE("harvesting") {
  auto dbl = IntervalMap::doubling();
  auto mu = MeasureSpec::bernoulli({0.5, 0.5});
  MeasureEvaluator eval(dbl);
  auto targets = harvest_targets(mu, eval, 1);
  CHECK(targets.lyapunov == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(targets.entropy == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(targets.moments[0] == doctest::Approx(0.5).epsilon(1e-12));

  HarvestOptions ho;
  ho.samples = 1000;
  auto h1 = harvest_blocks(dbl, mu, targets, 1, 8, 16, ho);
  CHECK(h1.retained == 1.0);
  CHECK(h1.words.size() == 1000);
  for (const auto& w : h1.words) CHECK(w.size() == 16);

  auto c24 = cantor24();
  const double s = oracle::similarity_dimension({0.5, 0.25});
  auto eq = MeasureSpec::bernoulli({std::pow(0.5, s), std::pow(0.25, s)});
  MeasureEvaluator ce(c24);
  auto h20 = harvest_blocks(c24, eq, harvest_targets(eq, ce, 20), 20, 32, 64, ho);
  CHECK(h20.retained >= 0.9);
  CHECK(h20.m >= 32);
  CHECK(h20.l_max >= 2 * h20.m - 1);
  CHECK(h20.l_max - 1 <= 2 * h20.m);
}

TEST_CASE("product construction on the doubling map") {
  auto dbl = IntervalMap::doubling();
  auto half = build_moran_M(dbl, MeasureSpec::bernoulli({0.5, 0.5}));
  CHECK(half.schedule.stages() == 3);
  CHECK(half.blocks.size() == half.schedule.lengths.size());
  auto stats = level_statistics(dbl, half);
  CHECK(stats.size() == half.blocks.size());
  for (const auto& l : stats) {
    CHECK(std::fabs(l.dim_min - 1.0) < 1e-4);
    CHECK(std::fabs(l.dim_max - 1.0) < 1e-4);
    CHECK(l.entropy_sandwich);
    CHECK(l.diameter_sandwich);
  }
  CHECK(stats.back().length == half.schedule.total_length());

  // h / lambda = H(0.7) / log 2; local dimensions straddle it and narrow
  const double target = oracle::binary_entropy(0.7) / std::log(2.0);
  auto skew = build_moran_M(dbl, MeasureSpec::bernoulli({0.7, 0.3}));
  auto ss = level_statistics(dbl, skew);
  CHECK(ss.back().dim_min < target);
  CHECK(ss.back().dim_max > target);
  CHECK(ss.back().dim_max - ss.back().dim_min < ss[7].dim_max - ss[7].dim_min);

  for (double w : block_weight_sums(skew)) {
    CHECK(w > 0.0);
    CHECK(w <= 1.0 + kWeightConsistencyTol);
  }
  std::mt19937_64 rng(4);
  auto word = sample_scheme_word(skew, rng);
  CHECK(word.size() == skew.schedule.total_length());

  // scheme points are generic for the harvesting measure up to twice the last eps
  MeasureEvaluator eval(dbl);
  auto skew_moments = eval.moments(MeasureSpec::bernoulli({0.7, 0.3}));
  for (int k = 0; k < 4; ++k) {
    auto tr = generic_trace(dbl, sample_scheme_word(skew, rng), skew_moments);
    CHECK(tr.tail_limsup <= 2 * skew.schedule.eps.back());
  }
}

TEST_CASE("construction is independent of the thread count") {
  auto c24 = cantor24();
  auto mu = MeasureSpec::bernoulli({0.6, 0.4});
  MoranOptions a;
  a.harvest.threads = 1;
  MoranOptions b;
  b.harvest.threads = 3;
  auto sa = build_moran_M(c24, mu, a);
  auto sb = build_moran_M(c24, mu, b);
  REQUIRE(sa.blocks.size() == sb.blocks.size());
  for (std::size_t t = 0; t < sa.blocks.size(); ++t) {
    CHECK(sa.blocks[t].words == sb.blocks[t].words);
    CHECK(sa.blocks[t].log_rho == sb.blocks[t].log_rho);
  }
}

TEST_CASE("padded construction") {
  auto man = IntervalMap::manneville(1.0);
  auto mu = MeasureSpec::bernoulli({0.5, 0.5});
  MoranOptions mo;
  mo.stages = 2;
  CHECK(code_of([&] { build_moran_padded(IntervalMap::doubling(), mu, mo); }) == Errc::PadSymbolInvalid);
  mo.pad_symbol = 1;
  CHECK(code_of([&] { build_moran_padded(man, mu, mo); }) == Errc::PadSymbolInvalid);
  mo.pad_symbol = 0;
  auto s = build_moran_padded(man, mu, mo);
  CHECK(s.padded);
  for (std::size_t t = 0; t < s.blocks.size(); ++t) {
    const auto& b = s.blocks[t];
    CHECK(b.pad == s.schedule.pad_factor[static_cast<std::size_t>(b.stage - 1)] * b.length);
    auto pad = s.pad_word(t);
    CHECK(pad.size() == static_cast<std::size_t>(b.pad));
    CHECK(std::all_of(pad.begin(), pad.end(), [](Symbol a) { return a == 0; }));
  }
  std::vector<std::size_t> choice(3, 0);
  auto w = s.concatenate(choice);
  std::size_t expected = 0;
  for (int t = 0; t < 3; ++t) expected += static_cast<std::size_t>(s.blocks[static_cast<std::size_t>(t)].length + s.blocks[static_cast<std::size_t>(t)].pad);
  CHECK(w.size() == expected);
}

TEST_CASE("degenerate targets") {
  MoranOptions mo;
  auto code = code_of([&] { build_moran_M(IntervalMap::manneville(1.0), MeasureSpec::dirac(0), mo); });
  CHECK(code == Errc::Precondition);
  mo.length_budget = 100;
  CHECK(code_of([&] { build_moran_M(IntervalMap::doubling(), MeasureSpec::bernoulli({0.5, 0.5}), mo); }) ==
        Errc::BudgetExceeded);
}
