// One verdict line per acceptance criterion; exit status 0 only when all pass.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "dimlab/dimlab.h"
#include "dimlab/error.hpp"
#include "dimlab/moran.hpp"
#include "dimlab/estimators.hpp"
#include "dimlab/pressure.hpp"
#include "dimlab/repro.hpp"
#include "dimlab/symbolic.hpp"
#include "oracles.hpp"

using namespace dimlab;

namespace {

// Tolerances of the criteria.
constexpr double kBesicovitchTol = 0.02;
constexpr double kBesicovitchSeconds = 60.0;
constexpr int kMaxDepth = 20;
constexpr double kMoranEquationTol = 1e-3;
constexpr double kLinearGapTol = 1e-12;
constexpr double kSumAgreementTol = 1e-12;
constexpr double kRateAgreementTol = 0.01;
constexpr double kLocalDimTol = 0.02;
constexpr double kBalanceTol = 0.02;
constexpr double kMetricValueTol = 1e-6;
constexpr double kPaddedLiminf = 0.1;
constexpr double kPaddedRatio = 2.0;
constexpr double kEntropyTol = 1e-12;
constexpr double kTriangleTol = 1e-12;
constexpr int kMetricTriples = 1000;

int failed = 0;

void verdict(int id, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failed;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

IntervalMap cantor24() { return IntervalMap::linear({2.0, 4.0}, {0.0, 0.75}); }

void besicovitch() {
  auto dbl = IntervalMap::doubling();
  MeasureEvaluator eval(dbl);
  bool ok = true;
  std::string detail;
  for (double p : {0.5, 0.7, 0.9}) {
    auto start = std::chrono::steady_clock::now();
    auto f = GoodCylinderFilter::moments_of(eval.moments(MeasureSpec::bernoulli({p, 1 - p})), 1, 0.1, 0.05);
    BowenOptions bo = default_bowen_options(RateMode::Tilted);
    auto sw = bowen_sweep(dbl, f, {0.05, 0.025, 0.0125}, bo);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    double expected = oracle::binary_entropy(p) / std::log(2.0);
    double err = std::fabs(sw.extrapolated - expected);
    ok = ok && err <= kBesicovitchTol && secs <= kBesicovitchSeconds && bo.n_max <= kMaxDepth;
    detail += fmt("p=%.1f err=%.2e t=%.1fs; ", p, err, secs);
  }
  verdict(1, ok, detail);
}

void moran_equation() {
  bool ok = true;
  std::string detail;
  struct Case {
    IntervalMap map;
    std::vector<double> ratios;
  };
  for (const auto& c : {Case{IntervalMap::middle_thirds(), {1.0 / 3, 1.0 / 3}}, Case{cantor24(), {0.5, 0.25}}}) {
    const double s = oracle::similarity_dimension(c.ratios);
    BowenOptions bo;
    bo.n_max = 16;
    double root = bowen_root(c.map, GoodCylinderFilter::unconstrained(), bo).s;
    MeasureEvaluator eval(c.map);
    auto sup = sup_dim_ratio(eval, SupRatioOptions{});
    double arg_err = 0.0;
    for (std::size_t i = 0; i < c.ratios.size(); ++i) {
      arg_err = std::max(arg_err, std::fabs(sup.params[i] - std::pow(c.ratios[i], s)));
    }
    double e1 = std::fabs(root - s), e2 = std::fabs(sup.s_sup - s);
    ok = ok && e1 <= kMoranEquationTol && e2 <= kMoranEquationTol && arg_err <= kMoranEquationTol;
    detail += fmt("root err=%.1e sup err=%.1e argmax err=%.1e; ", e1, e2, arg_err);
  }
  verdict(2, ok, detail);
}

void distortion_gap() {
  const std::vector<int> ns{4, 8, 12, 16};
  auto man = lemma21_gaps(IntervalMap::manneville(1.0), ns);
  bool ok = true;
  for (std::size_t i = 1; i < man.size(); ++i) ok = ok && man[i] < man[i - 1];
  double linear_max = 0.0;
  for (const auto& map : {IntervalMap::doubling(), IntervalMap::middle_thirds(), cantor24(),
                          IntervalMap::linear({3.0, 2.0, 6.0}, {0.0, 1.0 / 3, 5.0 / 6})}) {
    std::vector<int> all;
    const int n_max = map.size() == 2 ? 16 : 10;
    for (int n = 1; n <= n_max; ++n) all.push_back(n);
    for (double g : lemma21_gaps(map, all)) linear_max = std::max(linear_max, std::fabs(g));
  }
  ok = ok && linear_max <= kLinearGapTol;
  verdict(3, ok, fmt("manneville %.4f > %.4f > %.4f", man[0], man[1], man[2]) + fmt(" > %.4f; linear max %.1e", man[3], linear_max));
}

void pressure_agreement() {
  double sum_gap = 0.0;
  for (const auto& map : {IntervalMap::doubling(), IntervalMap::middle_thirds(), cantor24()}) {
    PressureTable t(map, GoodCylinderFilter::unconstrained(), 8, 16, false);
    for (double s : {0.25, 0.5, 0.75, 1.0}) {
      auto e = t.estimate(s);
      for (std::size_t i = 0; i < e.log_sums_diam.size(); ++i) {
        sum_gap = std::max(sum_gap, std::fabs(e.log_sums_diam[i] - e.log_sums_sup[i]));
      }
    }
  }
  PressureTable man(IntervalMap::manneville(1.0), GoodCylinderFilter::unconstrained(), 8, 16, false);
  double rate_gap = 0.0, worst_s = 0.0;
  for (double s : {0.25, 0.5, 0.75, 1.0}) {
    auto e = man.estimate(s);
    double g = std::fabs(e.rate - e.rate_sup);
    if (g > rate_gap) {
      rate_gap = g;
      worst_s = s;
    }
  }
  verdict(4, sum_gap <= kSumAgreementTol && rate_gap <= kRateAgreementTol,
          fmt("linear sum gap %.1e; manneville rate gap %.4f at s=%.2f", sum_gap, rate_gap, worst_s));
}

void moran_local() {
  auto map = cantor24();
  const double s = oracle::similarity_dimension({0.5, 0.25});
  auto mu = MeasureSpec::bernoulli({std::pow(0.5, s), std::pow(0.25, s)});
  MoranOptions mo;
  mo.stages = 3;
  auto scheme = build_moran_M(map, mu, mo);
  auto stats = level_statistics(map, scheme);
  const auto& last = stats.back();
  double dev = 0.0;
  for (double d : {last.dim_min, last.dim_max, last.exact_dim_min, last.exact_dim_max}) dev = std::max(dev, std::fabs(d - s));
  double bal = std::fabs(last.balance - 1.0);
  verdict(5, dev <= kLocalDimTol && bal <= kBalanceTol,
          fmt("level %.0f: local dimension dev %.1e; balance %.4f", last.level, dev, last.balance));
}

void parabolic() {
  auto man = IntervalMap::manneville(1.0);
  int parabolic = 0;
  bool at_zero = false;
  for (const auto& fp : find_fixed_points(man)) {
    if (fp.parabolic) {
      ++parabolic;
      at_zero = fp.x == 0.0;
    }
  }
  MeasureEvaluator eval(man);
  double lam = eval.lyapunov(MeasureSpec::dirac(0));
  double d = metric_d(lebesgue_moments(32), eval.moments(MeasureSpec::dirac(0))).value;
  // sum 2^-j / (j + 1) over all j >= 1 is 2 log 2 - 1
  double expected = 2.0 * std::log(2.0) - 1.0;
  bool ok = parabolic == 1 && at_zero && lam == 0.0 && std::fabs(d - expected) <= kMetricValueTol;
  verdict(6, ok, fmt("parabolic points %.0f; lyapunov %.1e; metric %.9f", parabolic, lam, d));
}

void padded() {
  auto man = IntervalMap::manneville(1.0);
  auto mu = MeasureSpec::bernoulli({0.5, 0.5});
  MoranOptions mo;
  mo.stages = 2;
  auto scheme = build_moran_padded(man, mu, mo);
  MeasureEvaluator eval(man);
  auto target = eval.moments(mu);
  bool ok = true;
  double worst_inf = 0.0, worst_ratio = 1e9;
  for (std::uint64_t k = 0; k < 4; ++k) {
    std::mt19937_64 rng(1000 + k);
    auto tr = generic_trace(man, sample_scheme_word(scheme, rng), target);
    worst_inf = std::max(worst_inf, tr.tail_liminf);
    worst_ratio = std::min(worst_ratio, tr.tail_limsup / tr.tail_liminf);
    ok = ok && tr.tail_liminf <= kPaddedLiminf && tr.tail_limsup >= kPaddedRatio * tr.tail_liminf;
  }
  verdict(7, ok, fmt("max tail liminf %.3f; min limsup/liminf %.2f", worst_inf, worst_ratio));
}

MeasureSpec random_spec(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.02, 0.98);
  switch (rng() % 3) {
    case 0: {
      double p = u(rng);
      return MeasureSpec::bernoulli({p, 1 - p});
    }
    case 1: {
      double a = u(rng), b = u(rng);
      return MeasureSpec::markov_order(1, 2, {a, 1 - a, b, 1 - b});
    }
    default: {
      double a = u(rng), b = u(rng), total = a + b + 1.0;
      return MeasureSpec::block_bernoulli(2, {parse_word("00"), parse_word("01"), parse_word("11")},
                                          {a / total, b / total, 1.0 / total});
    }
  }
}

void identities() {
  std::mt19937_64 rng(8);
  double entropy_err = 0.0;
  for (int t = 0; t < 200; ++t) {
    const int n = 2 + t % 6;
    std::vector<Word> words;
    std::vector<double> w;
    for (std::uint64_t k = 0; k < (1u << n); ++k) {
      if (rng() % 3 == 0) continue;
      Word x;
      for (int j = n - 1; j >= 0; --j) x.push_back(static_cast<Symbol>((k >> j) & 1));
      words.push_back(x);
      w.push_back(std::uniform_real_distribution<double>(0.1, 1.0)(rng));
    }
    if (words.empty()) continue;
    double total = 0.0, h = 0.0;
    for (double v : w) total += v;
    for (double& v : w) {
      v /= total;
      h -= v * std::log(v);
    }
    entropy_err = std::max(entropy_err, std::fabs(n_bernoulli_measure(n, words, w).entropy() - h / n));
  }
  MeasureEvaluator eval(IntervalMap::manneville(1.0), 12);
  double asym = 0.0, tri = 0.0;
  for (int t = 0; t < kMetricTriples; ++t) {
    auto a = eval.moments(random_spec(rng));
    auto b = eval.moments(random_spec(rng));
    auto c = eval.moments(random_spec(rng));
    double ab = metric_d(a, b).value, ba = metric_d(b, a).value;
    asym = std::max(asym, std::fabs(ab - ba));
    tri = std::max(tri, ab - metric_d(a, c).value - metric_d(c, b).value);
  }
  verdict(8, entropy_err <= kEntropyTol && asym == 0.0 && tri <= kTriangleTol,
          fmt("entropy err %.1e; asymmetry %.1e; triangle excess %.1e", entropy_err, asym, tri));
}

std::string body(const std::string& csv) {
  auto pos = csv.find('\n');
  return csv.rfind("# ", 0) == 0 && pos != std::string::npos ? csv.substr(pos + 1) : csv;
}

std::string capi_repro(int threads, const std::string& name) {
  dimlab_context* ctx = nullptr;
  if (dimlab_context_new(threads, 0, &ctx) != DIMLAB_OK) return "context failure";
  char* out = nullptr;
  std::string result;
  if (dimlab_repro(ctx, name.c_str(), &out) == DIMLAB_OK) {
    result = out;
  } else {
    result = std::string("error: ") + dimlab_last_error(ctx);
  }
  dimlab_string_free(out);
  dimlab_context_free(ctx);
  return result;
}

std::string cli_repro(int threads, const std::string& name) {
  std::string cmd = std::string(DIMLAB_CLI_PATH) + " --threads " + std::to_string(threads) + " --seed 0 repro " + name;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return "popen failure";
  std::string out;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  int rc = pclose(pipe);
  return rc == 0 ? out : "exit " + std::to_string(rc);
}

void determinism() {
  bool ok = true;
  std::string detail;
  for (const auto& name : repro_names()) {
    std::string a = body(capi_repro(1, name));
    std::string b = body(capi_repro(3, name));
    std::string c = body(cli_repro(2, name));
    bool same = a == b && b == c && a.rfind("error", 0) != 0;
    ok = ok && same;
    if (!same) detail += name + " differs; ";
  }
  verdict(9, ok, detail.empty() ? "all reproduction tables byte-identical across runs and thread counts" : detail);
}

}  // namespace

int main() {
  try {
    besicovitch();
    moran_equation();
    distortion_gap();
    pressure_agreement();
    moran_local();
    parabolic();
    padded();
    identities();
    determinism();
  } catch (const std::exception& e) {
    std::printf("aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d of 9 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
