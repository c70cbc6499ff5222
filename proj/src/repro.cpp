#include "dimlab/repro.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "dimlab/error.hpp"
#include "dimlab/estimators.hpp"
#include "dimlab/map_model.hpp"
#include "dimlab/measures.hpp"
#include "dimlab/moran.hpp"
#include "dimlab/parallel.hpp"
#include "dimlab/pressure.hpp"
#include "dimlab/symbolic.hpp"

namespace dimlab {

void ReportTable::add(std::vector<std::string> row) {
  if (row.size() != columns.size()) fail(Errc::InvalidArgument, "row width does not match the columns");
  rows.push_back(std::move(row));
}

std::string ReportTable::csv() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
  return os.str();
}

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt_int(long long v) { return std::to_string(v); }

namespace {

IntervalMap cantor24() { return IntervalMap(IntervalMap::linear({2.0, 4.0}, {0.0, 0.75}).branches(), "cantor24"); }

// Root of sum |slope_i|^-s = 1.
double similarity_root(const IntervalMap& map) {
  auto f = [&](double s) {
    double acc = 0.0;
    for (const auto& b : map.branches()) acc += std::pow(std::fabs(b.params[0]), -s);
    return acc - 1.0;
  };
  double lo = 0.0, hi = 1.0;
  while (f(hi) > 0) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (f(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double binary_entropy_bits(double p) { return -(p * std::log2(p) + (1 - p) * std::log2(1 - p)); }

ReportTable besicovitch(const ReproOptions& o) {
  ReportTable t;
  t.columns = {"p", "closed_form", "bowen_tilted", "abs_error", "eps_spread"};
  IntervalMap map = IntervalMap::doubling();
  MeasureEvaluator eval(map, 16, 32, o.threads);
  for (double p : {0.5, 0.7, 0.9}) {
    auto mu = MeasureSpec::bernoulli({p, 1.0 - p});
    auto f = GoodCylinderFilter::moments_of(eval.moments(mu), 1, 0.1, kDefaultEpsSweep.front());
    BowenOptions bo = default_bowen_options(RateMode::Tilted);
    bo.threads = o.threads;
    auto sw = bowen_sweep(map, f, kDefaultEpsSweep, bo);
    double cf = binary_entropy_bits(p);
    t.add({fmt_num(p), fmt_num(cf), fmt_num(sw.extrapolated), fmt_num(std::fabs(sw.extrapolated - cf)), fmt_num(sw.spread)});
  }
  return t;
}

ReportTable moran_equation(const ReproOptions& o) {
  ReportTable t;
  t.columns = {"map", "closed_form", "bowen_root", "sup_ratio", "argmax_p0", "oracle_p0"};
  for (const auto& map : {IntervalMap::middle_thirds(), cantor24()}) {
    double s = similarity_root(map);
    BowenOptions bo;
    bo.threads = o.threads;
    bo.n_max = 16;
    auto root = bowen_root(map, GoodCylinderFilter::unconstrained(), bo);
    MeasureEvaluator eval(map, 16, 32, o.threads);
    SupRatioOptions so;
    so.seed = o.seed;
    so.threads = o.threads;
    auto sup = sup_dim_ratio(eval, so);
    double p0 = std::pow(std::fabs(map.branch(0).params[0]), -s);
    t.add({map.name(), fmt_num(s), fmt_num(root.s), fmt_num(sup.s_sup), fmt_num(sup.params[0]), fmt_num(p0)});
  }
  return t;
}

ReportTable lemma21(const ReproOptions& o) {
  ReportTable t;
  t.columns = {"n", "manneville", "doubling", "cantor24"};
  std::vector<int> ns{4, 8, 12, 16};
  auto man = lemma21_gaps(IntervalMap::manneville(1.0), ns, o.threads);
  auto dbl = lemma21_gaps(IntervalMap::doubling(), ns, o.threads);
  auto c24 = lemma21_gaps(cantor24(), ns, o.threads);
  for (std::size_t i = 0; i < ns.size(); ++i) t.add({fmt_int(ns[i]), fmt_num(man[i]), fmt_num(dbl[i]), fmt_num(c24[i])});
  return t;
}

ReportTable pressure_agreement(const ReproOptions& o) {
  ReportTable t;
  t.columns = {"map", "s", "max_sum_gap", "rate_diam", "rate_sup", "rate_gap"};
  for (const auto& map : {IntervalMap::doubling(), cantor24(), IntervalMap::manneville(1.0)}) {
    PressureTable table(map, GoodCylinderFilter::unconstrained(), 8, 16, false, o.threads);
    for (double s : {0.5, 1.0}) {
      auto e = table.estimate(s);
      double gap = 0.0;
      for (std::size_t i = 0; i < e.log_sums_diam.size(); ++i) gap = std::max(gap, std::fabs(e.log_sums_diam[i] - e.log_sums_sup[i]));
      t.add({map.name(), fmt_num(s), fmt_num(gap), fmt_num(e.rate), fmt_num(e.rate_sup), fmt_num(std::fabs(e.rate - e.rate_sup))});
    }
  }
  return t;
}

ReportTable moran_local(const ReproOptions& o) {
  ReportTable t;
  t.columns = {"level", "stage", "length", "dim_min", "dim_max", "balance", "growth_ratio", "entropy_sandwich",
               "diameter_sandwich"};
  IntervalMap map = cantor24();
  double s = similarity_root(map);
  auto mu = MeasureSpec::bernoulli({std::pow(2.0, -s), 1.0 - std::pow(2.0, -s)});
  MoranOptions mo;
  mo.harvest.seed = o.seed;
  mo.harvest.threads = o.threads;
  auto scheme = build_moran_M(map, mu, mo);
  auto stats = level_statistics(map, scheme, 8, o.seed);
  for (const auto& l : stats) {
    t.add({fmt_int(l.level), fmt_int(l.stage), fmt_int(static_cast<long long>(l.length)), fmt_num(l.dim_min),
           fmt_num(l.dim_max), fmt_num(l.balance), fmt_num(l.growth_ratio), fmt_int(l.entropy_sandwich),
           fmt_int(l.diameter_sandwich)});
  }
  return t;
}

ReportTable parabolic(const ReproOptions& o) {
  ReportTable t;
  t.columns = {"quantity", "value"};
  IntervalMap map = IntervalMap::manneville(1.0);
  for (const auto& fp : map.fixed_points()) {
    t.add({"fixed_point_" + std::to_string(fp.branch), fmt_num(fp.x)});
    t.add({"parabolic_" + std::to_string(fp.branch), fmt_int(fp.parabolic)});
  }
  MeasureEvaluator eval(map, 16, 32, o.threads);
  t.add({"lyapunov_dirac_0", fmt_num(eval.lyapunov(MeasureSpec::dirac(0)))});
  auto d = metric_d(lebesgue_moments(32), eval.moments(MeasureSpec::dirac(0)));
  t.add({"metric_lebesgue_dirac_0", fmt_num(d.value)});
  return t;
}

ReportTable padded(const ReproOptions& o) {
  ReportTable t;
  t.columns = {"sample", "length", "tail_liminf", "tail_limsup"};
  IntervalMap map = IntervalMap::manneville(1.0);
  auto mu = MeasureSpec::bernoulli({0.5, 0.5});
  MoranOptions mo;
  mo.stages = 2;
  mo.harvest.seed = o.seed;
  mo.harvest.threads = o.threads;
  auto scheme = build_moran_padded(map, mu, mo);
  MeasureEvaluator eval(map, 16, 32, o.threads);
  auto target = eval.moments(mu);
  for (int k = 0; k < 4; ++k) {
    auto rng = task_rng(o.seed, static_cast<std::uint64_t>(k));
    Word w = sample_scheme_word(scheme, rng);
    auto tr = generic_trace(map, w, target);
    t.add({fmt_int(k), fmt_int(static_cast<long long>(w.size())), fmt_num(tr.tail_liminf), fmt_num(tr.tail_limsup)});
  }
  return t;
}

const std::map<std::string, std::function<ReportTable(const ReproOptions&)>>& registry() {
  static const std::map<std::string, std::function<ReportTable(const ReproOptions&)>> r{
      {"besicovitch", besicovitch}, {"moran-equation", moran_equation}, {"lemma21", lemma21},
      {"pressure-agreement", pressure_agreement}, {"moran-local", moran_local}, {"parabolic", parabolic},
      {"padded", padded}};
  return r;
}

}  // namespace

std::vector<std::string> repro_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : registry()) out.push_back(k);
  return out;
}

ReportTable run_repro(const std::string& name, const ReproOptions& options) {
  auto it = registry().find(name);
  if (it == registry().end()) fail(Errc::InvalidArgument, "unknown reproduction '" + name + "'");
  return it->second(options);
}

}  // namespace dimlab
