#include "dimlab/moran.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dimlab/error.hpp"
#include "dimlab/parallel.hpp"

namespace dimlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool trends_away(const std::vector<double>& v) {
  if (v.size() < 2) return false;
  std::size_t start = v.size() / 2;
  if (start >= v.size() - 1) start = v.size() - 2;
  double first = std::fabs(v[start] - 1.0), last = std::fabs(v.back() - 1.0);
  return last > 1e-9 && last >= first - 1e-6;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ULL;
  for (std::uint64_t v : {a, b}) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 31;
  }
  return h;
}

}  // namespace

// ---- explicit schemes -------------------------------------------------------------

void MoranScheme::validate() const {
  if (levels.empty()) fail(Errc::MalformedScheme, "scheme has no levels");
  for (std::size_t n = 0; n < levels.size(); ++n) {
    const MoranLevel& L = levels[n];
    const std::size_t k = L.size();
    if (k == 0) fail(Errc::MalformedScheme, "level " + std::to_string(n + 1) + " is empty");
    if (L.hi.size() != k || L.weight.size() != k || L.parent.size() != k) {
      fail(Errc::MalformedScheme, "level " + std::to_string(n + 1) + " has ragged arrays");
    }
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return L.lo[a] < L.lo[b]; });
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t a = order[i];
      if (!(L.lo[a] >= 0.0 && L.hi[a] <= 1.0 && L.lo[a] <= L.hi[a])) {
        fail(Errc::MalformedScheme, "interval outside [0,1] or reversed on level " + std::to_string(n + 1));
      }
      if (!(L.weight[a] >= 0.0)) fail(Errc::MalformedScheme, "negative weight");
      if (i + 1 < k && L.hi[a] > L.lo[order[i + 1]] + 1e-15) {
        fail(Errc::MalformedScheme, "overlapping intervals on level " + std::to_string(n + 1));
      }
    }
    if (n == 0) {
      double total = std::accumulate(L.weight.begin(), L.weight.end(), 0.0);
      if (std::fabs(total - 1.0) > kWeightConsistencyTol) fail(Errc::MalformedScheme, "level 1 weights do not sum to 1");
      for (auto p : L.parent) {
        if (p != -1) fail(Errc::MalformedScheme, "level 1 intervals have no parent");
      }
      continue;
    }
    const MoranLevel& P = levels[n - 1];
    std::vector<double> sums(P.size(), 0.0);
    std::vector<int> children(P.size(), 0);
    for (std::size_t i = 0; i < k; ++i) {
      auto p = L.parent[i];
      if (p < 0 || static_cast<std::size_t>(p) >= P.size()) fail(Errc::MalformedScheme, "parent index out of range");
      auto pi = static_cast<std::size_t>(p);
      if (L.lo[i] < P.lo[pi] - 1e-12 || L.hi[i] > P.hi[pi] + 1e-12) {
        fail(Errc::MalformedScheme, "interval escapes its parent on level " + std::to_string(n + 1));
      }
      sums[pi] += L.weight[i];
      ++children[pi];
    }
    for (std::size_t j = 0; j < P.size(); ++j) {
      if (children[j] == 0) fail(Errc::MalformedScheme, "childless interval on level " + std::to_string(n));
      if (std::fabs(sums[j] - P.weight[j]) > kWeightConsistencyTol * std::max(1.0, P.weight[j])) {
        fail(Errc::MalformedScheme, "child weights do not sum to the parent weight on level " + std::to_string(n + 1));
      }
    }
  }
}

double MoranScheme::min_diam(std::size_t level) const {
  const MoranLevel& L = levels.at(level);
  double v = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < L.size(); ++i) v = std::min(v, L.hi[i] - L.lo[i]);
  return v;
}

double MoranScheme::max_diam(std::size_t level) const {
  const MoranLevel& L = levels.at(level);
  double v = 0.0;
  for (std::size_t i = 0; i < L.size(); ++i) v = std::max(v, L.hi[i] - L.lo[i]);
  return v;
}

MoranScheme cylinder_scheme(const IntervalMap& map, int depth, const MeasureSpec& mu) {
  if (depth < 1) fail(Errc::InvalidArgument, "depth must be at least 1");
  if (mu.alphabet() != map.size()) fail(Errc::InvalidArgument, "measure alphabet does not match the map");
  cylinder_count(map, depth, std::uint64_t{1} << 22);
  MoranScheme s;
  s.name = map.name() + "-cylinders";
  const auto m = static_cast<std::int64_t>(map.size());
  for (int n = 1; n <= depth; ++n) {
    MoranLevel L;
    std::int64_t index = 0;
    enumerate_cylinders(map, n, [&](const Cylinder& c) {
      L.lo.push_back(c.lo);
      L.hi.push_back(c.hi);
      L.weight.push_back(std::exp(mu.word_log_prob(c.word)));
      L.parent.push_back(n == 1 ? -1 : index / m);
      ++index;
    });
    s.levels.push_back(std::move(L));
  }
  // renormalize rounding so that children sum to their parent exactly
  for (std::size_t n = 1; n < s.levels.size(); ++n) {
    MoranLevel& L = s.levels[n];
    const MoranLevel& P = s.levels[n - 1];
    std::vector<double> sums(P.size(), 0.0);
    for (std::size_t i = 0; i < L.size(); ++i) sums[static_cast<std::size_t>(L.parent[i])] += L.weight[i];
    for (std::size_t i = 0; i < L.size(); ++i) {
      double sp = sums[static_cast<std::size_t>(L.parent[i])];
      if (sp > 0) L.weight[i] *= P.weight[static_cast<std::size_t>(L.parent[i])] / sp;
    }
  }
  return s;
}

SchemeReport check_abstract_scheme(const MoranScheme& scheme) {
  scheme.validate();
  if (scheme.levels.size() < 3) fail(Errc::Precondition, "scheme check needs at least 3 levels");
  SchemeReport rep;
  const std::size_t L = scheme.levels.size();
  for (std::size_t n = 0; n < L; ++n) {
    const MoranLevel& lv = scheme.levels[n];
    SchemeLevelReport r;
    r.level = static_cast<int>(n) + 1;
    r.intervals = lv.size();
    r.log_r = std::log(scheme.min_diam(n));
    r.log_R = std::log(scheme.max_diam(n));
    r.growth_ratio = r.log_R / r.log_r;
    if (n + 1 < L) r.step_ratio = std::log(scheme.min_diam(n + 1)) / r.log_r;
    double mn = std::numeric_limits<double>::infinity(), mx = kNegInf;
    for (double w : lv.weight) {
      if (w <= 0.0) continue;
      mn = std::min(mn, std::log(w));
      mx = std::max(mx, std::log(w));
    }
    r.balance = mx < 0.0 ? mn / mx : 1.0;
    auto ld = local_dimension(scheme, r.level);
    r.dim_min = ld.min;
    r.dim_max = ld.max;
    rep.levels.push_back(r);
  }
  std::vector<double> growth, step, balance;
  for (std::size_t n = 0; n < L; ++n) {
    growth.push_back(rep.levels[n].growth_ratio);
    balance.push_back(rep.levels[n].balance);
    if (n + 1 < L) step.push_back(rep.levels[n].step_ratio);
  }
  rep.growth_flag = trends_away(growth) || trends_away(step);
  rep.balance_flag = trends_away(balance);
  return rep;
}

LocalDimension local_dimension(const MoranScheme& scheme, int level) {
  if (level < 1 || static_cast<std::size_t>(level) > scheme.levels.size()) {
    fail(Errc::MalformedScheme, "level " + std::to_string(level) + " is not built");
  }
  const MoranLevel& lv = scheme.levels[static_cast<std::size_t>(level) - 1];
  LocalDimension out;
  out.level = level;
  out.min = std::numeric_limits<double>::infinity();
  out.max = kNegInf;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    double d = lv.hi[i] - lv.lo[i];
    if (!(d > 0.0) || d >= 1.0 || !(lv.weight[i] > 0.0)) fail(Errc::MalformedScheme, "degenerate interval or weight");
    double v = std::log(lv.weight[i]) / std::log(d);
    out.values.push_back(v);
    out.min = std::min(out.min, v);
    out.max = std::max(out.max, v);
  }
  return out;
}

// ---- schedule ------------------------------------------------------------------------

int BlockSchedule::p(int stage) const {
  auto i = static_cast<std::size_t>(stage - 1);
  return m.at(i + 1) - m.at(i) - 1;
}

std::uint64_t BlockSchedule::total_length() const {
  std::uint64_t total = 0;
  for (std::size_t t = 0; t < lengths.size(); ++t) {
    int pad = pad_factor.empty() ? 0 : pad_factor[static_cast<std::size_t>(stage_of[t] - 1)];
    total += static_cast<std::uint64_t>(lengths[t]) * static_cast<std::uint64_t>(1 + pad);
  }
  return total;
}

void BlockSchedule::relabel() {
  lengths.clear();
  stage_of.clear();
  for (int i = 1; i <= stages(); ++i) {
    for (int j = 0; j <= p(i); ++j) {
      lengths.push_back(m[static_cast<std::size_t>(i - 1)] + j);
      stage_of.push_back(i);
    }
  }
}

BlockSchedule make_schedule(const std::vector<int>& m, bool padded) {
  if (m.size() < 2) fail(Errc::InvalidArgument, "schedule needs at least one stage");
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] < 1) fail(Errc::InvalidArgument, "ranks must be positive");
    if (i > 0 && m[i] < 2 * m[i - 1]) fail(Errc::InvalidArgument, "ranks must at least double");
  }
  BlockSchedule s;
  s.m = m;
  for (std::size_t i = 1; i < m.size(); ++i) {
    s.eps.push_back(1.0 / static_cast<double>(i));
    s.pad_factor.push_back(padded ? static_cast<int>(std::ceil(std::sqrt(static_cast<double>(i)))) : 0);
  }
  s.relabel();
  return s;
}

ScheduleReport check_schedule(const BlockSchedule& s) {
  ScheduleReport r;
  for (int i = 1; i <= s.stages(); ++i) {
    double mx = 1.0;
    for (int j = 0; j < s.p(i); ++j) {
      double a = s.m[static_cast<std::size_t>(i - 1)] + j;
      mx = std::max(mx, (a + 1.0) / a);
    }
    r.max_step_ratio.push_back(mx);
    r.pad_eps.push_back(s.pad_factor[static_cast<std::size_t>(i - 1)] * s.eps[static_cast<std::size_t>(i - 1)]);
    if (i > 1 && s.pad_factor[static_cast<std::size_t>(i - 2)] > 0) {
      r.pad_ratio.push_back(static_cast<double>(s.pad_factor[static_cast<std::size_t>(i - 1)]) /
                            s.pad_factor[static_cast<std::size_t>(i - 2)]);
    }
  }
  double partial = 0.0;
  for (std::size_t t = 0; t < s.lengths.size(); ++t) {
    double len = s.lengths[t] * (1.0 + s.pad_factor[static_cast<std::size_t>(s.stage_of[t] - 1)]);
    if (partial > 0.0) r.partial_sum_ratio.push_back((partial + len) / partial);
    partial += len;
  }
  return r;
}

// ---- harvesting --------------------------------------------------------------------------

HarvestTargets harvest_targets(const MeasureSpec& mu, const MeasureEvaluator& eval, int k) {
  HarvestTargets t;
  t.lyapunov = eval.lyapunov(mu);
  if (!(t.lyapunov > 0.0)) fail(Errc::Precondition, "measure is not hyperbolic (Lyapunov exponent is 0)");
  auto mv = eval.moments(mu);
  if (k < 0 || static_cast<std::size_t>(k) > mv.m.size()) fail(Errc::InvalidArgument, "too many moment targets");
  t.moments.assign(mv.m.begin(), mv.m.begin() + k);
  t.entropy = mu.entropy();
  return t;
}

HarvestResult harvest_blocks(const IntervalMap& map, const MeasureSpec& mu, const HarvestTargets& targets, int stage,
                             int m, int l_max, const HarvestOptions& opt) {
  if (stage < 1) fail(Errc::InvalidArgument, "stage must be at least 1");
  if (opt.samples < 1000) fail(Errc::InvalidArgument, "harvesting needs at least 1000 samples");
  if (!(targets.lyapunov > 0.0)) fail(Errc::Precondition, "measure is not hyperbolic (Lyapunov exponent is 0)");
  if (static_cast<int>(targets.moments.size()) < stage) fail(Errc::InvalidArgument, "missing moment targets");
  if (m < 1 || l_max < m) fail(Errc::InvalidArgument, "need 1 <= m <= l_max");
  if (!(opt.delta > 0.0 && opt.delta < 1.0)) fail(Errc::InvalidArgument, "delta must lie in (0, 1)");
  if (mu.alphabet() != map.size()) fail(Errc::InvalidArgument, "measure alphabet does not match the map");
  if (std::holds_alternative<BlockBernoulli>(mu.variant())) fail(Errc::InvalidArgument, "harvesting needs a shift-invariant measure");
  const double eps = 1.0 / stage;
  const int k = stage;
  HarvestResult res;
  res.stage = stage;
  res.eps = eps;
  for (int attempt = 0; attempt <= opt.retries; ++attempt) {
    if (l_max + opt.tail > (1 << 16)) break;
    const std::uint64_t seed = mix_seed(opt.seed, static_cast<std::uint64_t>(stage), static_cast<std::uint64_t>(attempt));
    std::vector<std::uint8_t> verdict(static_cast<std::size_t>(opt.samples));  // 0 pass, 1 moment, 2 lyapunov, 3 entropy
    std::vector<Word> sampled(static_cast<std::size_t>(opt.samples));
    parallel_for(static_cast<std::size_t>(opt.samples), opt.threads, [&](std::size_t s) {
      auto rng = task_rng(seed, s);
      Word w;
      mu.sample(rng, static_cast<std::size_t>(l_max + opt.tail), w);
      auto orbit = symbolic_orbit(map, w);
      Word head(w.begin(), w.begin() + l_max);
      auto lp = mu.prefix_log_probs(head);
      std::vector<double> sums(static_cast<std::size_t>(k), 0.0);
      double sg = 0.0;
      std::uint8_t bad = 0;
      for (int n = 1; n <= l_max && !bad; ++n) {
        double x = orbit[static_cast<std::size_t>(n - 1)];
        double xp = 1.0;
        for (int j = 0; j < k; ++j) {
          xp *= x;
          sums[static_cast<std::size_t>(j)] += xp;
        }
        sg += std::log(std::fabs(map.branch(w[static_cast<std::size_t>(n - 1)]).derivative(x)));
        if (n < m) continue;
        for (int j = 0; j < k; ++j) {
          if (!(std::fabs(sums[static_cast<std::size_t>(j)] / n - targets.moments[static_cast<std::size_t>(j)]) < eps)) {
            bad = 1;
            break;
          }
        }
        if (!bad && !(std::fabs(sg / n - targets.lyapunov) < eps)) bad = 2;
        if (!bad && !(std::fabs(-lp[static_cast<std::size_t>(n - 1)] / n - targets.entropy) < eps)) bad = 3;
      }
      verdict[s] = bad;
      if (!bad) sampled[s] = std::move(head);
    });
    res.words.clear();
    res.fail_moment = res.fail_lyapunov = res.fail_entropy = 0;
    for (std::size_t s = 0; s < verdict.size(); ++s) {
      switch (verdict[s]) {
        case 0: res.words.push_back(std::move(sampled[s])); break;
        case 1: ++res.fail_moment; break;
        case 2: ++res.fail_lyapunov; break;
        default: ++res.fail_entropy; break;
      }
    }
    res.attempts = attempt + 1;
    res.m = m;
    res.l_max = l_max;
    res.retained = static_cast<double>(res.words.size()) / opt.samples;
    if (res.retained >= 1.0 - opt.delta) return res;
    m *= 2;
    l_max = std::max(l_max, 2 * m - 1);
  }
  const char* bound = "entropy";
  if (res.fail_moment >= res.fail_lyapunov && res.fail_moment >= res.fail_entropy) bound = "moment";
  else if (res.fail_lyapunov >= res.fail_entropy) bound = "lyapunov";
  fail(Errc::HarvestFailed, "stage " + std::to_string(stage) + ": retained mass " + std::to_string(res.retained) +
                                " below 1 - delta after " + std::to_string(res.attempts) + " attempts; most failures on the " +
                                bound + " bound");
}

// ---- product construction ------------------------------------------------------------

Word ProductScheme::pad_word(std::size_t block) const {
  const BlockFamily& b = blocks.at(block);
  return Word(static_cast<std::size_t>(b.pad), static_cast<Symbol>(pad_symbol));
}

Word ProductScheme::concatenate(const std::vector<std::size_t>& choice) const {
  if (choice.size() > blocks.size()) fail(Errc::InvalidArgument, "more choices than blocks");
  Word out;
  for (std::size_t b = 0; b < choice.size(); ++b) {
    const Word& w = blocks[b].words.at(choice[b]);
    out.insert(out.end(), w.begin(), w.end());
    out.insert(out.end(), static_cast<std::size_t>(blocks[b].pad), static_cast<Symbol>(pad_symbol));
  }
  return out;
}

namespace {

int continuity_rank(const IntervalMap& map, int k, double eps, int cap, int threads) {
  // var_n A_n f <= (1/n) sum_{j <= n} var_j f
  std::vector<double> acc(static_cast<std::size_t>(k) + 1, 0.0);
  for (int n = 1; n <= cap; ++n) {
    bool ok = true;
    acc[0] += variation(map, Observable::log_derivative(), n, threads);
    if (!(acc[0] / n < eps)) ok = false;
    for (int j = 1; j <= k; ++j) {
      acc[static_cast<std::size_t>(j)] += variation(map, Observable::moment(j), n, threads);
      if (!(acc[static_cast<std::size_t>(j)] / n < eps)) ok = false;
    }
    if (ok && lemma21_gap(map, n, threads) < eps) return n;
  }
  return cap;
}

ProductScheme build_product(const IntervalMap& map, const MeasureSpec& mu, const MoranOptions& opt, bool padded) {
  if (opt.stages < 1) fail(Errc::InvalidArgument, "need at least one stage");
  if (opt.family_size < 1) fail(Errc::InvalidArgument, "family size must be positive");
  if (opt.m_min < 1) fail(Errc::InvalidArgument, "m_min must be positive");
  if (padded) {
    if (opt.pad_symbol < 0 || opt.pad_symbol >= map.size()) fail(Errc::PadSymbolInvalid, "pad symbol is not a branch");
    bool parabolic = false;
    for (const auto& fp : map.fixed_points()) parabolic |= fp.branch == opt.pad_symbol && fp.parabolic;
    if (!parabolic && opt.strict) fail(Errc::PadSymbolInvalid, "pad branch has no parabolic fixed point");
  }
  MeasureEvaluator eval(map, opt.eval_depth, 32, opt.harvest.threads);
  ProductScheme ps;
  ps.map_name = map.name();
  ps.padded = padded;
  ps.pad_symbol = opt.pad_symbol;
  ps.delta = opt.harvest.delta;
  ps.targets = harvest_targets(mu, eval, opt.stages);

  std::vector<int> cont(static_cast<std::size_t>(opt.stages));
  for (int i = 1; i <= opt.stages; ++i) {
    cont[static_cast<std::size_t>(i - 1)] = continuity_rank(map, i, 1.0 / i, opt.cont_depth_cap, opt.harvest.threads);
  }
  auto pad_of = [&](int stage) { return padded ? static_cast<int>(std::ceil(std::sqrt(static_cast<double>(stage)))) : 0; };
  auto stage_length = [&](int stage, int mi, int mnext) {
    std::uint64_t len = 0;
    for (int l = mi; l < mnext; ++l) len += static_cast<std::uint64_t>(l) * static_cast<std::uint64_t>(1 + pad_of(stage));
    return len;
  };

  std::vector<int> m(static_cast<std::size_t>(opt.stages) + 1, 0);
  std::vector<HarvestResult> harvests(static_cast<std::size_t>(opt.stages));
  std::uint64_t used = 0;
  for (int i = 1; i <= opt.stages; ++i) {
    auto ii = static_cast<std::size_t>(i - 1);
    int mi = std::max(cont[ii], i == 1 ? opt.m_min : 2 * m[ii - 1]);
    if (used + stage_length(i, mi, 2 * mi) > opt.length_budget) {
      fail(Errc::BudgetExceeded, "stage " + std::to_string(i) + " would exceed the word length budget");
    }
    harvests[ii] = harvest_blocks(map, mu, ps.targets, i, mi, 2 * mi - 1, opt.harvest);
    m[ii] = harvests[ii].m;
    if (i > 1 && m[ii] > 2 * m[ii - 1]) {
      // the previous stage now runs up to m_i - 1; check its words on the longer range
      HarvestOptions once = opt.harvest;
      once.retries = 0;
      harvests[ii - 1] = harvest_blocks(map, mu, ps.targets, i - 1, m[ii - 1], m[ii] - 1, once);
      used += stage_length(i - 1, m[ii - 1], m[ii]) - stage_length(i - 1, m[ii - 1], 2 * m[ii - 1]);
    }
    used += stage_length(i, m[ii], 2 * m[ii]);
    if (used > opt.length_budget) fail(Errc::BudgetExceeded, "construction exceeds the word length budget");
  }
  m[static_cast<std::size_t>(opt.stages)] = 2 * m[static_cast<std::size_t>(opt.stages) - 1];
  ps.schedule = make_schedule(m, padded);
  ps.schedule.cont_rank = cont;
  if (ps.schedule.total_length() > opt.length_budget) fail(Errc::BudgetExceeded, "construction exceeds the word length budget");

  const auto& sched = ps.schedule;
  ps.blocks.resize(sched.lengths.size());
  parallel_for(sched.lengths.size(), opt.harvest.threads, [&](std::size_t t) {
    const int stage = sched.stage_of[t];
    const HarvestResult& hv = harvests[static_cast<std::size_t>(stage - 1)];
    BlockFamily b;
    b.stage = stage;
    b.index = sched.lengths[t] - sched.m[static_cast<std::size_t>(stage - 1)];
    b.length = sched.lengths[t];
    b.pad = sched.lengths[t] * sched.pad_factor[static_cast<std::size_t>(stage - 1)];
    b.eps = sched.eps[static_cast<std::size_t>(stage - 1)];
    b.mass = hv.retained;
    auto rng = task_rng(mix_seed(opt.harvest.seed, 0xb10c, t), 0);
    std::vector<Word> picked;
    for (int q = 0; q < opt.family_size; ++q) {
      auto idx = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(hv.words.size()));
      idx = std::min(idx, hv.words.size() - 1);
      const Word& src = hv.words[idx];
      picked.emplace_back(src.begin(), src.begin() + b.length);
    }
    std::sort(picked.begin(), picked.end());
    picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
    for (auto& w : picked) {
      double lmu = mu.word_log_prob(w);
      Word full = w;
      full.insert(full.end(), static_cast<std::size_t>(b.pad), static_cast<Symbol>(opt.pad_symbol));
      Cylinder c = cylinder(map, full);
      b.log_mu.push_back(lmu);
      b.log_rho.push_back(lmu - std::log(b.mass));
      b.log_diam.push_back(c.log_diam);
      b.sum_g.push_back(cylinder(map, w).sum_g);
      b.words.push_back(std::move(w));
    }
    ps.blocks[t] = std::move(b);
  });
  return ps;
}

// Extremes of sum A / sum C over one choice per block (A >= 0, C > 0),
// by Dinkelbach iteration; exact because the objective separates.
double ratio_extreme(const std::vector<BlockFamily>& blocks, std::size_t count, bool maximize,
                     std::vector<std::size_t>& path) {
  path.assign(count, 0);
  auto ratio = [&] {
    double a = 0.0, c = 0.0;
    for (std::size_t b = 0; b < count; ++b) {
      a -= blocks[b].log_rho[path[b]];
      c -= blocks[b].log_diam[path[b]];
    }
    return a / c;
  };
  double q = ratio();
  for (int it = 0; it < 200; ++it) {
    for (std::size_t b = 0; b < count; ++b) {
      const auto& f = blocks[b];
      double best = maximize ? kNegInf : std::numeric_limits<double>::infinity();
      for (std::size_t w = 0; w < f.words.size(); ++w) {
        double v = -f.log_rho[w] + q * f.log_diam[w];
        if (maximize ? v > best : v < best) {
          best = v;
          path[b] = w;
        }
      }
    }
    double nq = ratio();
    if (std::fabs(nq - q) <= 1e-15 * std::max(1.0, std::fabs(q))) {
      q = nq;
      break;
    }
    q = nq;
  }
  return q;
}

}  // namespace

ProductScheme build_moran_M(const IntervalMap& map, const MeasureSpec& mu, MoranOptions options) {
  return build_product(map, mu, options, false);
}

ProductScheme build_moran_padded(const IntervalMap& map, const MeasureSpec& mu, MoranOptions options) {
  return build_product(map, mu, options, true);
}

std::vector<double> block_weight_sums(const ProductScheme& scheme) {
  std::vector<double> out;
  for (const auto& b : scheme.blocks) {
    double s = 0.0;
    for (double lr : b.log_rho) s += std::exp(lr);
    out.push_back(s);
  }
  return out;
}

Word sample_scheme_word(const ProductScheme& scheme, std::mt19937_64& rng) {
  std::vector<std::size_t> choice;
  for (const auto& b : scheme.blocks) {
    double mx = *std::max_element(b.log_rho.begin(), b.log_rho.end());
    std::vector<double> cdf;
    double acc = 0.0;
    for (double lr : b.log_rho) cdf.push_back(acc += std::exp(lr - mx));
    double u = uniform01(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    choice.push_back(std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1));
  }
  return scheme.concatenate(choice);
}

std::vector<ProductLevelStats> level_statistics(const IntervalMap& map, const ProductScheme& scheme, int candidates,
                                                std::uint64_t seed) {
  const auto& blocks = scheme.blocks;
  if (blocks.empty()) fail(Errc::MalformedScheme, "scheme has no blocks");
  for (const auto& b : blocks) {
    if (b.words.empty() || b.log_rho.size() != b.words.size() || b.log_diam.size() != b.words.size()) {
      fail(Errc::MalformedScheme, "block family is empty or ragged");
    }
  }
  std::vector<std::vector<std::size_t>> sampled;
  for (int c = 0; c < candidates; ++c) {
    auto rng = task_rng(seed, static_cast<std::uint64_t>(c));
    std::vector<std::size_t> choice;
    for (const auto& b : blocks) {
      double mx = *std::max_element(b.log_rho.begin(), b.log_rho.end());
      double acc = 0.0;
      std::vector<double> cdf;
      for (double lr : b.log_rho) cdf.push_back(acc += std::exp(lr - mx));
      auto it = std::upper_bound(cdf.begin(), cdf.end(), uniform01(rng) * acc);
      choice.push_back(std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1));
    }
    sampled.push_back(std::move(choice));
  }
  const double h = scheme.targets.entropy, lam = scheme.targets.lyapunov;
  std::vector<ProductLevelStats> out(blocks.size());
  double eta_min = 0.0, eta_max = 0.0, r = 0.0, R = 0.0, sum_l = 0.0, sum_le = 0.0, sum_lke = 0.0;
  std::uint64_t length = 0;
  for (std::size_t t = 0; t < blocks.size(); ++t) {
    const auto& b = blocks[t];
    eta_min += *std::min_element(b.log_rho.begin(), b.log_rho.end());
    eta_max += *std::max_element(b.log_rho.begin(), b.log_rho.end());
    r += *std::min_element(b.log_diam.begin(), b.log_diam.end());
    R += *std::max_element(b.log_diam.begin(), b.log_diam.end());
    length += static_cast<std::uint64_t>(b.length + b.pad);
    sum_l += b.length;
    sum_le += b.length * b.eps;
    sum_lke += b.length * (1.0 + static_cast<double>(b.pad) / b.length) * b.eps;
    ProductLevelStats& s = out[t];
    s.level = static_cast<int>(t) + 1;
    s.stage = b.stage;
    s.length = length;
    s.log_eta_min = eta_min;
    s.log_eta_max = eta_max;
    s.log_r = r;
    s.log_R = R;
    s.balance = eta_min / eta_max;
    s.growth_ratio = R / r;
    s.entropy_sandwich = -(h * sum_l + sum_le) <= eta_min + 1e-9 &&
                         eta_max <= -static_cast<double>(t + 1) * std::log(1.0 - scheme.delta) - (h * sum_l - sum_le) + 1e-9;
    const double slack = scheme.padded ? sum_lke : sum_le + sum_l * b.eps;
    s.diameter_sandwich = R <= -sum_l * lam + slack + 1e-9 && r >= -sum_l * lam - slack - 1e-9;
  }
  for (std::size_t t = 0; t + 1 < out.size(); ++t) out[t].step_ratio = out[t + 1].log_r / out[t].log_r;

  parallel_for(out.size(), 1, [&](std::size_t t) {
    std::vector<std::size_t> pmin, pmax;
    out[t].dim_min = ratio_extreme(blocks, t + 1, false, pmin);
    out[t].dim_max = ratio_extreme(blocks, t + 1, true, pmax);
    double emin = std::numeric_limits<double>::infinity(), emax = kNegInf;
    auto exact = [&](const std::vector<std::size_t>& path) {
      std::vector<std::size_t> prefix(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(t + 1));
      double leta = 0.0;
      for (std::size_t b = 0; b <= t; ++b) leta += blocks[b].log_rho[prefix[b]];
      double v = leta / cylinder(map, scheme.concatenate(prefix)).log_diam;
      emin = std::min(emin, v);
      emax = std::max(emax, v);
    };
    exact(pmin);
    exact(pmax);
    for (const auto& c : sampled) exact(c);
    out[t].exact_dim_min = emin;
    out[t].exact_dim_max = emax;
  });
  return out;
}

}  // namespace dimlab
