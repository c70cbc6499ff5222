#include "dimlab/pressure.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dimlab/error.hpp"
#include "dimlab/parallel.hpp"

namespace dimlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const std::vector<double>& v) {
  if (v.empty()) return kNegInf;
  double mx = *std::max_element(v.begin(), v.end());
  if (mx == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

std::vector<Observable> moment_observables(int k) {
  std::vector<Observable> obs;
  for (int i = 1; i <= k; ++i) obs.push_back(Observable::moment(i));
  return obs;
}

bool witness_passes(const GoodCylinderFilter& f, const Witness& w, int n) {
  for (int i = 0; i < f.k; ++i) {
    if (!(std::fabs(w.sum_f[i] / n - f.alpha[static_cast<std::size_t>(i)]) < f.eps)) return false;
  }
  return !f.use_delta || w.sum_g / n >= f.delta - f.eps;
}

bool node_passes(const GoodCylinderFilter& f, const NodeState& s, int n) {
  return witness_passes(f, s.w[0], n) || witness_passes(f, s.w[1], n);
}

}  // namespace

const char* rate_mode_name(RateMode mode) { return mode == RateMode::Window ? "window" : "tilted"; }

// ---- filter -----------------------------------------------------------------

GoodCylinderFilter GoodCylinderFilter::unconstrained() {
  GoodCylinderFilter f;
  f.k = 0;
  f.use_delta = false;
  f.delta = 0.0;
  f.eps = 0.0;
  return f;
}

GoodCylinderFilter GoodCylinderFilter::moments_of(const MomentVector& mu, int k, double delta, double eps) {
  if (k < 0 || static_cast<std::size_t>(k) > mu.m.size()) fail(Errc::InvalidArgument, "k outside the moment range");
  GoodCylinderFilter f;
  f.k = k;
  f.alpha.assign(mu.m.begin(), mu.m.begin() + k);
  f.delta = delta;
  f.eps = eps;
  f.validate();
  return f;
}

void GoodCylinderFilter::validate() const {
  if (k < 0 || k > kMaxTracked) fail(Errc::InvalidArgument, "filter: k must lie in [0, 8]");
  if (static_cast<int>(alpha.size()) != k) fail(Errc::InvalidArgument, "filter: alpha must have k entries");
  for (double a : alpha) {
    if (!std::isfinite(a)) fail(Errc::InvalidArgument, "filter: alpha must be finite");
  }
  if (use_delta) {
    if (!(delta > 0.0)) fail(Errc::InvalidArgument, "filter: delta must be positive");
    if (!(eps > 0.0 && eps < delta)) fail(Errc::InvalidArgument, "filter: eps must lie in (0, delta)");
  } else if (k > 0 && !(eps > 0.0)) {
    fail(Errc::InvalidArgument, "filter: eps must be positive");
  }
}

GoodCylinderFilter GoodCylinderFilter::with_eps(double e) const {
  GoodCylinderFilter f = *this;
  f.eps = e;
  f.validate();
  return f;
}

// ---- regression -------------------------------------------------------------

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) fail(Errc::InvalidArgument, "least squares needs at least two points");
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0) fail(Errc::InvalidArgument, "least squares with constant abscissa");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - fit.intercept - fit.slope * x[i];
    ssr += r * r;
  }
  fit.stderr_slope = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
  fit.r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  return fit;
}

// ---- table --------------------------------------------------------------------

PressureTable::PressureTable(const IntervalMap& map, const GoodCylinderFilter& filter, int n_min, int n_max,
                             bool keep_witnesses, int threads, std::uint64_t budget)
    : filter_(filter), n_min_(n_min), n_max_(n_max), witnesses_(keep_witnesses) {
  filter_.validate();
  if (n_min < 1 || n_max < n_min) fail(Errc::InvalidArgument, "invalid depth range");
  if (n_max - n_min < 1) fail(Errc::InvalidArgument, "rate fit needs at least two depths");
  cylinder_count(map, n_max, budget);
  const int k = filter_.k;
  CylinderStepper st(map, moment_observables(k));
  std::vector<Depth> init(static_cast<std::size_t>(n_max - n_min + 1));
  for (int n = n_min; n <= n_max; ++n) init[static_cast<std::size_t>(n - n_min)].n = n;
  auto parts = traverse_cylinders(st, n_max, threads, init, [&](std::vector<Depth>& acc, int depth, const NodeState& s, const Symbol*) {
    if (depth < n_min) return;
    Depth& d = acc[static_cast<std::size_t>(depth - n_min)];
    d.log_diam.push_back(s.log_diam);
    d.min_sum_g.push_back(s.min_sum_g());
    d.pass.push_back(node_passes(filter_, s, depth) ? 1 : 0);
    if (witnesses_) {
      for (int w = 0; w < 3; ++w) {
        for (int i = 0; i < k; ++i) d.centred.push_back(s.w[w].sum_f[i] - depth * filter_.alpha[static_cast<std::size_t>(i)]);
        d.centred.push_back(filter_.use_delta ? s.w[w].sum_g - depth * filter_.delta : 0.0);
      }
    }
  });
  depths_ = std::move(init);
  for (auto& part : parts) {
    for (std::size_t i = 0; i < part.size(); ++i) {
      Depth& dst = depths_[i];
      Depth& src = part[i];
      dst.log_diam.insert(dst.log_diam.end(), src.log_diam.begin(), src.log_diam.end());
      dst.min_sum_g.insert(dst.min_sum_g.end(), src.min_sum_g.begin(), src.min_sum_g.end());
      dst.pass.insert(dst.pass.end(), src.pass.begin(), src.pass.end());
      dst.centred.insert(dst.centred.end(), src.centred.begin(), src.centred.end());
    }
  }
}

std::vector<std::uint64_t> PressureTable::counts() const {
  std::vector<std::uint64_t> out;
  for (const auto& d : depths_) out.push_back(static_cast<std::uint64_t>(std::count(d.pass.begin(), d.pass.end(), 1)));
  return out;
}

PressureEstimate PressureTable::estimate(double s) const {
  if (!(s >= 0.0)) fail(Errc::InvalidArgument, "s must be nonnegative");
  PressureEstimate est;
  est.s = s;
  est.n_min = n_min_;
  est.n_max = n_max_;
  std::vector<double> xs, yd, ys;
  std::vector<double> bd, bs;
  for (const auto& d : depths_) {
    bd.clear();
    bs.clear();
    for (std::size_t c = 0; c < d.pass.size(); ++c) {
      if (!d.pass[c]) continue;
      bd.push_back(s * d.log_diam[c]);
      bs.push_back(-s * d.min_sum_g[c]);
    }
    double ld = log_sum_exp(bd), ls = log_sum_exp(bs);
    est.log_sums_diam.push_back(ld);
    est.log_sums_sup.push_back(ls);
    est.counts.push_back(bd.size());
    if (!bd.empty()) {
      xs.push_back(d.n);
      yd.push_back(ld);
      ys.push_back(ls);
    }
  }
  if (xs.size() < 2) fail(Errc::EmptySelection, "the good-cylinder selection is empty at too many depths");
  auto fd = least_squares(xs, yd);
  auto fs = least_squares(xs, ys);
  est.rate = fd.slope;
  est.rate_stderr = fd.stderr_slope;
  est.rate_sup = fs.slope;
  est.rate_sup_stderr = fs.stderr_slope;
  return est;
}

double PressureTable::tilted_objective(double s, const std::vector<double>& t, double u) const {
  if (!witnesses_) fail(Errc::InvalidArgument, "tilted rate needs a table with witnesses");
  const int k = filter_.k;
  const std::size_t stride = static_cast<std::size_t>(k + 1);
  std::vector<double> xs, ys, v;
  for (const auto& d : depths_) {
    v.resize(d.log_diam.size());
    for (std::size_t c = 0; c < d.log_diam.size(); ++c) {
      const double* base = d.centred.data() + c * 3 * stride;
      double best = kNegInf;
      for (int w = 0; w < 3; ++w) {
        const double* q = base + static_cast<std::size_t>(w) * stride;
        double e = u * q[k];
        for (int i = 0; i < k; ++i) e += t[static_cast<std::size_t>(i)] * q[i];
        best = std::max(best, e);
      }
      v[c] = s * d.log_diam[c] + best;
    }
    xs.push_back(d.n);
    ys.push_back(log_sum_exp(v));
  }
  double penalty = u;
  for (double ti : t) penalty += std::fabs(ti);
  return least_squares(xs, ys).slope + filter_.eps * penalty;
}

namespace {

struct TiltProblem {
  const PressureTable* table;
  double s;
  int k;
  bool use_delta;
};

double tilt_fn(const gsl_vector* x, void* params) {
  auto* p = static_cast<TiltProblem*>(params);
  std::vector<double> t(static_cast<std::size_t>(p->k));
  for (int i = 0; i < p->k; ++i) t[static_cast<std::size_t>(i)] = gsl_vector_get(x, static_cast<std::size_t>(i));
  double u = 0.0;
  if (p->use_delta) {
    double v = gsl_vector_get(x, static_cast<std::size_t>(p->k));
    u = v * v;
  }
  return p->table->tilted_objective(p->s, t, u);
}

}  // namespace

double PressureTable::tilted_rate(double s, std::vector<double>* start) const {
  const int k = filter_.k;
  const int dim = k + (filter_.use_delta ? 1 : 0);
  if (dim == 0) return tilted_objective(s, {}, 0.0);
  TiltProblem prob{this, s, k, filter_.use_delta};
  gsl_multimin_function fn{&tilt_fn, static_cast<std::size_t>(dim), &prob};
  gsl_vector* x = gsl_vector_alloc(static_cast<std::size_t>(dim));
  gsl_vector* step = gsl_vector_alloc(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    double v = (start && static_cast<int>(start->size()) == dim) ? (*start)[static_cast<std::size_t>(i)] : 0.0;
    gsl_vector_set(x, static_cast<std::size_t>(i), v);
    gsl_vector_set(step, static_cast<std::size_t>(i), 0.5);
  }
  gsl_multimin_fminimizer* mm = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, static_cast<std::size_t>(dim));
  gsl_multimin_fminimizer_set(mm, &fn, x, step);
  for (int it = 0; it < 2000; ++it) {
    if (gsl_multimin_fminimizer_iterate(mm) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(mm), 1e-8) == GSL_SUCCESS) break;
  }
  double best = gsl_multimin_fminimizer_minimum(mm);
  if (start) {
    start->assign(static_cast<std::size_t>(dim), 0.0);
    for (int i = 0; i < dim; ++i) (*start)[static_cast<std::size_t>(i)] = gsl_vector_get(mm->x, static_cast<std::size_t>(i));
  }
  gsl_multimin_fminimizer_free(mm);
  gsl_vector_free(x);
  gsl_vector_free(step);
  return best;
}

PressureEstimate pressure_sums(const IntervalMap& map, const GoodCylinderFilter& filter, double s, int n_min, int n_max,
                               int threads) {
  PressureTable table(map, filter, n_min, n_max, false, threads);
  return table.estimate(s);
}

SelectionResult select_good(const IntervalMap& map, const GoodCylinderFilter& filter, int n, bool keep_words,
                            int threads) {
  filter.validate();
  cylinder_count(map, n);
  CylinderStepper st(map, moment_observables(filter.k));
  struct Acc {
    std::uint64_t count = 0;
    std::vector<Word> words;
  };
  auto parts = traverse_cylinders(st, n, threads, Acc{}, [&](Acc& acc, int depth, const NodeState& s, const Symbol* path) {
    if (depth != n || !node_passes(filter, s, n)) return;
    ++acc.count;
    if (keep_words) {
      Word w(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = path[n - 1 - i];
      acc.words.push_back(std::move(w));
    }
  });
  SelectionResult out;
  for (auto& p : parts) {
    out.count += p.count;
    for (auto& w : p.words) out.words.push_back(std::move(w));
  }
  std::sort(out.words.begin(), out.words.end());
  double var = variation(map, Observable::log_derivative(), n, threads);
  for (int i = 1; i <= filter.k; ++i) var = std::max(var, variation(map, Observable::moment(i), n, threads));
  out.variation_budget = var / n;
  return out;
}

// ---- Bowen root -----------------------------------------------------------------

BowenOptions default_bowen_options(RateMode mode) {
  BowenOptions o;
  o.mode = mode;
  if (mode == RateMode::Tilted) {
    o.n_min = 8;
    o.n_max = 14;
  }
  return o;
}

BowenResult bowen_root(const PressureTable& table, RateMode mode, double s_tol) {
  if (!(s_tol > 0.0)) fail(Errc::InvalidArgument, "s_tol must be positive");
  BowenResult res;
  res.mode = mode;
  std::vector<double> tilt;
  auto rate = [&](double s) {
    if (mode == RateMode::Window) return table.estimate(s).rate;
    return table.tilted_rate(s, &tilt);
  };
  res.rate_at_zero = rate(0.0);
  if (!(res.rate_at_zero > 0.0)) fail(Errc::NoBracket, "rate at s = 0 is not positive; the selection is too thin");
  double lo = 0.0, hi = 1.0;
  int grow = 0;
  while (rate(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++grow > 60) fail(Errc::NoBracket, "rate stays positive for all tested s");
  }
  while (hi - lo > s_tol) {
    double mid = 0.5 * (lo + hi);
    if (rate(mid) > 0.0) lo = mid; else hi = mid;
    ++res.iterations;
  }
  res.bracket_lo = lo;
  res.bracket_hi = hi;
  res.s = 0.5 * (lo + hi);
  res.tilt = tilt;
  return res;
}

BowenResult bowen_root(const IntervalMap& map, const GoodCylinderFilter& filter, const BowenOptions& options) {
  PressureTable table(map, filter, options.n_min, options.n_max, options.mode == RateMode::Tilted, options.threads);
  return bowen_root(table, options.mode, options.s_tol);
}

double extrapolate_to_zero(const std::vector<double>& h, const std::vector<double>& v) {
  if (h.empty() || h.size() != v.size()) fail(Errc::InvalidArgument, "extrapolation needs matching samples");
  double out = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    double w = 1.0;
    for (std::size_t j = 0; j < h.size(); ++j) {
      if (j == i) continue;
      if (h[i] == h[j]) fail(Errc::InvalidArgument, "extrapolation needs distinct abscissae");
      w *= (0.0 - h[j]) / (h[i] - h[j]);
    }
    out += w * v[i];
  }
  return out;
}

BowenSweep bowen_sweep(const IntervalMap& map, const GoodCylinderFilter& filter, const std::vector<double>& eps_list,
                       const BowenOptions& options) {
  if (eps_list.empty()) fail(Errc::InvalidArgument, "empty eps sweep");
  BowenSweep sw;
  sw.eps = eps_list;
  for (double e : eps_list) sw.roots.push_back(bowen_root(map, filter.with_eps(e), options).s);
  sw.extrapolated = extrapolate_to_zero(sw.eps, sw.roots);
  auto [mn, mx] = std::minmax_element(sw.roots.begin(), sw.roots.end());
  sw.spread = *mx - *mn;
  return sw;
}

// ---- n-Bernoulli ------------------------------------------------------------------

MeasureSpec n_bernoulli_measure(int n, std::vector<Word> words, std::vector<double> weights) {
  return MeasureSpec::block_bernoulli(n, std::move(words), std::move(weights));
}

NBernoulliResult n_bernoulli_from_selection(const IntervalMap& map, const GoodCylinderFilter& filter, double s, int n,
                                            BlockWeighting weighting, int threads) {
  filter.validate();
  cylinder_count(map, n);
  CylinderStepper st(map, moment_observables(filter.k));
  struct Acc {
    std::vector<Word> words;
    std::vector<double> logw;
    std::vector<double> sum_g_lo;
    double osc = 0.0;
  };
  auto parts = traverse_cylinders(st, n, threads, Acc{}, [&](Acc& acc, int depth, const NodeState& nd, const Symbol* path) {
    if (depth != n || !node_passes(filter, nd, n)) return;
    Word w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = path[n - 1 - i];
    acc.words.push_back(std::move(w));
    double mn = nd.min_sum_g();
    double mx = std::max({nd.w[0].sum_g, nd.w[1].sum_g, nd.w[2].sum_g});
    acc.logw.push_back(weighting == BlockWeighting::Sup ? -s * mn : s * nd.log_diam);
    acc.sum_g_lo.push_back(nd.w[0].sum_g);
    acc.osc = std::max(acc.osc, mx - mn);
  });
  Acc all;
  for (auto& p : parts) {
    all.words.insert(all.words.end(), p.words.begin(), p.words.end());
    all.logw.insert(all.logw.end(), p.logw.begin(), p.logw.end());
    all.sum_g_lo.insert(all.sum_g_lo.end(), p.sum_g_lo.begin(), p.sum_g_lo.end());
    all.osc = std::max(all.osc, p.osc);
  }
  if (all.words.empty()) fail(Errc::EmptySelection, "no cylinder passes the filter");
  NBernoulliResult out;
  out.log_sum = log_sum_exp(all.logw);
  std::vector<double> w(all.logw.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(all.logw[i] - out.log_sum);
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= total;
  double lam = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) lam += w[i] * all.sum_g_lo[i];
  out.lyapunov_step = lam / n;
  out.max_oscillation = all.osc;
  out.measure = n_bernoulli_measure(n, std::move(all.words), std::move(w));
  out.entropy_step = out.measure.entropy();
  return out;
}

// ---- variational optimizer ------------------------------------------------------------

namespace {

void project_simplex(double* v, int n) {
  std::vector<double> u(v, v + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, tau = 0.0;
  for (int j = 0; j < n; ++j) {
    css += u[static_cast<std::size_t>(j)];
    double t = (css - 1.0) / (j + 1);
    if (u[static_cast<std::size_t>(j)] - t > 0) tau = t;
  }
  for (int i = 0; i < n; ++i) v[i] = std::max(v[i] - tau, 0.0);
}

struct Candidate {
  bool feasible = false;
  double value = kNegInf;
  std::vector<double> theta;
  double h = 0.0, lam = 0.0, dist = 0.0;
};

}  // namespace

SupRatioResult sup_dim_ratio(const MeasureEvaluator& eval, const SupRatioOptions& opt) {
  const IntervalMap& map = eval.map();
  const int m = map.size();
  if (opt.order < 1) fail(Errc::InvalidArgument, "family order must be at least 1");
  if (opt.restarts < 1 || opt.iterations < 1) fail(Errc::InvalidArgument, "optimizer needs restarts and iterations");
  int rows = 1;
  for (int i = 1; i < opt.order; ++i) rows *= m;
  const int dim = rows * m;
  if (opt.ball && !(opt.ball->radius >= 0.0)) fail(Errc::InvalidArgument, "ball radius must be nonnegative");

  auto make_spec = [&](const std::vector<double>& theta) {
    std::vector<double> p(theta.size());
    for (int r = 0; r < rows; ++r) {
      double sum = 0.0;
      for (int a = 0; a < m; ++a) sum += std::max(theta[static_cast<std::size_t>(r * m + a)], 0.0);
      for (int a = 0; a < m; ++a) {
        p[static_cast<std::size_t>(r * m + a)] = sum > 0 ? std::max(theta[static_cast<std::size_t>(r * m + a)], 0.0) / sum : 1.0 / m;
      }
      // exact normalization of the row
      double s2 = 0.0;
      for (int a = 0; a + 1 < m; ++a) s2 += p[static_cast<std::size_t>(r * m + a)];
      p[static_cast<std::size_t>(r * m + m - 1)] = std::max(0.0, 1.0 - s2);
    }
    if (opt.order == 1) return MeasureSpec::bernoulli(p);
    return MeasureSpec::markov_order(opt.order - 1, m, p);
  };

  MomentVector center_moments;
  std::vector<double> center_theta;
  const MomentFamily family(eval.moment_count());
  if (opt.ball) {
    center_moments = eval.moments(opt.ball->center);
    const auto& cv = opt.ball->center.variant();
    if (opt.order == 1 && std::holds_alternative<Bernoulli>(cv) && opt.ball->center.alphabet() == m) {
      center_theta = std::get<Bernoulli>(cv).p;
    } else if (auto* mk = std::get_if<Markov>(&cv); mk && mk->order == opt.order - 1 && mk->m == m) {
      center_theta = mk->transition;
    }
  }

  struct Eval {
    bool ok = false;
    double h = 0.0, lam = 0.0, dist = 0.0, value = kNegInf;
  };
  auto evaluate = [&](const std::vector<double>& theta) {
    Eval e;
    try {
      MeasureSpec spec = make_spec(theta);
      e.h = spec.entropy();
      e.lam = eval.lyapunov(spec);
      if (opt.ball) e.dist = metric_d(eval.moments(spec), center_moments, family).value;
      e.ok = true;
    } catch (const Error&) {
      e.ok = false;
    }
    return e;
  };
  auto objective = [&](const Eval& e) {
    if (!e.ok) return -1e6;
    double v = e.lam > opt.lyapunov_floor ? e.h / e.lam : -1.0 - (opt.lyapunov_floor - e.lam);
    if (opt.ball && e.dist > opt.ball->radius) {
      double ex = e.dist - opt.ball->radius;
      v -= opt.penalty * ex * ex;
    }
    return v;
  };
  auto G = [&](const std::vector<double>& theta) { return objective(evaluate(theta)); };
  auto feasible = [&](const Eval& e) {
    return e.ok && e.lam > opt.lyapunov_floor && (!opt.ball || e.dist <= opt.ball->radius + 1e-12);
  };

  std::vector<Candidate> results(static_cast<std::size_t>(opt.restarts) + 1);
  parallel_for(static_cast<std::size_t>(opt.restarts), opt.threads, [&](std::size_t r) {
    auto rng = task_rng(opt.seed, r);
    std::vector<double> theta(static_cast<std::size_t>(dim));
    if (r == 0 && !center_theta.empty()) {
      theta = center_theta;
    } else if (r == 0) {
      std::fill(theta.begin(), theta.end(), 1.0 / m);
    } else {
      for (int q = 0; q < rows; ++q) {
        double sum = 0.0;
        for (int a = 0; a < m; ++a) sum += (theta[static_cast<std::size_t>(q * m + a)] = -std::log(1.0 - uniform01(rng)));
        for (int a = 0; a < m; ++a) theta[static_cast<std::size_t>(q * m + a)] /= sum;
      }
    }
    double f = G(theta);
    double step = 0.1;
    std::vector<double> grad(static_cast<std::size_t>(dim)), trial(static_cast<std::size_t>(dim)), probe;
    for (int it = 0; it < opt.iterations && step > 1e-14; ++it) {
      for (int i = 0; i < dim; ++i) {
        probe = theta;
        double hstep = opt.fd_step;
        probe[static_cast<std::size_t>(i)] += hstep;
        double fp = G(probe);
        if (theta[static_cast<std::size_t>(i)] > hstep) {
          probe[static_cast<std::size_t>(i)] -= 2 * hstep;
          grad[static_cast<std::size_t>(i)] = (fp - G(probe)) / (2 * hstep);
        } else {
          grad[static_cast<std::size_t>(i)] = (fp - f) / hstep;
        }
      }
      bool moved = false;
      while (step > 1e-14) {
        for (int i = 0; i < dim; ++i) trial[static_cast<std::size_t>(i)] = theta[static_cast<std::size_t>(i)] + step * grad[static_cast<std::size_t>(i)];
        for (int q = 0; q < rows; ++q) project_simplex(trial.data() + q * m, m);
        double dirdot = 0.0;
        for (int i = 0; i < dim; ++i) dirdot += grad[static_cast<std::size_t>(i)] * (trial[static_cast<std::size_t>(i)] - theta[static_cast<std::size_t>(i)]);
        double ft = G(trial);
        if (ft >= f + 1e-4 * dirdot && ft > f) {
          theta = trial;
          f = ft;
          step = std::min(step * 2.0, 10.0);
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    Eval e = evaluate(theta);
    if (opt.ball && e.ok && e.dist > opt.ball->radius && !center_theta.empty()) {
      // pull back toward the center until the ball constraint holds
      double lo = 0.0, hi = 1.0;
      std::vector<double> mix(static_cast<std::size_t>(dim));
      for (int it = 0; it < 60; ++it) {
        double t = 0.5 * (lo + hi);
        for (int i = 0; i < dim; ++i) mix[static_cast<std::size_t>(i)] = center_theta[static_cast<std::size_t>(i)] + t * (theta[static_cast<std::size_t>(i)] - center_theta[static_cast<std::size_t>(i)]);
        Eval em = evaluate(mix);
        if (em.ok && em.dist <= opt.ball->radius) lo = t; else hi = t;
      }
      for (int i = 0; i < dim; ++i) theta[static_cast<std::size_t>(i)] = center_theta[static_cast<std::size_t>(i)] + lo * (theta[static_cast<std::size_t>(i)] - center_theta[static_cast<std::size_t>(i)]);
      e = evaluate(theta);
    }
    Candidate c;
    c.theta = theta;
    c.feasible = feasible(e);
    c.value = c.feasible ? e.h / e.lam : kNegInf;
    c.h = e.h;
    c.lam = e.lam;
    c.dist = e.dist;
    results[r] = std::move(c);
  });
  if (!center_theta.empty()) {
    Eval e = evaluate(center_theta);
    Candidate c;
    c.theta = center_theta;
    c.feasible = feasible(e);
    c.value = c.feasible ? e.h / e.lam : kNegInf;
    c.h = e.h;
    c.lam = e.lam;
    c.dist = e.dist;
    results.back() = std::move(c);
  }
  SupRatioResult out;
  const Candidate* best = nullptr;
  for (const auto& c : results) {
    if (!c.feasible) continue;
    ++out.feasible_restarts;
    if (!best || c.value > best->value) best = &c;
  }
  if (!best) fail(Errc::Infeasible, "no restart produced a feasible measure");
  out.s_sup = best->value;
  out.argmax = make_spec(best->theta);
  if (opt.order == 1) {
    out.params = std::get<Bernoulli>(out.argmax.variant()).p;
  } else {
    out.params = std::get<Markov>(out.argmax.variant()).transition;
  }
  out.entropy = best->h;
  out.lyapunov = best->lam;
  out.ball_distance = best->dist;
  return out;
}

}  // namespace dimlab
