#include "dimlab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dimlab/error.hpp"
#include "dimlab/parallel.hpp"

namespace dimlab {

BoxCountReport box_dimension(std::vector<double> points, int j_min, int j_max) {
  if (points.size() < kMinBoxPoints) fail(Errc::TooFewPoints, "box counting needs at least 10^4 points");
  if (j_min < 4 || j_max > 20 || j_min >= j_max) fail(Errc::InvalidArgument, "scale range must lie in [4, 20]");
  for (double x : points) {
    if (!(x >= 0.0 && x <= 1.0)) fail(Errc::OutOfDomain, "sample point outside [0,1]");
  }
  std::sort(points.begin(), points.end());
  BoxCountReport rep;
  rep.points = points.size();
  std::vector<double> xs, ys;
  for (int j = j_min; j <= j_max; ++j) {
    const double scale = std::ldexp(1.0, j);
    const auto top = static_cast<std::uint64_t>(scale) - 1;
    std::uint64_t count = 0, last = std::numeric_limits<std::uint64_t>::max();
    for (double x : points) {
      auto box = std::min(static_cast<std::uint64_t>(x * scale), top);
      if (box != last) {
        ++count;
        last = box;
      }
    }
    rep.j.push_back(j);
    rep.scales.push_back(1.0 / scale);
    rep.counts.push_back(count);
    xs.push_back(j);
    ys.push_back(std::log2(static_cast<double>(count)));
  }
  auto fit = least_squares(xs, ys);
  rep.slope = fit.slope;
  rep.intercept = fit.intercept;
  rep.r2 = fit.r2;
  return rep;
}

namespace {

template <class Draw>
std::vector<double> batched(std::size_t count, std::uint64_t seed, int threads, Draw&& draw) {
  constexpr std::size_t kBatch = 4096;
  const std::size_t batches = (count + kBatch - 1) / kBatch;
  std::vector<double> out(count);
  parallel_for(batches, threads, [&](std::size_t b) {
    auto rng = task_rng(seed, b);
    for (std::size_t i = b * kBatch; i < std::min(count, (b + 1) * kBatch); ++i) out[i] = draw(rng);
  });
  return out;
}

}  // namespace

std::vector<double> sample_scheme_points(const MoranScheme& scheme, std::size_t count, std::uint64_t seed,
                                         int threads) {
  scheme.validate();
  // children lists with cumulative weights
  const std::size_t L = scheme.levels.size();
  std::vector<std::vector<std::vector<std::size_t>>> kids(L);
  for (std::size_t n = 0; n + 1 < L; ++n) {
    kids[n].resize(scheme.levels[n].size());
    const MoranLevel& next = scheme.levels[n + 1];
    for (std::size_t i = 0; i < next.size(); ++i) kids[n][static_cast<std::size_t>(next.parent[i])].push_back(i);
  }
  auto pick = [](const std::vector<double>& w, const std::vector<std::size_t>& idx, double u) {
    double total = 0.0;
    for (auto i : idx) total += w[i];
    double acc = 0.0, target = u * total;
    for (auto i : idx) {
      acc += w[i];
      if (target < acc) return i;
    }
    return idx.back();
  };
  std::vector<std::size_t> roots(scheme.levels[0].size());
  for (std::size_t i = 0; i < roots.size(); ++i) roots[i] = i;
  return batched(count, seed, threads, [&](std::mt19937_64& rng) {
    std::size_t cur = pick(scheme.levels[0].weight, roots, uniform01(rng));
    for (std::size_t n = 0; n + 1 < L; ++n) cur = pick(scheme.levels[n + 1].weight, kids[n][cur], uniform01(rng));
    const MoranLevel& last = scheme.levels[L - 1];
    return last.lo[cur] + uniform01(rng) * (last.hi[cur] - last.lo[cur]);
  });
}

std::vector<double> sample_product_points(const IntervalMap& map, const ProductScheme& scheme, std::size_t count,
                                          std::uint64_t seed, int threads) {
  return batched(count, seed, threads, [&](std::mt19937_64& rng) {
    // the first symbols fix the point well below the finest box scale
    Word w = sample_scheme_word(scheme, rng);
    if (w.size() > 256) w.resize(256);
    return symbolic_orbit(map, w)[0];
  });
}

std::vector<double> sample_measure_points(const IntervalMap& map, const MeasureSpec& mu, std::size_t count, int depth,
                                          std::uint64_t seed, int threads) {
  if (depth < 1) fail(Errc::InvalidArgument, "depth must be at least 1");
  if (mu.alphabet() != map.size()) fail(Errc::InvalidArgument, "measure alphabet does not match the map");
  return batched(count, seed, threads, [&](std::mt19937_64& rng) {
    Word w;
    mu.sample(rng, static_cast<std::size_t>(depth), w);
    return symbolic_orbit(map, w)[0];
  });
}

// ---- generic points -------------------------------------------------------------------

std::vector<int> geometric_grid(int n_max, int points) {
  if (n_max < 1 || points < 1) fail(Errc::InvalidArgument, "grid needs n_max >= 1 and at least one point");
  std::vector<int> out;
  for (int i = 0; i < points; ++i) {
    double t = points == 1 ? 1.0 : static_cast<double>(i) / (points - 1);
    int n = static_cast<int>(std::lround(std::pow(static_cast<double>(n_max), t)));
    n = std::clamp(n, 1, n_max);
    if (out.empty() || n > out.back()) out.push_back(n);
  }
  return out;
}

double empirical_distance(const std::vector<double>& orbit, int n, const MomentVector& target,
                          const MomentFamily& family) {
  if (n < 1 || static_cast<std::size_t>(n) > orbit.size()) fail(Errc::InvalidArgument, "n outside the orbit");
  std::vector<double> pts(orbit.begin(), orbit.begin() + n);
  return metric_d(empirical_moments(pts, family.count), target, family).value;
}

GenericTrace generic_trace(const std::vector<double>& orbit, const MomentVector& target, int grid_points,
                           const MomentFamily& family) {
  if (orbit.empty()) fail(Errc::InvalidArgument, "empty orbit");
  if (static_cast<int>(target.m.size()) < family.count) fail(Errc::InvalidArgument, "target has too few moments");
  GenericTrace tr;
  tr.n = geometric_grid(static_cast<int>(orbit.size()), grid_points);
  const auto N = static_cast<std::size_t>(family.count);
  std::vector<double> sums(N, 0.0);
  std::size_t done = 0;
  for (int n : tr.n) {
    for (; done < static_cast<std::size_t>(n); ++done) {
      double p = 1.0;
      for (std::size_t j = 0; j < N; ++j) {
        p *= orbit[done];
        sums[j] += p;
      }
    }
    MomentVector emp;
    emp.m.resize(N);
    for (std::size_t j = 0; j < N; ++j) emp.m[j] = sums[j] / n;
    tr.distance.push_back(metric_d(emp, target, family).value);
  }
  const std::size_t start = tr.n.size() / 2;
  tr.tail_liminf = *std::min_element(tr.distance.begin() + static_cast<std::ptrdiff_t>(start), tr.distance.end());
  tr.tail_limsup = *std::max_element(tr.distance.begin() + static_cast<std::ptrdiff_t>(start), tr.distance.end());
  return tr;
}

GenericTrace generic_trace(const IntervalMap& map, double x, int n_max, const MomentVector& target, int grid_points,
                           const MomentFamily& family) {
  if (n_max < 1) fail(Errc::InvalidArgument, "n_max must be positive");
  std::vector<double> orbit;
  orbit.reserve(static_cast<std::size_t>(n_max));
  for (int k = 0; k < n_max; ++k) {
    if (!(x >= 0.0 && x <= 1.0)) fail(Errc::OrbitEscaped, "orbit left [0,1] at step " + std::to_string(k));
    orbit.push_back(x);
    x = map.eval(x);
  }
  return generic_trace(orbit, target, grid_points, family);
}

GenericTrace generic_trace(const IntervalMap& map, const Word& word, const MomentVector& target, int grid_points,
                           const MomentFamily& family) {
  return generic_trace(symbolic_orbit(map, word), target, grid_points, family);
}

// ---- C_n covering -------------------------------------------------------------------------

namespace {

void simplex_grid(int m, int K, std::vector<int>& cur, std::vector<std::vector<double>>& out) {
  if (static_cast<int>(cur.size()) == m - 1) {
    int used = 0;
    for (int c : cur) used += c;
    std::vector<double> p;
    for (int c : cur) p.push_back(static_cast<double>(c) / K);
    p.push_back(static_cast<double>(K - used) / K);
    out.push_back(std::move(p));
    return;
  }
  int used = 0;
  for (int c : cur) used += c;
  for (int c = K - used; c >= 0; --c) {
    cur.push_back(c);
    simplex_grid(m, K, cur, out);
    cur.pop_back();
  }
}

}  // namespace

CnReport cn_ball_report(const MeasureEvaluator& eval, int parabolic_branch, int n, const CnOptions& opt) {
  const IntervalMap& map = eval.map();
  if (n < 1) fail(Errc::InvalidArgument, "n must be positive");
  if (!(opt.grid_step > 0.0 && opt.grid_step <= 0.5)) fail(Errc::InvalidArgument, "grid step must lie in (0, 0.5]");
  if (!(opt.radius_factor > 0.0 && opt.radius_factor < 1.0)) fail(Errc::InvalidArgument, "radius factor must lie in (0, 1)");
  bool found = false;
  for (const auto& fp : map.fixed_points()) found |= fp.branch == parabolic_branch && fp.parabolic;
  if (!found) fail(Errc::Degenerate, "no parabolic fixed point on the given branch");
  const MomentFamily family(eval.moment_count());
  const MomentVector dp = eval.moments(MeasureSpec::dirac(parabolic_branch));

  CnReport rep;
  rep.n = n;
  rep.radius = opt.radius_factor / n;
  const int K = static_cast<int>(std::lround(1.0 / opt.grid_step));
  std::vector<std::vector<double>> grid;
  std::vector<int> cur;
  simplex_grid(map.size(), K, cur, grid);
  rep.grid_size = grid.size();

  struct Point {
    std::vector<double> p;
    MeasureSpec spec;
    MomentVector mv;
    double dist;
  };
  std::vector<Point> members;
  for (auto& p : grid) {
    MeasureSpec spec = MeasureSpec::bernoulli(p);
    MomentVector mv = eval.moments(spec);
    double d = metric_d(mv, dp, family).value;
    if (d >= 1.0 / n) members.push_back(Point{p, spec, mv, d});
  }
  rep.in_cn = members.size();
  std::vector<std::size_t> centers;
  for (std::size_t i = 0; i < members.size(); ++i) {
    bool covered = false;
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (metric_d(members[i].mv, members[centers[k]].mv, family).value <= rep.radius) {
        ++rep.balls[k].covered;
        covered = true;
        break;
      }
    }
    if (covered) continue;
    centers.push_back(i);
    CnBall b;
    b.center_params = members[i].p;
    b.center = members[i].spec;
    b.dist_to_parabolic = members[i].dist;
    b.covered = 1;
    rep.balls.push_back(std::move(b));
  }
  for (const auto& b : rep.balls) rep.parabolic_excluded &= b.dist_to_parabolic > rep.radius;
  if (opt.with_sup) {
    SupRatioOptions so = opt.sup;
    so.order = 1;
    so.ball.reset();
    rep.unconstrained_sup = sup_dim_ratio(eval, so).s_sup;
    for (auto& b : rep.balls) {
      so.ball = ConstraintBall{b.center, rep.radius};
      b.sup_ratio = sup_dim_ratio(eval, so).s_sup;
    }
  }
  return rep;
}

}  // namespace dimlab
