#pragma once

#include <cstdint>
#include <vector>

#include "dimlab/map_model.hpp"
#include "dimlab/measures.hpp"
#include "dimlab/moran.hpp"
#include "dimlab/pressure.hpp"

namespace dimlab {

struct BoxCountReport {
  std::vector<int> j;
  std::vector<double> scales;          // 2^-j
  std::vector<std::uint64_t> counts;   // occupied dyadic boxes
  double slope = 0.0;                  // fit of log2 count against j
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

inline constexpr std::size_t kMinBoxPoints = 10000;

BoxCountReport box_dimension(std::vector<double> points, int j_min = 4, int j_max = 16);

// Descends the level tree choosing children by weight; the point is uniform
// in the deepest interval reached.
std::vector<double> sample_scheme_points(const MoranScheme& scheme, std::size_t count, std::uint64_t seed,
                                         int threads = 1);
std::vector<double> sample_product_points(const IntervalMap& map, const ProductScheme& scheme, std::size_t count,
                                          std::uint64_t seed, int threads = 1);
// pi(w) for words of length `depth` drawn from mu.
std::vector<double> sample_measure_points(const IntervalMap& map, const MeasureSpec& mu, std::size_t count, int depth,
                                          std::uint64_t seed, int threads = 1);

struct GenericTrace {
  std::vector<int> n;
  std::vector<double> distance;  // d((A_n)_* delta_x, mu)
  double tail_liminf = 0.0;      // over the last half of the grid
  double tail_limsup = 0.0;
};

// Geometric grid of `points` distinct integers in [1, n_max].
std::vector<int> geometric_grid(int n_max, int points);

// Distance between the empirical measure of orbit[0..n) and the target.
double empirical_distance(const std::vector<double>& orbit, int n, const MomentVector& target,
                          const MomentFamily& family = {});

GenericTrace generic_trace(const std::vector<double>& orbit, const MomentVector& target, int grid_points = 48,
                           const MomentFamily& family = {});
// Forward orbit of x; throws OrbitEscaped.
GenericTrace generic_trace(const IntervalMap& map, double x, int n_max, const MomentVector& target,
                           int grid_points = 48, const MomentFamily& family = {});
// Orbit of pi(word . tail), computed backwards.
GenericTrace generic_trace(const IntervalMap& map, const Word& word, const MomentVector& target, int grid_points = 48,
                           const MomentFamily& family = {});

struct CnBall {
  std::vector<double> center_params;
  MeasureSpec center;
  double dist_to_parabolic = 0.0;
  std::size_t covered = 0;
  double sup_ratio = 0.0;  // sup of h/lambda over the ball, Bernoulli family
};

struct CnReport {
  int n = 0;
  double radius = 0.0;  // rho_n < 1/n
  std::size_t grid_size = 0;
  std::size_t in_cn = 0;
  std::vector<CnBall> balls;
  bool parabolic_excluded = true;
  double unconstrained_sup = 0.0;
};

struct CnOptions {
  double grid_step = 0.01;
  double radius_factor = 0.5;  // rho_n = radius_factor / n
  bool with_sup = true;
  SupRatioOptions sup;
};

// Bernoulli grid over the simplex, the members of C_n = {d(mu, delta_p) >= 1/n}
// and a greedy cover of them by balls that avoid delta_p.
CnReport cn_ball_report(const MeasureEvaluator& eval, int parabolic_branch, int n, const CnOptions& options = {});

}  // namespace dimlab
