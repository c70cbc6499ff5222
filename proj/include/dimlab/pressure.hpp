#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dimlab/map_model.hpp"
#include "dimlab/measures.hpp"
#include "dimlab/symbolic.hpp"

namespace dimlab {

// Selects n-cylinders whose witness satisfies |A_n x^i - alpha_i| < eps for
// i <= k and A_n log|T'| >= delta - eps. Witnesses are the left endpoint and
// the image of 1/2; either may pass.
struct GoodCylinderFilter {
  int k = 0;
  std::vector<double> alpha;
  bool use_delta = true;
  double delta = 0.1;
  double eps = 0.05;

  static GoodCylinderFilter unconstrained();
  // alpha_i = i-th moment of mu, i = 1..k
  static GoodCylinderFilter moments_of(const MomentVector& mu, int k, double delta, double eps);
  void validate() const;
  GoodCylinderFilter with_eps(double e) const;
};

enum class RateMode {
  Window,  // literal counts over the selected cylinders
  Tilted,  // exponential (Chernoff) bound of the same counts, minimized over the tilt
};

const char* rate_mode_name(RateMode mode);

struct PressureEstimate {
  double s = 0.0;
  int n_min = 0;
  int n_max = 0;
  std::vector<double> log_sums_diam;  // per n, -inf when the selection is empty
  std::vector<double> log_sums_sup;
  std::vector<std::uint64_t> counts;
  double rate = 0.0;                  // diam-based
  double rate_stderr = 0.0;
  double rate_sup = 0.0;
  double rate_sup_stderr = 0.0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  double r2 = 1.0;
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

// Per-cylinder data for all depths in [n_min, n_max], built by one traversal
// and reused for every exponent s.
class PressureTable {
 public:
  PressureTable(const IntervalMap& map, const GoodCylinderFilter& filter, int n_min, int n_max, bool keep_witnesses,
                int threads = 1, std::uint64_t budget = kDefaultCylinderBudget);

  int n_min() const { return n_min_; }
  int n_max() const { return n_max_; }
  const GoodCylinderFilter& filter() const { return filter_; }
  std::vector<std::uint64_t> counts() const;

  PressureEstimate estimate(double s) const;
  // Chernoff bound of the window rate: slope in n of
  //   log sum_w diam^s exp(max_x [t.(S_n F - n alpha) + u (S_n g - n delta)])
  // plus eps (|t|_1 + u). Needs keep_witnesses.
  double tilted_objective(double s, const std::vector<double>& t, double u) const;
  // Minimum over t and u >= 0; the minimizer is written back to `start`.
  double tilted_rate(double s, std::vector<double>* start = nullptr) const;

 private:
  struct Depth {
    int n = 0;
    std::vector<double> log_diam;
    std::vector<double> min_sum_g;
    std::vector<std::uint8_t> pass;
    std::vector<double> centred;  // per cylinder, 3 witnesses x (k + 1): S_n f_i - n alpha_i, then S_n g - n delta
  };
  GoodCylinderFilter filter_;
  int n_min_ = 0;
  int n_max_ = 0;
  bool witnesses_ = false;
  std::vector<Depth> depths_;
};

PressureEstimate pressure_sums(const IntervalMap& map, const GoodCylinderFilter& filter, double s, int n_min, int n_max,
                               int threads = 1);

struct SelectionResult {
  std::uint64_t count = 0;
  std::vector<Word> words;  // only when requested
  double variation_budget = 0.0;  // max over tracked f of var_n(f)/n
};

SelectionResult select_good(const IntervalMap& map, const GoodCylinderFilter& filter, int n, bool keep_words = false,
                            int threads = 1);

struct BowenOptions {
  RateMode mode = RateMode::Window;
  int n_min = 8;
  int n_max = 20;
  double s_tol = 1e-6;
  int threads = 1;
};

BowenOptions default_bowen_options(RateMode mode);

struct BowenResult {
  double s = 0.0;
  double rate_at_zero = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int iterations = 0;
  RateMode mode = RateMode::Window;
  std::vector<double> tilt;  // minimizing tilt at the root (tilted mode)
};

BowenResult bowen_root(const IntervalMap& map, const GoodCylinderFilter& filter, const BowenOptions& options = {});
BowenResult bowen_root(const PressureTable& table, RateMode mode, double s_tol);

struct BowenSweep {
  std::vector<double> eps;
  std::vector<double> roots;
  double extrapolated = 0.0;  // polynomial extrapolation to eps = 0
  double spread = 0.0;        // max - min over the sweep
};

inline const std::vector<double> kDefaultEpsSweep{0.05, 0.025, 0.0125};

BowenSweep bowen_sweep(const IntervalMap& map, const GoodCylinderFilter& filter, const std::vector<double>& eps_list,
                       const BowenOptions& options = {});
double extrapolate_to_zero(const std::vector<double>& h, const std::vector<double>& v);

// Block-Bernoulli measure from weights over selected n-cylinders.
MeasureSpec n_bernoulli_measure(int n, std::vector<Word> words, std::vector<double> weights);

struct NBernoulliResult {
  MeasureSpec measure;
  double log_sum = 0.0;          // I_n = log sum_w sup exp(-s S_n g)
  double max_oscillation = 0.0;  // max over w of the spread of S_n g on I(w)
  double entropy_step = 0.0;     // h per shift step
  double lyapunov_step = 0.0;    // per shift step
};

enum class BlockWeighting { Sup, Diam };

NBernoulliResult n_bernoulli_from_selection(const IntervalMap& map, const GoodCylinderFilter& filter, double s, int n,
                                            BlockWeighting weighting = BlockWeighting::Sup, int threads = 1);

struct ConstraintBall {
  MeasureSpec center;
  double radius = 0.0;
};

struct SupRatioOptions {
  int order = 1;  // 1: Bernoulli; q > 1: Markov chain with memory q - 1
  std::optional<ConstraintBall> ball;
  double lyapunov_floor = 1e-9;
  int restarts = 20;
  int iterations = 500;
  double fd_step = 1e-6;
  double penalty = 1e4;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct SupRatioResult {
  double s_sup = 0.0;
  MeasureSpec argmax;
  std::vector<double> params;  // probabilities (row-major for Markov)
  double entropy = 0.0;
  double lyapunov = 0.0;
  double ball_distance = 0.0;
  int feasible_restarts = 0;
};

SupRatioResult sup_dim_ratio(const MeasureEvaluator& eval, const SupRatioOptions& options = {});

}  // namespace dimlab
