#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "dimlab/map_model.hpp"
#include "dimlab/symbolic.hpp"

namespace dimlab {

struct Bernoulli {
  std::vector<double> p;
};

// Markov chain of the given order over m symbols. Row c of `transition`
// (length m) is the law of the next symbol after context c, where the
// context is the last `order` symbols read as a base-m number, oldest first.
struct Markov {
  int order = 1;
  int m = 2;
  std::vector<double> transition;  // m^order rows of m entries
  std::vector<double> stationary;  // over the m^order contexts
};

struct DiracFixed {
  int branch = 0;
};

// Product of independent blocks of length n drawn from `weights`; the
// n-Bernoulli measure of the pressure lower bound. Entropy and Lyapunov
// exponent are per shift step.
struct BlockBernoulli {
  int n = 1;
  std::vector<Word> words;
  std::vector<double> weights;
};

class MeasureSpec {
 public:
  using Variant = std::variant<Bernoulli, Markov, DiracFixed, BlockBernoulli>;

  MeasureSpec() : v_(Bernoulli{{0.5, 0.5}}) { finish(); }

  static MeasureSpec bernoulli(std::vector<double> p);
  static MeasureSpec markov(const std::vector<std::vector<double>>& P);
  static MeasureSpec markov_order(int order, int m, std::vector<double> transition);
  static MeasureSpec dirac(int branch);
  static MeasureSpec block_bernoulli(int n, std::vector<Word> words, std::vector<double> weights);

  const Variant& variant() const { return v_; }
  bool is_dirac() const { return std::holds_alternative<DiracFixed>(v_); }
  int alphabet() const;
  double entropy() const { return entropy_; }
  std::string describe() const;

  // log mu[w]; -inf for null cylinders. Not defined for block measures
  // unless |w| is a multiple of the block length.
  double word_log_prob(const Word& w) const;
  // log mu[w_1..w_n] for n = 1..|w|; not available for block measures.
  std::vector<double> prefix_log_probs(const Word& w) const;
  // Frequency of each symbol under the (stationary) measure.
  std::vector<double> symbol_frequencies() const;
  void sample(std::mt19937_64& rng, std::size_t length, Word& out) const;

 private:
  Variant v_;
  double entropy_ = 0.0;
  void finish();
};

// Shannon entropy in nats with 0 log 0 = 0.
double shannon(const std::vector<double>& p);

struct MomentFamily {
  int count = 32;
  MomentFamily() = default;
  explicit MomentFamily(int n);
  double tail_bound() const;  // 2^(1-N)
};

struct MomentVector {
  std::vector<double> m;           // m[j-1] = integral of x^j
  double quadrature_bound = 0.0;   // bound on the induced error in metric_d
};

struct MetricValue {
  double value = 0.0;
  double truncation_bound = 0.0;
  double quadrature_bound = 0.0;
};

MetricValue metric_d(const MomentVector& a, const MomentVector& b, const MomentFamily& family = {});

// Lyapunov exponents and moments of measure push-forwards. Linear maps use
// closed forms or the self-affine moment recursion; otherwise depth-d
// cylinder quadrature with tables aggregated by the statistic that fixes the
// word probability (symbol counts, or context plus transition counts).
class MeasureEvaluator {
 public:
  MeasureEvaluator(const IntervalMap& map, int depth = 16, int moments = 32, int threads = 1);
  ~MeasureEvaluator();
  MeasureEvaluator(const MeasureEvaluator&) = delete;
  MeasureEvaluator& operator=(const MeasureEvaluator&) = delete;

  const IntervalMap& map() const { return map_; }
  int depth() const { return depth_; }
  int moment_count() const { return moments_; }

  double lyapunov(const MeasureSpec& spec) const;
  MomentVector moments(const MeasureSpec& spec) const;

 private:
  struct Table;
  const Table& table(int order) const;
  IntervalMap map_;
  int depth_;
  int moments_;
  int threads_;
  mutable std::mutex mutex_;
  mutable std::map<int, std::unique_ptr<Table>> tables_;
};

double entropy(const MeasureSpec& spec);
double lyapunov(const MeasureSpec& spec, const IntervalMap& map, int depth = 16);
MomentVector moments(const MeasureSpec& spec, const IntervalMap& map, const MomentFamily& family = {}, int depth = 16);
MetricValue metric_d(const MeasureSpec& mu, const MeasureSpec& nu, const IntervalMap& map,
                     const MomentFamily& family = {}, int depth = 16);

// Moments 1/(j+1) of Lebesgue measure on [0,1].
MomentVector lebesgue_moments(int count);

// Empirical moments (1/n) sum x_j^i, i = 1..count.
MomentVector empirical_moments(const std::vector<double>& orbit, int count);

struct LevelCheck {
  std::vector<bool> passed;       // per observable x^i, i = 1..k
  std::vector<double> deviation;  // |A_n x^i - m_i|
  bool all() const;
};

LevelCheck level_constraint_check(const std::vector<double>& orbit, const MomentVector& target, int k, double eps);
LevelCheck level_constraint_check(const IntervalMap& map, double x, int n, const MomentVector& target, int k, double eps);
LevelCheck level_constraint_check(const IntervalMap& map, const Word& word, const MomentVector& target, int k,
                                  double eps);

struct ParabolicSimplex {
  std::vector<int> branches;     // branch index of each vertex
  std::vector<double> points;    // vertex location p_i
  int dimension() const { return static_cast<int>(points.size()) - 1; }
  std::vector<MeasureSpec> vertices() const;
};

ParabolicSimplex parabolic_simplex(const IntervalMap& map);

struct SeparationReport {
  double gamma = 0.0;
  std::vector<double> argmin;  // barycentric weights of the closest simplex point
  int k = 0;
  double tail_bound = 0.0;     // 2^(1-k)
  bool separated = false;      // gamma > 2^(1-k)
};

SeparationReport separation_gamma(const MeasureSpec& m, int k, const ParabolicSimplex& simplex,
                                  const MeasureEvaluator& eval, double resolution = 1e-3);

}  // namespace dimlab
