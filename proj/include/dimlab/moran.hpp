#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dimlab/map_model.hpp"
#include "dimlab/measures.hpp"
#include "dimlab/symbolic.hpp"

namespace dimlab {

// ---- explicit nested-interval schemes ----------------------------------------

struct MoranLevel {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<double> weight;        // eta(I), absolute
  std::vector<std::int64_t> parent;  // index into the previous level, -1 on level 1
  std::size_t size() const { return lo.size(); }
};

struct MoranScheme {
  std::string name;
  std::vector<MoranLevel> levels;  // levels[0] is level 1

  // Throws MalformedScheme on nesting, overlap, childless parents or
  // inconsistent weights (children must sum to the parent within 1e-12).
  void validate() const;
  double min_diam(std::size_t level) const;
  double max_diam(std::size_t level) const;
};

inline constexpr double kWeightConsistencyTol = 1e-12;

// Level-n intervals are the n-cylinders of the map, weighted by the measure.
MoranScheme cylinder_scheme(const IntervalMap& map, int depth, const MeasureSpec& mu);

struct SchemeLevelReport {
  int level = 0;
  std::size_t intervals = 0;
  double log_r = 0.0;
  double log_R = 0.0;
  double growth_ratio = 1.0;   // log R_n / log r_n
  double step_ratio = 1.0;     // log r_{n+1} / log r_n (1 on the last level)
  double balance = 1.0;        // min log eta / max log eta
  double dim_min = 0.0;        // log eta / log diam over the level
  double dim_max = 0.0;
};

struct SchemeReport {
  std::vector<SchemeLevelReport> levels;
  bool growth_flag = false;   // a ratio sequence does not approach 1 over the last half
  bool balance_flag = false;
  bool violated() const { return growth_flag || balance_flag; }
};

SchemeReport check_abstract_scheme(const MoranScheme& scheme);

struct LocalDimension {
  int level = 0;
  std::vector<double> values;  // log eta / log diam per interval
  double min = 0.0;
  double max = 0.0;
};

LocalDimension local_dimension(const MoranScheme& scheme, int level);

// ---- dynamics-driven construction ---------------------------------------------

struct BlockSchedule {
  std::vector<double> eps;       // eps_i = 1/i
  std::vector<int> cont_rank;    // uniform-continuity rank per stage
  std::vector<int> m;            // Egorov ranks, m_{i+1} >= 2 m_i; one extra entry closes the last stage
  std::vector<int> pad_factor;   // ceil(sqrt(i)), zero when unpadded
  std::vector<int> lengths;      // relabeled block lengths l*_t (data symbols only)
  std::vector<int> stage_of;     // stage of block t, 1-based

  int stages() const { return static_cast<int>(eps.size()); }
  int p(int stage) const;                // blocks per stage minus one
  std::uint64_t total_length() const;    // with padding

  // Fills lengths and stage_of from m.
  void relabel();
};

BlockSchedule make_schedule(const std::vector<int>& m, bool padded);

struct ScheduleReport {
  std::vector<double> max_step_ratio;     // per stage, max_j l_{i,j+1}/l_{i,j}
  std::vector<double> partial_sum_ratio;  // n_{q+1}/n_q per block
  std::vector<double> pad_eps;            // pad_factor_i * eps_i
  std::vector<double> pad_ratio;          // pad_factor_{i+1}/pad_factor_i
};

ScheduleReport check_schedule(const BlockSchedule& schedule);

// Targets of the statistical bounds: moments, Lyapunov exponent and entropy.
struct HarvestTargets {
  std::vector<double> moments;
  double lyapunov = 0.0;
  double entropy = 0.0;
};

HarvestTargets harvest_targets(const MeasureSpec& mu, const MeasureEvaluator& eval, int k);

struct HarvestOptions {
  double delta = 0.1;
  int samples = 2000;
  int tail = 48;       // extra symbols after the checked range, for the orbit
  int retries = 6;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct HarvestResult {
  int stage = 0;
  double eps = 0.0;
  int m = 0;
  int l_max = 0;
  std::vector<Word> words;  // retained sequences, truncated to l_max
  double retained = 0.0;    // Monte-Carlo estimate of the retained mass
  int attempts = 0;
  std::uint64_t fail_moment = 0;
  std::uint64_t fail_lyapunov = 0;
  std::uint64_t fail_entropy = 0;
};

// Samples words from mu and keeps those whose prefixes of every length
// n in [m, l_max] satisfy the three bounds within eps = 1/stage. When the
// retained mass is below 1 - delta, m (and l_max with it) doubles.
HarvestResult harvest_blocks(const IntervalMap& map, const MeasureSpec& mu, const HarvestTargets& targets, int stage,
                             int m, int l_max, const HarvestOptions& options);

struct BlockFamily {
  int stage = 0;
  int index = 0;   // j within the stage
  int length = 0;  // data symbols
  int pad = 0;     // pad symbols appended
  double eps = 0.0;
  double mass = 1.0;  // estimate of mu(Omega(i, j))
  std::vector<Word> words;  // data part only
  std::vector<double> log_rho;
  std::vector<double> log_mu;
  std::vector<double> log_diam;  // cylinder of data + pad as a standalone word
  std::vector<double> sum_g;     // S_l log|T'| along the data part
};

struct ProductScheme {
  std::string map_name;
  bool padded = false;
  int pad_symbol = 0;
  double delta = 0.1;
  HarvestTargets targets;
  BlockSchedule schedule;
  std::vector<BlockFamily> blocks;

  Word pad_word(std::size_t block) const;
  Word concatenate(const std::vector<std::size_t>& choice) const;  // one word index per block (prefix)
};

struct MoranOptions {
  int stages = 3;
  bool padded = false;
  int pad_symbol = 0;
  bool strict = true;
  int m_min = 8;
  int family_size = 64;
  int cont_depth_cap = 14;
  int eval_depth = 14;
  std::uint64_t length_budget = 4096;
  HarvestOptions harvest;
};

// Concatenated block construction; padded mode appends pad_symbol^(k l) to
// every harvested block. Word weights are mu[w] / mu(Omega(i, j)).
ProductScheme build_moran_M(const IntervalMap& map, const MeasureSpec& mu, MoranOptions options = {});
ProductScheme build_moran_padded(const IntervalMap& map, const MeasureSpec& mu, MoranOptions options = {});

// Level t of a product scheme is the concatenation of the first t blocks.
struct ProductLevelStats {
  int level = 0;
  int stage = 0;
  std::uint64_t length = 0;  // symbols, with padding
  double log_eta_min = 0.0;
  double log_eta_max = 0.0;
  double log_r = 0.0;        // additive (sum of block log diameters)
  double log_R = 0.0;
  double balance = 1.0;      // min log eta / max log eta
  double growth_ratio = 1.0; // log R / log r
  double step_ratio = 1.0;   // log r_{t+1} / log r_t
  double dim_min = 0.0;      // extremes of log eta / log diam over the level
  double dim_max = 0.0;
  double exact_dim_min = 0.0;  // same on candidate paths with exact cylinders
  double exact_dim_max = 0.0;
  bool entropy_sandwich = true;
  bool diameter_sandwich = true;
};

std::vector<ProductLevelStats> level_statistics(const IntervalMap& map, const ProductScheme& scheme, int candidates = 8,
                                                std::uint64_t seed = 0);

// Per-block sum of represented weights (1 for the implicit full family).
std::vector<double> block_weight_sums(const ProductScheme& scheme);

// Scheme point: one word per block drawn with probability proportional to rho.
Word sample_scheme_word(const ProductScheme& scheme, std::mt19937_64& rng);

}  // namespace dimlab
