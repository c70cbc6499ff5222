#include "dimlab/measures.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "dimlab/error.hpp"

namespace dimlab {

namespace {

constexpr double kProbTol = 1e-12;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_probabilities(const std::vector<double>& p, const char* what) {
  if (p.empty()) fail(Errc::InvalidArgument, std::string(what) + ": empty probability vector");
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) fail(Errc::InvalidArgument, std::string(what) + ": negative or non-finite probability");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > kProbTol) fail(Errc::InvalidArgument, std::string(what) + ": probabilities do not sum to 1");
}

int draw(const double* p, int n, double u) {
  double acc = 0.0;
  int last = 0;
  for (int i = 0; i < n; ++i) {
    if (p[i] <= 0.0) continue;
    last = i;
    acc += p[i];
    if (u < acc) return i;
  }
  return last;
}

int ipow(int base, int e) {
  int r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

std::vector<double> stationary_of(const Markov& mk) {
  const int states = ipow(mk.m, mk.order);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(states, states);
  for (int c = 0; c < states; ++c) {
    for (int a = 0; a < mk.m; ++a) {
      int next = (c * mk.m + a) % states;
      A(next, c) += mk.transition[static_cast<std::size_t>(c * mk.m + a)];
    }
  }
  A -= Eigen::MatrixXd::Identity(states, states);
  A.row(states - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(states);
  rhs(states - 1) = 1.0;
  Eigen::VectorXd pi = A.fullPivLu().solve(rhs);
  std::vector<double> out(static_cast<std::size_t>(states));
  for (int c = 0; c < states; ++c) out[static_cast<std::size_t>(c)] = std::max(0.0, pi(c));
  double s = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& v : out) v /= s;
  // verify pi Q = pi
  for (int c2 = 0; c2 < states; ++c2) {
    double acc = 0.0;
    for (int a = 0; a < mk.m; ++a) {
      for (int c = 0; c < states; ++c) {
        if ((c * mk.m + a) % states == c2) acc += out[static_cast<std::size_t>(c)] * mk.transition[static_cast<std::size_t>(c * mk.m + a)];
      }
    }
    if (std::fabs(acc - out[static_cast<std::size_t>(c2)]) > 1e-10) {
      fail(Errc::Degenerate, "Markov chain has no unique stationary vector");
    }
  }
  return out;
}

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

}  // namespace

double shannon(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

// ---- MeasureSpec -------------------------------------------------------------

MeasureSpec MeasureSpec::bernoulli(std::vector<double> p) {
  check_probabilities(p, "bernoulli");
  MeasureSpec s;
  s.v_ = Bernoulli{std::move(p)};
  s.finish();
  return s;
}

MeasureSpec MeasureSpec::markov(const std::vector<std::vector<double>>& P) {
  int m = static_cast<int>(P.size());
  std::vector<double> flat;
  for (const auto& row : P) {
    if (static_cast<int>(row.size()) != m) fail(Errc::InvalidArgument, "markov: transition matrix must be square");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return markov_order(1, m, std::move(flat));
}

MeasureSpec MeasureSpec::markov_order(int order, int m, std::vector<double> transition) {
  if (order < 1 || m < 1) fail(Errc::InvalidArgument, "markov: order and alphabet must be positive");
  if (ipow(m, order + 1) > (1 << 16)) fail(Errc::BudgetExceeded, "markov: too many contexts");
  const int states = ipow(m, order);
  if (static_cast<int>(transition.size()) != states * m) fail(Errc::InvalidArgument, "markov: wrong transition size");
  for (int c = 0; c < states; ++c) {
    std::vector<double> row(transition.begin() + c * m, transition.begin() + (c + 1) * m);
    check_probabilities(row, "markov row");
  }
  Markov mk;
  mk.order = order;
  mk.m = m;
  mk.transition = std::move(transition);
  mk.stationary = stationary_of(mk);
  MeasureSpec s;
  s.v_ = std::move(mk);
  s.finish();
  return s;
}

MeasureSpec MeasureSpec::dirac(int branch) {
  if (branch < 0) fail(Errc::InvalidArgument, "dirac: negative branch index");
  MeasureSpec s;
  s.v_ = DiracFixed{branch};
  s.finish();
  return s;
}

MeasureSpec MeasureSpec::block_bernoulli(int n, std::vector<Word> words, std::vector<double> weights) {
  if (words.empty()) fail(Errc::EmptySelection, "block measure over an empty selection");
  if (n < 1 || words.size() != weights.size()) fail(Errc::InvalidArgument, "block measure: malformed input");
  for (const auto& w : words) {
    if (static_cast<int>(w.size()) != n) fail(Errc::InvalidArgument, "block measure: word length differs from block length");
  }
  for (double w : weights) {
    if (!(w > 0.0)) fail(Errc::InvalidArgument, "block measure: weights must be positive");
  }
  check_probabilities(weights, "block measure");
  MeasureSpec s;
  s.v_ = BlockBernoulli{n, std::move(words), std::move(weights)};
  s.finish();
  return s;
}

void MeasureSpec::finish() {
  if (auto* b = std::get_if<Bernoulli>(&v_)) {
    entropy_ = shannon(b->p);
  } else if (auto* mk = std::get_if<Markov>(&v_)) {
    double h = 0.0;
    const int states = ipow(mk->m, mk->order);
    for (int c = 0; c < states; ++c) {
      std::vector<double> row(mk->transition.begin() + c * mk->m, mk->transition.begin() + (c + 1) * mk->m);
      h += mk->stationary[static_cast<std::size_t>(c)] * shannon(row);
    }
    entropy_ = h;
  } else if (std::holds_alternative<DiracFixed>(v_)) {
    entropy_ = 0.0;
  } else {
    const auto& bb = std::get<BlockBernoulli>(v_);
    entropy_ = shannon(bb.weights) / bb.n;
  }
}

int MeasureSpec::alphabet() const {
  if (auto* b = std::get_if<Bernoulli>(&v_)) return static_cast<int>(b->p.size());
  if (auto* mk = std::get_if<Markov>(&v_)) return mk->m;
  if (auto* d = std::get_if<DiracFixed>(&v_)) return d->branch + 1;
  int top = 0;
  for (const auto& w : std::get<BlockBernoulli>(v_).words) {
    for (Symbol s : w) top = std::max(top, static_cast<int>(s) + 1);
  }
  return top;
}

std::string MeasureSpec::describe() const {
  std::ostringstream os;
  os.precision(6);
  if (auto* b = std::get_if<Bernoulli>(&v_)) {
    os << "bernoulli(";
    for (std::size_t i = 0; i < b->p.size(); ++i) os << (i ? "," : "") << b->p[i];
    os << ")";
  } else if (auto* mk = std::get_if<Markov>(&v_)) {
    os << "markov(order=" << mk->order << ",m=" << mk->m << ")";
  } else if (auto* d = std::get_if<DiracFixed>(&v_)) {
    os << "dirac(branch=" << d->branch << ")";
  } else {
    const auto& bb = std::get<BlockBernoulli>(v_);
    os << "block_bernoulli(n=" << bb.n << ",words=" << bb.words.size() << ")";
  }
  return os.str();
}

std::vector<double> MeasureSpec::prefix_log_probs(const Word& w) const {
  std::vector<double> out(w.size(), kNegInf);
  if (auto* mk = std::get_if<Markov>(&v_)) {
    const int r = mk->order, m = mk->m, states = ipow(m, r);
    const std::size_t head = std::min(w.size(), static_cast<std::size_t>(r));
    for (std::size_t n = 1; n <= head; ++n) out[n - 1] = word_log_prob(Word(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(n)));
    if (w.size() <= static_cast<std::size_t>(r) || out[head - 1] == kNegInf) return out;
    int ctx = 0;
    for (int i = 0; i < r; ++i) ctx = ctx * m + w[static_cast<std::size_t>(i)];
    double lp = out[head - 1];
    for (std::size_t t = static_cast<std::size_t>(r); t < w.size(); ++t) {
      if (w[t] >= m) return out;
      double p = mk->transition[static_cast<std::size_t>(ctx * m + w[t])];
      if (p <= 0.0) return out;
      lp += std::log(p);
      out[t] = lp;
      ctx = (ctx * m + w[t]) % states;
    }
    return out;
  }
  if (std::holds_alternative<BlockBernoulli>(v_)) fail(Errc::InvalidArgument, "block measure has no prefix probabilities");
  double lp = 0.0;
  for (std::size_t t = 0; t < w.size(); ++t) {
    double step = word_log_prob(Word{w[t]});
    if (auto* d = std::get_if<DiracFixed>(&v_)) step = w[t] == d->branch ? 0.0 : kNegInf;
    if (step == kNegInf) return out;
    lp += step;
    out[t] = lp;
  }
  return out;
}

double MeasureSpec::word_log_prob(const Word& w) const {
  if (auto* b = std::get_if<Bernoulli>(&v_)) {
    double lp = 0.0;
    for (Symbol s : w) {
      if (s >= b->p.size() || b->p[s] <= 0.0) return kNegInf;
      lp += std::log(b->p[s]);
    }
    return lp;
  }
  if (auto* mk = std::get_if<Markov>(&v_)) {
    const int r = mk->order, m = mk->m, states = ipow(m, r);
    for (Symbol s : w) {
      if (s >= m) return kNegInf;
    }
    if (static_cast<int>(w.size()) < r) {
      // marginal over contexts that start with w
      int free = r - static_cast<int>(w.size());
      int base = 0;
      for (Symbol s : w) base = base * m + s;
      double p = 0.0;
      int span = ipow(m, free);
      for (int t = 0; t < span; ++t) p += mk->stationary[static_cast<std::size_t>(base * span + t)];
      return p > 0.0 ? std::log(p) : kNegInf;
    }
    int ctx = 0;
    for (int i = 0; i < r; ++i) ctx = ctx * m + w[static_cast<std::size_t>(i)];
    double pi = mk->stationary[static_cast<std::size_t>(ctx)];
    if (pi <= 0.0) return kNegInf;
    double lp = std::log(pi);
    for (std::size_t t = static_cast<std::size_t>(r); t < w.size(); ++t) {
      double p = mk->transition[static_cast<std::size_t>(ctx * m + w[t])];
      if (p <= 0.0) return kNegInf;
      lp += std::log(p);
      ctx = (ctx * m + w[t]) % states;
    }
    return lp;
  }
  if (auto* d = std::get_if<DiracFixed>(&v_)) {
    for (Symbol s : w) {
      if (s != d->branch) return kNegInf;
    }
    return 0.0;
  }
  const auto& bb = std::get<BlockBernoulli>(v_);
  if (w.size() % static_cast<std::size_t>(bb.n) != 0) fail(Errc::InvalidArgument, "block measure: word is not a union of blocks");
  double lp = 0.0;
  for (std::size_t start = 0; start < w.size(); start += static_cast<std::size_t>(bb.n)) {
    Word block(w.begin() + static_cast<std::ptrdiff_t>(start), w.begin() + static_cast<std::ptrdiff_t>(start) + bb.n);
    auto it = std::find(bb.words.begin(), bb.words.end(), block);
    if (it == bb.words.end()) return kNegInf;
    lp += std::log(bb.weights[static_cast<std::size_t>(it - bb.words.begin())]);
  }
  return lp;
}

std::vector<double> MeasureSpec::symbol_frequencies() const {
  if (auto* b = std::get_if<Bernoulli>(&v_)) return b->p;
  if (auto* mk = std::get_if<Markov>(&v_)) {
    std::vector<double> f(static_cast<std::size_t>(mk->m), 0.0);
    const int states = ipow(mk->m, mk->order);
    for (int c = 0; c < states; ++c) {
      for (int a = 0; a < mk->m; ++a) {
        f[static_cast<std::size_t>(a)] += mk->stationary[static_cast<std::size_t>(c)] * mk->transition[static_cast<std::size_t>(c * mk->m + a)];
      }
    }
    return f;
  }
  if (auto* d = std::get_if<DiracFixed>(&v_)) {
    std::vector<double> f(static_cast<std::size_t>(d->branch) + 1, 0.0);
    f.back() = 1.0;
    return f;
  }
  const auto& bb = std::get<BlockBernoulli>(v_);
  std::vector<double> f(static_cast<std::size_t>(alphabet()), 0.0);
  for (std::size_t i = 0; i < bb.words.size(); ++i) {
    for (Symbol s : bb.words[i]) f[s] += bb.weights[i] / bb.n;
  }
  return f;
}

void MeasureSpec::sample(std::mt19937_64& rng, std::size_t length, Word& out) const {
  out.resize(length);
  if (auto* b = std::get_if<Bernoulli>(&v_)) {
    for (auto& s : out) s = static_cast<Symbol>(draw(b->p.data(), static_cast<int>(b->p.size()), uniform01(rng)));
  } else if (auto* mk = std::get_if<Markov>(&v_)) {
    const int r = mk->order, m = mk->m, states = ipow(m, r);
    int ctx = draw(mk->stationary.data(), states, uniform01(rng));
    Word head(static_cast<std::size_t>(r));
    for (int i = r, c = ctx; i-- > 0; c /= m) head[static_cast<std::size_t>(i)] = static_cast<Symbol>(c % m);
    for (std::size_t t = 0; t < length; ++t) {
      if (t < static_cast<std::size_t>(r)) {
        out[t] = head[t];
        continue;
      }
      int a = draw(mk->transition.data() + ctx * m, m, uniform01(rng));
      out[t] = static_cast<Symbol>(a);
      ctx = (ctx * m + a) % states;
    }
  } else if (auto* d = std::get_if<DiracFixed>(&v_)) {
    std::fill(out.begin(), out.end(), static_cast<Symbol>(d->branch));
  } else {
    const auto& bb = std::get<BlockBernoulli>(v_);
    std::size_t t = 0;
    while (t < length) {
      const Word& w = bb.words[static_cast<std::size_t>(draw(bb.weights.data(), static_cast<int>(bb.weights.size()), uniform01(rng)))];
      for (std::size_t i = 0; i < w.size() && t < length; ++i) out[t++] = w[i];
    }
  }
}

double entropy(const MeasureSpec& spec) { return spec.entropy(); }

// ---- moment family and metric -----------------------------------------------

MomentFamily::MomentFamily(int n) : count(n) {
  if (n < 8) fail(Errc::InvalidArgument, "moment family needs at least 8 functions");
}

double MomentFamily::tail_bound() const { return std::ldexp(1.0, 1 - count); }

MetricValue metric_d(const MomentVector& a, const MomentVector& b, const MomentFamily& family) {
  const std::size_t n = static_cast<std::size_t>(family.count);
  if (a.m.size() < n || b.m.size() < n) fail(Errc::InvalidArgument, "moment vectors shorter than the family");
  MetricValue out;
  double w = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    w *= 0.5;
    out.value += w * std::fabs(a.m[j] - b.m[j]);
  }
  out.truncation_bound = family.tail_bound();
  out.quadrature_bound = a.quadrature_bound + b.quadrature_bound;
  return out;
}

// ---- evaluator ----------------------------------------------------------------

struct MeasureEvaluator::Table {
  int order = 0;
  int m = 2;
  std::vector<std::vector<std::uint16_t>> keys;  // order 0: counts; else {context, gram counts...}
  std::vector<double> sum_g;
  std::vector<double> sum_diam;
  std::vector<std::vector<double>> sum_pow;       // [class][j-1]
};

MeasureEvaluator::MeasureEvaluator(const IntervalMap& map, int depth, int moments, int threads)
    : map_(map), depth_(depth), moments_(moments), threads_(threads) {
  if (depth < 1) fail(Errc::InvalidArgument, "quadrature depth must be positive");
  if (moments < 1) fail(Errc::InvalidArgument, "moment count must be positive");
  // keep the quadrature within 2^20 cylinders for larger alphabets
  while (depth_ > 1 && std::pow(static_cast<double>(map.size()), depth_) > 1048576.0) --depth_;
}

MeasureEvaluator::~MeasureEvaluator() = default;

const MeasureEvaluator::Table& MeasureEvaluator::table(int order) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = tables_.find(order);
  if (it != tables_.end()) return *it->second;
  const int m = map_.size();
  const int d = depth_;
  if (order >= d) fail(Errc::InvalidArgument, "Markov order exceeds the quadrature depth");
  const int grams = ipow(m, order + 1);
  const int N = moments_;
  using Key = std::vector<std::uint16_t>;
  struct Sums {
    double g = 0.0, diam = 0.0;
    std::vector<double> pw;
  };
  using Acc = std::map<Key, Sums>;
  CylinderStepper st(map_);
  auto parts = traverse_cylinders(st, d, threads_, Acc{}, [&](Acc& acc, int depth, const NodeState& s, const Symbol* path) {
    if (depth != d) return;
    Key key(static_cast<std::size_t>(grams) + (order > 0 ? 1 : 0), 0);
    std::size_t base = 0;
    if (order > 0) {
      int ctx = 0;
      for (int i = 0; i < order; ++i) ctx = ctx * m + path[d - 1 - i];
      key[0] = static_cast<std::uint16_t>(ctx);
      base = 1;
    }
    for (int t = order; t < d; ++t) {
      int gram = 0;
      for (int u = t - order; u <= t; ++u) gram = gram * m + path[d - 1 - u];
      ++key[base + static_cast<std::size_t>(gram)];
    }
    Sums& sum = acc[key];
    if (sum.pw.empty()) sum.pw.assign(static_cast<std::size_t>(N), 0.0);
    double lo = s.lo(), hi = s.hi();
    int a = path[d - 1];
    sum.g += std::log(std::fabs(map_.branch(a).derivative(lo)));
    sum.diam += std::exp(s.log_diam);
    double mid = 0.5 * (lo + hi), p = 1.0;
    for (int j = 0; j < N; ++j) {
      p *= mid;
      sum.pw[static_cast<std::size_t>(j)] += p;
    }
  });
  Acc merged;
  for (auto& part : parts) {
    for (auto& [key, sum] : part) {
      Sums& dst = merged[key];
      if (dst.pw.empty()) dst.pw.assign(static_cast<std::size_t>(N), 0.0);
      dst.g += sum.g;
      dst.diam += sum.diam;
      for (int j = 0; j < N; ++j) dst.pw[static_cast<std::size_t>(j)] += sum.pw[static_cast<std::size_t>(j)];
    }
  }
  auto t = std::make_unique<Table>();
  t->order = order;
  t->m = m;
  for (auto& [key, sum] : merged) {
    t->keys.push_back(key);
    t->sum_g.push_back(sum.g);
    t->sum_diam.push_back(sum.diam);
    t->sum_pow.push_back(std::move(sum.pw));
  }
  auto& slot = tables_[order];
  slot = std::move(t);
  return *slot;
}

namespace {

// log-probability of any word in a quadrature class under the spec
double class_log_prob(const std::vector<std::uint16_t>& key, int order, int m, const MeasureSpec& spec) {
  double lp = 0.0;
  if (order == 0) {
    const auto& p = std::get<Bernoulli>(spec.variant()).p;
    for (int a = 0; a < m; ++a) {
      if (key[static_cast<std::size_t>(a)] == 0) continue;
      if (p[static_cast<std::size_t>(a)] <= 0.0) return kNegInf;
      lp += key[static_cast<std::size_t>(a)] * std::log(p[static_cast<std::size_t>(a)]);
    }
    return lp;
  }
  const auto& mk = std::get<Markov>(spec.variant());
  double pi = mk.stationary[key[0]];
  if (pi <= 0.0) return kNegInf;
  lp = std::log(pi);
  for (std::size_t g = 0; g + 1 < key.size(); ++g) {
    if (key[g + 1] == 0) continue;
    double p = mk.transition[g];
    if (p <= 0.0) return kNegInf;
    lp += key[g + 1] * std::log(p);
  }
  return lp;
}

bool all_increasing_linear(const IntervalMap& map) {
  if (!map.is_linear()) return false;
  for (const auto& b : map.branches()) {
    if (b.params[0] < 0) return false;
  }
  return true;
}

}  // namespace

double MeasureEvaluator::lyapunov(const MeasureSpec& spec) const {
  const IntervalMap& map = map_;
  if (auto* d = std::get_if<DiracFixed>(&spec.variant())) {
    if (d->branch >= map.size()) fail(Errc::InvalidArgument, "dirac branch outside the alphabet");
    const FixedPoint& fp = map.fixed_points()[static_cast<std::size_t>(d->branch)];
    return fp.parabolic ? 0.0 : std::log(std::fabs(fp.derivative));
  }
  if (auto* bb = std::get_if<BlockBernoulli>(&spec.variant())) {
    double acc = 0.0;
    for (std::size_t i = 0; i < bb->words.size(); ++i) acc += bb->weights[i] * cylinder(map, bb->words[i]).sum_g;
    return acc / bb->n;
  }
  if (spec.alphabet() != map.size()) fail(Errc::InvalidArgument, "measure alphabet differs from the map");
  if (map.is_linear()) {
    auto f = spec.symbol_frequencies();
    double acc = 0.0;
    for (int a = 0; a < map.size(); ++a) acc += f[static_cast<std::size_t>(a)] * std::log(std::fabs(map.branch(a).params[0]));
    return acc;
  }
  int order = 0;
  if (auto* mk = std::get_if<Markov>(&spec.variant())) order = mk->order;
  const Table& t = table(order);
  double acc = 0.0;
  for (std::size_t c = 0; c < t.keys.size(); ++c) {
    double lp = class_log_prob(t.keys[c], order, t.m, spec);
    if (lp == kNegInf) continue;
    acc += std::exp(lp) * t.sum_g[c];
  }
  return acc;
}

MomentVector MeasureEvaluator::moments(const MeasureSpec& spec) const {
  const IntervalMap& map = map_;
  const int N = moments_;
  MomentVector out;
  out.m.assign(static_cast<std::size_t>(N), 0.0);
  if (auto* d = std::get_if<DiracFixed>(&spec.variant())) {
    if (d->branch >= map.size()) fail(Errc::InvalidArgument, "dirac branch outside the alphabet");
    double x = map.fixed_points()[static_cast<std::size_t>(d->branch)].x, p = 1.0;
    for (int j = 0; j < N; ++j) out.m[static_cast<std::size_t>(j)] = (p *= x);
    return out;
  }
  if (auto* bb = std::get_if<BlockBernoulli>(&spec.variant())) {
    CylinderStepper st(map);
    for (std::size_t i = 0; i < bb->words.size(); ++i) {
      const Word& w = bb->words[i];
      NodeState cur = st.root(), next;
      double bound = 0.0;
      for (std::size_t j = w.size(); j-- > 0;) {
        st.prepend(w[j], cur, next);
        cur = next;
        double x = cur.w[1].x, p = 1.0;
        for (int q = 0; q < N; ++q) out.m[static_cast<std::size_t>(q)] += bb->weights[i] * (p *= x) / bb->n;
        bound += std::exp(cur.log_diam);
      }
      out.quadrature_bound += bb->weights[i] * bound / bb->n;
    }
    return out;
  }
  if (spec.alphabet() != map.size()) fail(Errc::InvalidArgument, "measure alphabet differs from the map");
  const int m = map.size();
  auto* mk = std::get_if<Markov>(&spec.variant());
  if (all_increasing_linear(map) && (!mk || mk->order == 1)) {
    // self-affine recursion; S_a(y) = A_a y + B_a
    std::vector<double> A(static_cast<std::size_t>(m)), B(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) {
      const auto& b = map.branch(a);
      A[static_cast<std::size_t>(a)] = 1.0 / b.params[0];
      B[static_cast<std::size_t>(a)] = -b.params[1] / b.params[0];
    }
    std::vector<std::vector<double>> C(static_cast<std::size_t>(N) + 1);
    for (int j = 0; j <= N; ++j) {
      for (int i = 0; i <= j; ++i) C[static_cast<std::size_t>(j)].push_back(binom(j, i));
    }
    auto pw = [](double v, int e) {
      double r = 1.0;
      for (int i = 0; i < e; ++i) r *= v;
      return r;
    };
    if (!mk) {
      const auto& p = std::get<Bernoulli>(spec.variant()).p;
      std::vector<double> mom(static_cast<std::size_t>(N) + 1, 0.0);
      mom[0] = 1.0;
      for (int j = 1; j <= N; ++j) {
        double rhs = 0.0, diag = 0.0;
        for (int a = 0; a < m; ++a) {
          double pa = p[static_cast<std::size_t>(a)];
          if (pa == 0.0) continue;
          double Aa = A[static_cast<std::size_t>(a)], Ba = B[static_cast<std::size_t>(a)];
          diag += pa * pw(Aa, j);
          for (int i = 0; i < j; ++i) rhs += pa * C[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] * pw(Aa, i) * pw(Ba, j - i) * mom[static_cast<std::size_t>(i)];
        }
        mom[static_cast<std::size_t>(j)] = rhs / (1.0 - diag);
        out.m[static_cast<std::size_t>(j) - 1] = mom[static_cast<std::size_t>(j)];
      }
      return out;
    }
    // restricted moments M_j^a over each first-symbol cylinder
    const auto& pi = mk->stationary;
    Eigen::MatrixXd coup = Eigen::MatrixXd::Zero(m, m);
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        if (pi[static_cast<std::size_t>(b)] > 0.0) {
          coup(a, b) = pi[static_cast<std::size_t>(a)] * mk->transition[static_cast<std::size_t>(a * m + b)] / pi[static_cast<std::size_t>(b)];
        }
      }
    }
    std::vector<Eigen::VectorXd> M(static_cast<std::size_t>(N) + 1, Eigen::VectorXd::Zero(m));
    for (int a = 0; a < m; ++a) M[0](a) = pi[static_cast<std::size_t>(a)];
    for (int j = 1; j <= N; ++j) {
      Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(m, m);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
      for (int a = 0; a < m; ++a) {
        double Aa = A[static_cast<std::size_t>(a)], Ba = B[static_cast<std::size_t>(a)];
        for (int b = 0; b < m; ++b) {
          lhs(a, b) -= coup(a, b) * pw(Aa, j);
          double acc = 0.0;
          for (int i = 0; i < j; ++i) acc += C[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] * pw(Aa, i) * pw(Ba, j - i) * M[static_cast<std::size_t>(i)](b);
          rhs(a) += coup(a, b) * acc;
        }
      }
      M[static_cast<std::size_t>(j)] = lhs.fullPivLu().solve(rhs);
      out.m[static_cast<std::size_t>(j) - 1] = M[static_cast<std::size_t>(j)].sum();
    }
    return out;
  }
  int order = mk ? mk->order : 0;
  const Table& t = table(order);
  for (std::size_t c = 0; c < t.keys.size(); ++c) {
    double lp = class_log_prob(t.keys[c], order, t.m, spec);
    if (lp == kNegInf) continue;
    double w = std::exp(lp);
    for (int j = 0; j < N; ++j) out.m[static_cast<std::size_t>(j)] += w * t.sum_pow[c][static_cast<std::size_t>(j)];
    out.quadrature_bound += w * t.sum_diam[c];
  }
  return out;
}

double lyapunov(const MeasureSpec& spec, const IntervalMap& map, int depth) {
  MeasureEvaluator ev(map, depth, 1);
  return ev.lyapunov(spec);
}

MomentVector moments(const MeasureSpec& spec, const IntervalMap& map, const MomentFamily& family, int depth) {
  MeasureEvaluator ev(map, depth, family.count);
  return ev.moments(spec);
}

MetricValue metric_d(const MeasureSpec& mu, const MeasureSpec& nu, const IntervalMap& map, const MomentFamily& family,
                     int depth) {
  MeasureEvaluator ev(map, depth, family.count);
  return metric_d(ev.moments(mu), ev.moments(nu), family);
}

// ---- level sets ---------------------------------------------------------------

MomentVector lebesgue_moments(int count) {
  if (count < 1) fail(Errc::InvalidArgument, "need at least one moment");
  MomentVector mv;
  for (int j = 1; j <= count; ++j) mv.m.push_back(1.0 / (j + 1));
  return mv;
}

MomentVector empirical_moments(const std::vector<double>& orbit, int count) {
  MomentVector out;
  out.m.assign(static_cast<std::size_t>(count), 0.0);
  if (orbit.empty()) fail(Errc::InvalidArgument, "empty orbit");
  for (double x : orbit) {
    double p = 1.0;
    for (int j = 0; j < count; ++j) out.m[static_cast<std::size_t>(j)] += (p *= x);
  }
  for (double& v : out.m) v /= static_cast<double>(orbit.size());
  return out;
}

bool LevelCheck::all() const {
  return std::all_of(passed.begin(), passed.end(), [](bool b) { return b; });
}

LevelCheck level_constraint_check(const std::vector<double>& orbit, const MomentVector& target, int k, double eps) {
  if (k < 1 || static_cast<std::size_t>(k) > target.m.size()) fail(Errc::InvalidArgument, "k outside the moment range");
  auto emp = empirical_moments(orbit, k);
  LevelCheck out;
  for (int i = 0; i < k; ++i) {
    double dev = std::fabs(emp.m[static_cast<std::size_t>(i)] - target.m[static_cast<std::size_t>(i)]);
    out.deviation.push_back(dev);
    out.passed.push_back(dev < eps);
  }
  return out;
}

LevelCheck level_constraint_check(const IntervalMap& map, double x, int n, const MomentVector& target, int k, double eps) {
  if (n < 1) fail(Errc::InvalidArgument, "n must be at least 1");
  std::vector<double> orbit;
  orbit.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    try {
      map.branch_of(x);
    } catch (const Error&) {
      fail(Errc::OrbitEscaped, "orbit escaped the branch domains at step " + std::to_string(j));
    }
    orbit.push_back(x);
    x = map.eval(x);
  }
  return level_constraint_check(orbit, target, k, eps);
}

LevelCheck level_constraint_check(const IntervalMap& map, const Word& word, const MomentVector& target, int k,
                                  double eps) {
  return level_constraint_check(symbolic_orbit(map, word), target, k, eps);
}

// ---- parabolic simplex ---------------------------------------------------------

std::vector<MeasureSpec> ParabolicSimplex::vertices() const {
  std::vector<MeasureSpec> out;
  for (int b : branches) out.push_back(MeasureSpec::dirac(b));
  return out;
}

ParabolicSimplex parabolic_simplex(const IntervalMap& map) {
  ParabolicSimplex s;
  for (const auto& fp : map.fixed_points()) {
    if (!fp.parabolic) continue;
    s.branches.push_back(fp.branch);
    s.points.push_back(fp.x);
  }
  return s;
}

SeparationReport separation_gamma(const MeasureSpec& m, int k, const ParabolicSimplex& simplex,
                                  const MeasureEvaluator& eval, double resolution) {
  if (simplex.points.empty()) fail(Errc::Degenerate, "the map has no parabolic fixed point");
  if (!(eval.lyapunov(m) > 0.0)) fail(Errc::Precondition, "separation needs a measure with positive Lyapunov exponent");
  if (!(resolution > 0.0 && resolution <= 1.0)) fail(Errc::InvalidArgument, "resolution must lie in (0,1]");
  const int N = eval.moment_count();
  const MomentFamily family(N);
  const auto target = eval.moments(m);
  const int V = static_cast<int>(simplex.points.size());
  const int K = static_cast<int>(std::lround(1.0 / resolution));
  double grid = 1.0;
  for (int i = 1; i < V; ++i) grid = grid * (K + i) / i;
  if (grid > 5e7) fail(Errc::BudgetExceeded, "barycentric grid too large");
  // vertex powers p_i^j
  std::vector<std::vector<double>> vp(static_cast<std::size_t>(V), std::vector<double>(static_cast<std::size_t>(N)));
  for (int i = 0; i < V; ++i) {
    double p = 1.0;
    for (int j = 0; j < N; ++j) vp[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = (p *= simplex.points[static_cast<std::size_t>(i)]);
  }
  SeparationReport out;
  out.gamma = std::numeric_limits<double>::infinity();
  std::vector<int> parts(static_cast<std::size_t>(V), 0);
  MomentVector mix;
  mix.m.assign(static_cast<std::size_t>(N), 0.0);
  auto eval_point = [&] {
    std::fill(mix.m.begin(), mix.m.end(), 0.0);
    for (int i = 0; i < V; ++i) {
      double lam = static_cast<double>(parts[static_cast<std::size_t>(i)]) / K;
      if (lam == 0.0) continue;
      for (int j = 0; j < N; ++j) mix.m[static_cast<std::size_t>(j)] += lam * vp[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    double d = metric_d(target, mix, family).value;
    if (d < out.gamma) {
      out.gamma = d;
      out.argmin.clear();
      for (int p : parts) out.argmin.push_back(static_cast<double>(p) / K);
    }
  };
  auto rec = [&](auto&& self, int i, int left) -> void {
    if (i == V - 1) {
      parts[static_cast<std::size_t>(i)] = left;
      eval_point();
      return;
    }
    for (int v = 0; v <= left; ++v) {
      parts[static_cast<std::size_t>(i)] = v;
      self(self, i + 1, left - v);
    }
  };
  rec(rec, 0, K);
  out.k = k;
  out.tail_bound = std::ldexp(1.0, 1 - k);
  out.separated = out.gamma > out.tail_bound;
  return out;
}

}  // namespace dimlab
