#include "dimlab/symbolic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dimlab/error.hpp"

namespace dimlab {

Word parse_word(const std::string& text) {
  Word w;
  if (text.find(',') != std::string::npos || text.find(' ') != std::string::npos) {
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, text.find(',') != std::string::npos ? ',' : ' ')) {
      if (item.empty()) continue;
      int v = std::stoi(item);
      if (v < 0 || v > 254) fail(Errc::Parse, "symbol out of range in word");
      w.push_back(static_cast<Symbol>(v));
    }
    return w;
  }
  for (char c : text) {
    if (c < '0' || c > '9') {
      if (c == '\n' || c == '\r') continue;
      fail(Errc::Parse, std::string("invalid symbol '") + c + "' in word");
    }
    w.push_back(static_cast<Symbol>(c - '0'));
  }
  return w;
}

std::string word_to_string(const Word& w) {
  bool digits = std::all_of(w.begin(), w.end(), [](Symbol s) { return s < 10; });
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (digits) {
      out.push_back(static_cast<char>('0' + w[i]));
    } else {
      if (i) out.push_back(',');
      out += std::to_string(w[i]);
    }
  }
  return out;
}

void check_word(const IntervalMap& map, const Word& w) {
  if (w.empty()) fail(Errc::InvalidArgument, "empty word");
  for (Symbol s : w) {
    if (s >= map.size()) fail(Errc::InvalidArgument, "word symbol exceeds the alphabet");
  }
}

std::uint64_t cylinder_count(const IntervalMap& map, int n, std::uint64_t budget) {
  if (n < 1) fail(Errc::InvalidArgument, "depth must be at least 1");
  std::uint64_t count = 1;
  for (int i = 0; i < n; ++i) {
    count *= static_cast<std::uint64_t>(map.size());
    if (count > budget) fail(Errc::BudgetExceeded, "cylinder count exceeds the configured budget");
  }
  return count;
}

// ---- observables -----------------------------------------------------------

Observable Observable::moment(int power) {
  if (power < 0) fail(Errc::InvalidArgument, "moment power must be nonnegative");
  Observable o;
  o.kind_ = Kind::Moment;
  o.power_ = power;
  o.name_ = "x^" + std::to_string(power);
  return o;
}

Observable Observable::log_derivative() {
  Observable o;
  o.kind_ = Kind::LogDerivative;
  o.name_ = "log|T'|";
  return o;
}

Observable Observable::constant(double c) {
  Observable o;
  o.kind_ = Kind::Constant;
  o.value_ = c;
  o.name_ = "const";
  return o;
}

Observable Observable::custom(std::function<double(double)> fn, std::string name) {
  Observable o;
  o.kind_ = Kind::Custom;
  o.fn_ = std::move(fn);
  o.name_ = std::move(name);
  return o;
}

double Observable::operator()(const IntervalMap& map, double x, int branch) const {
  switch (kind_) {
    case Kind::Moment: {
      double r = 1.0;
      for (int i = 0; i < power_; ++i) r *= x;
      return r;
    }
    case Kind::LogDerivative:
      return std::log(std::fabs(map.branch(branch).derivative(x)));
    case Kind::Constant:
      return value_;
    case Kind::Custom:
      return fn_(x);
  }
  return 0.0;
}

double Observable::operator()(const IntervalMap& map, double x) const {
  if (kind_ == Kind::LogDerivative) return (*this)(map, x, map.branch_of(x));
  return (*this)(map, x, 0);
}

// ---- cylinder tree ---------------------------------------------------------

double NodeState::min_sum_g() const { return std::min({w[0].sum_g, w[1].sum_g, w[2].sum_g}); }

CylinderStepper::CylinderStepper(const IntervalMap& map, std::vector<Observable> tracked)
    : map_(&map), tracked_(std::move(tracked)) {
  if (tracked_.size() > static_cast<std::size_t>(kMaxTracked)) {
    fail(Errc::InvalidArgument, "too many tracked observables");
  }
  for (const auto& b : map.branches()) {
    increasing_.push_back(b.increasing());
    log_slope_.push_back(b.kind == BranchKind::Linear ? std::log(std::fabs(b.params[0])) : 0.0);
  }
}

NodeState CylinderStepper::root() const {
  NodeState s;
  s.log_diam = 0.0;
  s.w[0].x = 0.0;
  s.w[1].x = 0.5;
  s.w[2].x = 1.0;
  return s;
}

void CylinderStepper::prepend(int a, const NodeState& child, NodeState& out) const {
  const IntervalMap& map = *map_;
  const BranchSpec& b = map.branch(a);
  const bool lin = b.kind == BranchKind::Linear;
  const bool inc = increasing_[static_cast<std::size_t>(a)];
  const int k = tracked();
  auto step = [&](const Witness& src, Witness& dst) {
    double x = map.inverse(a, src.x);
    dst.x = x;
    dst.sum_g = src.sum_g + (lin ? log_slope_[static_cast<std::size_t>(a)] : std::log(std::fabs(b.derivative(x))));
    for (int j = 0; j < k; ++j) dst.sum_f[j] = src.sum_f[j] + tracked_[static_cast<std::size_t>(j)](map, x, a);
  };
  step(inc ? child.w[0] : child.w[2], out.w[0]);
  step(child.w[1], out.w[1]);
  step(inc ? child.w[2] : child.w[0], out.w[2]);
  if (lin) {
    out.log_diam = child.log_diam - log_slope_[static_cast<std::size_t>(a)];
    return;
  }
  double d = out.w[2].x - out.w[0].x;
  double scale = std::max(std::fabs(out.w[0].x), std::fabs(out.w[2].x));
  if (d > 0 && d >= 1e-4 * scale) {
    out.log_diam = std::log(d);
    return;
  }
  // Tiny cylinder far from 0: the endpoint difference has lost digits, so
  // integrate |S_a'| over the child interval instead (3-point Gauss-Legendre).
  static constexpr double kNode = 0.3872983346207417;  // sqrt(3/5)/2
  double dc = std::exp(child.log_diam);
  double c0 = child.w[0].x;
  const double nodes[3] = {0.5 - kNode, 0.5, 0.5 + kNode};
  const double weights[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  double mean = 0.0;
  for (int i = 0; i < 3; ++i) {
    double y = std::clamp(c0 + dc * nodes[i], 0.0, 1.0);
    mean += weights[i] / std::fabs(b.derivative(map.inverse(a, y)));
  }
  out.log_diam = child.log_diam + std::log(mean);
}

// ---- operations ------------------------------------------------------------

Cylinder cylinder(const IntervalMap& map, const Word& word) {
  check_word(map, word);
  CylinderStepper st(map);
  NodeState cur = st.root(), next;
  for (std::size_t i = word.size(); i-- > 0;) {
    st.prepend(word[i], cur, next);
    cur = next;
  }
  Cylinder c;
  c.word = word;
  c.lo = cur.lo();
  c.hi = cur.hi();
  c.diam = std::max(cur.diam(), 0.0);
  c.log_diam = cur.log_diam;
  c.sum_g = cur.w[0].sum_g;
  return c;
}

void enumerate_cylinders(const IntervalMap& map, int n, const std::function<void(const Cylinder&)>& visitor,
                         std::uint64_t budget) {
  cylinder_count(map, n, budget);
  const int m = map.size();
  // Suffix block of length r is materialized once; prefixes are prepended.
  int r = 0;
  std::uint64_t width = 1;
  while (r < n && width * static_cast<std::uint64_t>(m) <= (std::uint64_t{1} << 16)) {
    width *= static_cast<std::uint64_t>(m);
    ++r;
  }
  const int c = n - r;
  CylinderStepper st(map);
  std::vector<NodeState> suffix(width);
  {
    std::vector<NodeState> stack(static_cast<std::size_t>(r) + 1);
    stack[0] = st.root();
    auto fill = [&](auto&& self, int depth, std::uint64_t index, std::uint64_t place) -> void {
      if (depth == r) {
        suffix[index] = stack[static_cast<std::size_t>(depth)];
        return;
      }
      for (int a = 0; a < m; ++a) {
        st.prepend(a, stack[static_cast<std::size_t>(depth)], stack[static_cast<std::size_t>(depth) + 1]);
        self(self, depth + 1, index + static_cast<std::uint64_t>(a) * place, place * static_cast<std::uint64_t>(m));
      }
    };
    fill(fill, 0, 0, 1);
  }
  Word prefix(static_cast<std::size_t>(c), 0);
  Cylinder cyl;
  cyl.word.assign(static_cast<std::size_t>(n), 0);
  NodeState cur, tmp;
  for (;;) {
    for (std::uint64_t q = 0; q < width; ++q) {
      cur = suffix[q];
      for (int i = c; i-- > 0;) {
        st.prepend(prefix[static_cast<std::size_t>(i)], cur, tmp);
        cur = tmp;
      }
      std::copy(prefix.begin(), prefix.end(), cyl.word.begin());
      std::uint64_t v = q;
      for (int i = n; i-- > c;) {
        cyl.word[static_cast<std::size_t>(i)] = static_cast<Symbol>(v % static_cast<std::uint64_t>(m));
        v /= static_cast<std::uint64_t>(m);
      }
      cyl.lo = cur.lo();
      cyl.hi = cur.hi();
      cyl.diam = std::max(cur.diam(), 0.0);
      cyl.log_diam = cur.log_diam;
      cyl.sum_g = cur.w[0].sum_g;
      visitor(cyl);
    }
    int i = c - 1;
    while (i >= 0 && prefix[static_cast<std::size_t>(i)] == m - 1) prefix[static_cast<std::size_t>(i--)] = 0;
    if (i < 0) break;
    ++prefix[static_cast<std::size_t>(i)];
  }
}

std::vector<double> symbolic_orbit(const IntervalMap& map, const Word& word, double tail_point) {
  check_word(map, word);
  std::vector<double> xs(word.size());
  double x = tail_point;
  for (std::size_t j = word.size(); j-- > 0;) {
    x = map.inverse(word[j], x);
    xs[j] = x;
  }
  return xs;
}

double birkhoff_average(const IntervalMap& map, const Observable& f, double x, int n) {
  if (n < 1) fail(Errc::InvalidArgument, "n must be at least 1");
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    int b;
    try {
      b = map.branch_of(x);
    } catch (const Error&) {
      fail(Errc::OrbitEscaped, "orbit escaped the branch domains at step " + std::to_string(j));
    }
    sum += f(map, x, b);
    x = map.eval(x);
  }
  return sum / n;
}

double birkhoff_average_word(const IntervalMap& map, const Observable& f, const Word& word, double tail_point) {
  auto xs = symbolic_orbit(map, word, tail_point);
  double sum = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) sum += f(map, xs[j], word[j]);
  return sum / static_cast<double>(xs.size());
}

double variation(const IntervalMap& map, const Observable& f, int n, int threads, std::uint64_t budget) {
  cylinder_count(map, n, budget);
  CylinderStepper st(map);
  auto parts = traverse_cylinders(st, n, threads, 0.0, [&](double& acc, int depth, const NodeState& s, const Symbol* path) {
    if (depth != n) return;
    int a = path[depth - 1];
    double lo = s.lo(), hi = s.hi();
    double v0 = f(map, lo, a), v1 = f(map, 0.5 * (lo + hi), a), v2 = f(map, hi, a);
    double mn = std::min({v0, v1, v2}), mx = std::max({v0, v1, v2});
    double slack = 1e-12 * (1.0 + std::fabs(mx));
    if (v1 < std::min(v0, v2) - slack || v1 > std::max(v0, v2) + slack) {
      for (int i = 1; i < 32; ++i) {
        double v = f(map, lo + (hi - lo) * i / 32.0, a);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
      }
    }
    acc = std::max(acc, mx - mn);
  });
  double out = 0.0;
  for (double v : parts) out = std::max(out, v);
  return out;
}

std::vector<double> lemma21_gaps(const IntervalMap& map, const std::vector<int>& depths, int threads,
                                 std::uint64_t budget) {
  if (depths.empty()) return {};
  int top = *std::max_element(depths.begin(), depths.end());
  cylinder_count(map, top, budget);
  CylinderStepper st(map);
  std::vector<double> init(static_cast<std::size_t>(top) + 1, 0.0);
  auto parts = traverse_cylinders(st, top, threads, init, [&](std::vector<double>& acc, int depth, const NodeState& s, const Symbol*) {
    double gap = std::fabs(-s.log_diam / depth - s.w[0].sum_g / depth);
    double& slot = acc[static_cast<std::size_t>(depth)];
    slot = std::max(slot, gap);
  });
  std::vector<double> out;
  for (int n : depths) {
    if (n < 1) fail(Errc::InvalidArgument, "depth must be at least 1");
    double v = 0.0;
    for (const auto& p : parts) v = std::max(v, p[static_cast<std::size_t>(n)]);
    out.push_back(v);
  }
  return out;
}

double lemma21_gap(const IntervalMap& map, int n, int threads, std::uint64_t budget) {
  return lemma21_gaps(map, {n}, threads, budget).front();
}

}  // namespace dimlab
