#include "dimlab/map_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dimlab/error.hpp"

namespace dimlab {

namespace {

constexpr double kDomainTol = 1e-12;
constexpr int kBisectionBudget = 200;
constexpr int kNewtonBudget = 50;
constexpr int kValidationGrid = 2000;

std::string branch_label(int i) {
  std::ostringstream os;
  os << "branch " << i;
  return os.str();
}

// Root of an increasing function on [a, b] by plain bisection down to
// machine resolution (or the iteration budget).
template <class F>
double bisect_increasing(F&& h, double a, double b) {
  for (int it = 0; it < kBisectionBudget; ++it) {
    double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    double v = h(mid);
    if (v > 0) {
      b = mid;
    } else if (v < 0) {
      a = mid;
    } else {
      return mid;
    }
  }
  return 0.5 * (a + b);
}

// Snap a configured endpoint onto the exact preimage of target if it is
// within 1e-6; the config cannot be trusted to machine precision.
double snap_endpoint(const BranchSpec& b, double e, double target) {
  double v = b.value(e) - target;
  if (std::fabs(v) <= kDomainTol) return e;
  double a = std::max(0.0, e - 1e-6), c = std::min(1.0, e + 1e-6);
  double va = b.value(a) - target, vc = b.value(c) - target;
  if (va * vc > 0) {
    fail(Errc::InvalidArgument, branch_label(b.index) + " is not surjective onto [0,1] at endpoint");
  }
  bool inc = va < vc;
  return bisect_increasing([&](double x) { return inc ? b.value(x) - target : target - b.value(x); }, a, c);
}

}  // namespace

const char* branch_kind_name(BranchKind kind) {
  switch (kind) {
    case BranchKind::Linear: return "linear";
    case BranchKind::Manneville: return "manneville";
    case BranchKind::Polynomial: return "polynomial";
  }
  return "?";
}

double BranchSpec::value(double x) const {
  switch (kind) {
    case BranchKind::Linear:
      return params[0] * x + params[1];
    case BranchKind::Manneville:
      return x + std::pow(x, 1.0 + params[0]) - params[1];
    case BranchKind::Polynomial: {
      double acc = 0.0;
      for (auto it = params.rbegin(); it != params.rend(); ++it) acc = acc * x + *it;
      return acc;
    }
  }
  return 0.0;
}

double BranchSpec::derivative(double x) const {
  switch (kind) {
    case BranchKind::Linear:
      return params[0];
    case BranchKind::Manneville:
      return 1.0 + (1.0 + params[0]) * std::pow(x, params[0]);
    case BranchKind::Polynomial: {
      double acc = 0.0;
      for (std::size_t k = params.size(); k-- > 1;) acc = acc * x + static_cast<double>(k) * params[k];
      return acc;
    }
  }
  return 0.0;
}

bool BranchSpec::increasing() const { return derivative(0.5 * (lo + hi)) > 0; }

IntervalMap::IntervalMap(std::vector<BranchSpec> branches, std::string name)
    : branches_(std::move(branches)), name_(std::move(name)) {
  if (branches_.size() < 2) fail(Errc::InvalidArgument, "a map needs at least two branches");
  if (branches_.size() > 255) fail(Errc::InvalidArgument, "at most 255 branches are supported");
  linear_ = true;
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    BranchSpec& b = branches_[i];
    b.index = static_cast<int>(i);
    switch (b.kind) {
      case BranchKind::Linear: {
        if (b.params.size() != 2 || !std::isfinite(b.params[0]) || !std::isfinite(b.params[1])) {
          fail(Errc::InvalidArgument, branch_label(b.index) + ": linear branch needs slope and offset");
        }
        double s = b.params[0], c = b.params[1];
        if (std::fabs(s) <= 1.0) fail(Errc::InvalidArgument, branch_label(b.index) + ": |slope| must exceed 1");
        double x0 = -c / s, x1 = (1.0 - c) / s;
        b.lo = std::min(x0, x1);
        b.hi = std::max(x0, x1);
        break;
      }
      case BranchKind::Manneville: {
        linear_ = false;
        if (b.params.size() != 2) fail(Errc::InvalidArgument, branch_label(b.index) + ": manneville needs beta and shift");
        double beta = b.params[0], shift = b.params[1];
        if (!(beta > 0.0 && beta <= 1.0)) fail(Errc::InvalidArgument, branch_label(b.index) + ": beta must lie in (0,1]");
        if (!(shift >= 0.0 && shift + 1.0 <= 2.0)) fail(Errc::InvalidArgument, branch_label(b.index) + ": shift out of range");
        auto level = [beta](double v) {
          if (v <= 0.0) return 0.0;
          if (v >= 2.0) return 1.0;
          return bisect_increasing([&](double x) { return x + std::pow(x, 1.0 + beta) - v; }, 0.0, 1.0);
        };
        b.lo = level(shift);
        b.hi = level(shift + 1.0);
        break;
      }
      case BranchKind::Polynomial: {
        linear_ = false;
        if (b.params.size() < 2) fail(Errc::InvalidArgument, branch_label(b.index) + ": polynomial needs coefficients");
        if (!(b.lo < b.hi)) fail(Errc::InvalidArgument, branch_label(b.index) + ": empty domain");
        bool inc = b.value(b.hi) > b.value(b.lo);
        b.lo = snap_endpoint(b, b.lo, inc ? 0.0 : 1.0);
        b.hi = snap_endpoint(b, b.hi, inc ? 1.0 : 0.0);
        break;
      }
    }
    if (b.lo < -kDomainTol || b.hi > 1.0 + kDomainTol || !(b.lo < b.hi)) {
      fail(Errc::InvalidArgument, branch_label(b.index) + ": domain must be a nondegenerate subinterval of [0,1]");
    }
    b.lo = std::max(b.lo, 0.0);
    b.hi = std::min(b.hi, 1.0);
    bool inc = b.increasing();
    double t_lo = b.value(b.lo), t_hi = b.value(b.hi);
    if (std::fabs(t_lo - (inc ? 0.0 : 1.0)) > kDomainTol || std::fabs(t_hi - (inc ? 1.0 : 0.0)) > kDomainTol) {
      fail(Errc::InvalidArgument, branch_label(b.index) + " does not map its domain onto [0,1]");
    }
  }

  std::vector<const BranchSpec*> order;
  for (const auto& b : branches_) order.push_back(&b);
  std::sort(order.begin(), order.end(), [](const BranchSpec* a, const BranchSpec* b) { return a->lo < b->lo; });
  gaps_ = order.front()->lo > kDomainTol || order.back()->hi < 1.0 - kDomainTol;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    if (order[i]->hi > order[i + 1]->lo + kDomainTol) {
      fail(Errc::InvalidArgument, "branch domains overlap");
    }
    if (order[i]->hi < order[i + 1]->lo - kDomainTol) gaps_ = true;
  }

  fixed_points_ = find_fixed_points(*this);

  for (const auto& b : branches_) {
    double xf = fixed_points_[static_cast<std::size_t>(b.index)].x;
    double sign = 0.0;
    for (int k = 0; k <= kValidationGrid; ++k) {
      double x = b.lo + (b.hi - b.lo) * k / kValidationGrid;
      double d = b.derivative(x);
      if (!std::isfinite(d) || d == 0.0 || (sign != 0.0 && d * sign < 0)) {
        fail(Errc::InvalidArgument, branch_label(b.index) + " is not strictly monotone");
      }
      sign = d;
      if (std::fabs(d) <= 1.0 && std::fabs(x - xf) > 1e-9) {
        fail(Errc::InvalidArgument, branch_label(b.index) + " is not expanding away from its fixed point");
      }
    }
  }
}

IntervalMap IntervalMap::manneville(double beta) {
  BranchSpec b0{0, 0, 0, BranchKind::Manneville, {beta, 0.0}};
  BranchSpec b1{1, 0, 0, BranchKind::Manneville, {beta, 1.0}};
  std::ostringstream os;
  os << "manneville(beta=" << beta << ")";
  return IntervalMap({b0, b1}, os.str());
}

IntervalMap IntervalMap::linear(const std::vector<double>& slopes, const std::vector<double>& left_ends) {
  if (slopes.size() != left_ends.size()) fail(Errc::InvalidArgument, "slopes and left ends differ in length");
  std::vector<BranchSpec> bs;
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    double s = slopes[i];
    double c = s > 0 ? -s * left_ends[i] : 1.0 - s * left_ends[i];
    bs.push_back({static_cast<int>(i), 0, 0, BranchKind::Linear, {s, c}});
  }
  return IntervalMap(std::move(bs), "linear");
}

IntervalMap IntervalMap::doubling() {
  auto m = linear({2.0, 2.0}, {0.0, 0.5});
  m.name_ = "doubling";
  return m;
}

IntervalMap IntervalMap::middle_thirds() {
  auto m = linear({3.0, 3.0}, {0.0, 2.0 / 3.0});
  m.name_ = "middle_thirds";
  return m;
}

int IntervalMap::branch_of(double x) const {
  int pick = -1;
  for (const auto& b : branches_) {
    if (x < b.lo - kDomainTol || x > b.hi + kDomainTol) continue;
    if (std::fabs(x - b.lo) <= kDomainTol) return b.index;  // left endpoint wins
    if (pick < 0) pick = b.index;
  }
  if (pick < 0) {
    std::ostringstream os;
    os.precision(17);
    os << "x = " << x << " lies in no branch domain";
    fail(Errc::OutOfDomain, os.str());
  }
  return pick;
}

double IntervalMap::eval(double x) const {
  const BranchSpec& b = branches_[static_cast<std::size_t>(branch_of(x))];
  double y = b.value(std::clamp(x, b.lo, b.hi));
  return std::clamp(y, 0.0, 1.0);
}

double IntervalMap::derivative(double x) const {
  const BranchSpec& b = branches_[static_cast<std::size_t>(branch_of(x))];
  return b.derivative(std::clamp(x, b.lo, b.hi));
}

double IntervalMap::inverse(int symbol, double y, double tol) const {
  if (symbol < 0 || symbol >= size()) fail(Errc::InvalidArgument, "symbol out of range");
  if (!(tol > 0)) fail(Errc::InvalidArgument, "tolerance must be positive");
  if (y < -kDomainTol || y > 1.0 + kDomainTol || !std::isfinite(y)) fail(Errc::OutOfDomain, "inverse branch argument outside [0,1]");
  y = std::clamp(y, 0.0, 1.0);
  const BranchSpec& b = branches_[static_cast<std::size_t>(symbol)];
  bool inc = b.increasing();
  if (y == 0.0) return inc ? b.lo : b.hi;
  if (y == 1.0) return inc ? b.hi : b.lo;
  if (b.kind == BranchKind::Linear) {
    return std::clamp((y - b.params[1]) / b.params[0], b.lo, b.hi);
  }
  // h is increasing in x on [a, c] in both orientations
  auto h = [&](double x) { return inc ? b.value(x) - y : y - b.value(x); };
  double a = b.lo, c = b.hi;
  double x = inc ? a + y * (c - a) : c - y * (c - a);
  int newton = 0, bisect = 0;
  while (newton < kNewtonBudget && bisect < kBisectionBudget) {
    double v = h(x);
    if (v == 0.0) return x;
    if (v > 0) c = x; else a = x;
    double d = inc ? b.derivative(x) : -b.derivative(x);
    double next = x - v / d;
    if (!(next > a && next < c)) {
      next = 0.5 * (a + c);
      ++bisect;
    } else {
      ++newton;
    }
    if (next == x || c - a <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(x))) {
      x = next;
      break;
    }
    if (std::fabs(next - x) <= 1e-18 + 2 * std::numeric_limits<double>::epsilon() * std::fabs(x)) {
      x = next;
      break;
    }
    x = next;
  }
  if (std::fabs(h(x)) > tol) {
    std::ostringstream os;
    os.precision(17);
    os << branch_label(symbol) << ": inverse did not converge at y = " << y;
    fail(Errc::NoConvergence, os.str());
  }
  return x;
}

double IntervalMap::inverse_derivative(int symbol, double y) const {
  const BranchSpec& b = branches_[static_cast<std::size_t>(symbol)];
  return 1.0 / std::fabs(b.derivative(inverse(symbol, y)));
}

std::vector<FixedPoint> find_fixed_points(const IntervalMap& map, double tol) {
  std::vector<FixedPoint> out;
  for (const auto& b : map.branches()) {
    bool inc = b.increasing();
    auto h = [&](double x) { return b.value(x) - x; };
    int changes = 0;
    double prev = 0.0;
    for (int k = 0; k <= 1000; ++k) {
      double v = h(b.lo + (b.hi - b.lo) * k / 1000.0);
      if (v == 0.0) continue;
      if (prev != 0.0 && (v > 0) != (prev > 0)) ++changes;
      prev = v;
    }
    if (changes > 1) fail(Errc::NotUnique, branch_label(b.index) + " has more than one fixed point");
    double x;
    if (h(b.lo) == 0.0) {
      x = b.lo;
    } else if (h(b.hi) == 0.0) {
      x = b.hi;
    } else if (b.kind == BranchKind::Linear) {
      x = std::clamp(b.params[1] / (1.0 - b.params[0]), b.lo, b.hi);
    } else {
      double a = b.lo, c = b.hi;
      while (c - a > tol) {
        double mid = 0.5 * (a + c);
        if (mid <= a || mid >= c) break;
        double v = inc ? h(mid) : -h(mid);
        if (v > 0) c = mid; else if (v < 0) a = mid; else { a = c = mid; }
      }
      x = 0.5 * (a + c);
    }
    FixedPoint fp;
    fp.branch = b.index;
    fp.x = x;
    fp.derivative = b.derivative(x);
    fp.parabolic = std::fabs(std::fabs(fp.derivative) - 1.0) < kParabolicTol;
    out.push_back(fp);
  }
  return out;
}

}  // namespace dimlab
