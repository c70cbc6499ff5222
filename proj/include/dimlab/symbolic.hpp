#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dimlab/map_model.hpp"
#include "dimlab/parallel.hpp"

namespace dimlab {

using Symbol = std::uint8_t;
using Word = std::vector<Symbol>;

Word parse_word(const std::string& text);
std::string word_to_string(const Word& w);
void check_word(const IntervalMap& map, const Word& w);

inline constexpr std::uint64_t kDefaultCylinderBudget = std::uint64_t{1} << 24;

// Throws BudgetExceeded when m^n exceeds the budget.
std::uint64_t cylinder_count(const IntervalMap& map, int n, std::uint64_t budget = kDefaultCylinderBudget);

// Real observable on [0,1]. The log-derivative observable needs to know the
// branch, which is always available when evaluating on a cylinder.
class Observable {
 public:
  enum class Kind { Moment, LogDerivative, Constant, Custom };

  static Observable moment(int power);
  static Observable log_derivative();
  static Observable constant(double c);
  static Observable custom(std::function<double(double)> fn, std::string name = "custom");

  Kind kind() const { return kind_; }
  int power() const { return power_; }
  const std::string& name() const { return name_; }

  double operator()(const IntervalMap& map, double x, int branch) const;
  double operator()(const IntervalMap& map, double x) const;

 private:
  Kind kind_ = Kind::Constant;
  int power_ = 0;
  double value_ = 0.0;
  std::function<double(double)> fn_;
  std::string name_;
};

struct Cylinder {
  Word word;
  double lo = 0.0;
  double hi = 1.0;
  double diam = 1.0;
  double log_diam = 0.0;
  double sum_g = 0.0;  // S_n log|T'| at the left endpoint
};

// ---- cylinder tree ---------------------------------------------------------

inline constexpr int kMaxTracked = 8;
inline constexpr int kMaxDepth = 62;

// Birkhoff data carried along one point of a cylinder: the point itself,
// S_n g and S_n f_j for the tracked observables.
struct Witness {
  double x = 0.0;
  double sum_g = 0.0;
  double sum_f[kMaxTracked] = {};
};

// State of the cylinder I(w): witnesses at the left end, the image of 1/2
// and the right end, plus log diam.
struct NodeState {
  double log_diam = 0.0;
  Witness w[3];
  double lo() const { return w[0].x; }
  double hi() const { return w[2].x; }
  double diam() const { return w[2].x - w[0].x; }
  // Smallest S_n g among the three witnesses.
  double min_sum_g() const;
};

// Builds I(a w) from I(w), since I(a w) = S_a(I(w)). Orbit points of the
// parent are the child's points with one more preimage in front, so the
// Birkhoff sums extend by one term.
class CylinderStepper {
 public:
  CylinderStepper(const IntervalMap& map, std::vector<Observable> tracked = {});

  const IntervalMap& map() const { return *map_; }
  int tracked() const { return static_cast<int>(tracked_.size()); }
  const std::vector<Observable>& observables() const { return tracked_; }

  NodeState root() const;
  void prepend(int symbol, const NodeState& child, NodeState& out) const;

 private:
  const IntervalMap* map_;
  std::vector<Observable> tracked_;
  std::vector<double> log_slope_;  // for linear branches
  std::vector<bool> increasing_;
};

// Depth-first walk over all cylinders of depth 1..max_depth, built by
// prepending symbols. The tree is cut at a fixed depth into subtrees that run
// as independent tasks; the result holds one accumulator for the shallow
// part followed by one per subtree, always in the same order.
//
// visit(acc, depth, state, path) where path[0..depth) lists the prepended
// symbols; the word is w_i = path[depth - 1 - i].
template <class Acc, class Visit>
std::vector<Acc> traverse_cylinders(const CylinderStepper& stepper, int max_depth, int threads, const Acc& init,
                                    Visit&& visit) {
  const int m = stepper.map().size();
  int cut = 0;
  std::uint64_t width = 1;
  while (cut < max_depth && width < 64) {
    width *= static_cast<std::uint64_t>(m);
    ++cut;
  }
  struct Root {
    NodeState state;
    Symbol path[kMaxDepth];
  };
  std::vector<Acc> out;
  out.push_back(init);
  std::vector<Root> roots;
  {
    std::vector<NodeState> stack(static_cast<std::size_t>(cut) + 1);
    Symbol path[kMaxDepth];
    stack[0] = stepper.root();
    auto shallow = [&](auto&& self, int depth) -> void {
      for (int a = 0; a < m; ++a) {
        path[depth] = static_cast<Symbol>(a);
        NodeState& s = stack[static_cast<std::size_t>(depth) + 1];
        stepper.prepend(a, stack[static_cast<std::size_t>(depth)], s);
        if (depth + 1 == cut) {
          Root r;
          r.state = s;
          std::copy(path, path + cut, r.path);
          roots.push_back(r);
        } else {
          visit(out[0], depth + 1, s, path);
          self(self, depth + 1);
        }
      }
    };
    if (cut > 0) shallow(shallow, 0);
  }
  out.resize(roots.size() + 1, init);
  parallel_for(roots.size(), threads, [&](std::size_t t) {
    Acc& acc = out[t + 1];
    std::vector<NodeState> stack(static_cast<std::size_t>(max_depth) + 1);
    Symbol path[kMaxDepth];
    std::copy(roots[t].path, roots[t].path + cut, path);
    stack[static_cast<std::size_t>(cut)] = roots[t].state;
    visit(acc, cut, stack[static_cast<std::size_t>(cut)], static_cast<const Symbol*>(path));
    auto deep = [&](auto&& self, int depth) -> void {
      if (depth == max_depth) return;
      for (int a = 0; a < m; ++a) {
        path[depth] = static_cast<Symbol>(a);
        NodeState& s = stack[static_cast<std::size_t>(depth) + 1];
        stepper.prepend(a, stack[static_cast<std::size_t>(depth)], s);
        visit(acc, depth + 1, s, static_cast<const Symbol*>(path));
        self(self, depth + 1);
      }
    };
    deep(deep, cut);
  });
  return out;
}

// ---- operations ------------------------------------------------------------

Cylinder cylinder(const IntervalMap& map, const Word& word);

// Visits all m^n cylinders in lexicographic word order.
void enumerate_cylinders(const IntervalMap& map, int n, const std::function<void(const Cylinder&)>& visitor,
                         std::uint64_t budget = kDefaultCylinderBudget);

// Points x_j = T^j(pi(w . tail)) for j < |w|, computed backwards from
// x_{|w|} = tail_point through the inverse branches (stable, unlike forward
// iteration of an expanding map).
std::vector<double> symbolic_orbit(const IntervalMap& map, const Word& word, double tail_point = 0.5);

double birkhoff_average(const IntervalMap& map, const Observable& f, double x, int n);
double birkhoff_average_word(const IntervalMap& map, const Observable& f, const Word& word, double tail_point = 0.5);

double variation(const IntervalMap& map, const Observable& f, int n, int threads = 1,
                 std::uint64_t budget = kDefaultCylinderBudget);

double lemma21_gap(const IntervalMap& map, int n, int threads = 1, std::uint64_t budget = kDefaultCylinderBudget);
// One traversal for several depths; result aligned with `depths`.
std::vector<double> lemma21_gaps(const IntervalMap& map, const std::vector<int>& depths, int threads = 1,
                                 std::uint64_t budget = kDefaultCylinderBudget);

}  // namespace dimlab
