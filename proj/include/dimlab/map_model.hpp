#pragma once

#include <string>
#include <vector>

namespace dimlab {

inline constexpr double kDefaultInverseTol = 1e-13;
inline constexpr double kParabolicTol = 1e-9;

enum class BranchKind { Linear, Manneville, Polynomial };

const char* branch_kind_name(BranchKind kind);

// One monotone full branch T_i : [lo, hi] -> [0, 1].
struct BranchSpec {
  int index = 0;
  double lo = 0.0;
  double hi = 1.0;
  BranchKind kind = BranchKind::Linear;
  // linear: {slope, offset} with T(x) = slope*x + offset
  // manneville: {beta, shift} with T(x) = x + x^(1+beta) - shift
  // polynomial: coefficients c0, c1, ... of T(x) = sum c_k x^k
  std::vector<double> params;

  double value(double x) const;
  double derivative(double x) const;
  bool increasing() const;
};

struct FixedPoint {
  int branch = 0;
  double x = 0.0;
  double derivative = 0.0;
  bool parabolic = false;
};

class IntervalMap {
 public:
  IntervalMap() = default;
  // Validates the branches (monotone, surjective, expanding, disjoint) and
  // locates the fixed points. Throws dimlab::Error on invalid input.
  explicit IntervalMap(std::vector<BranchSpec> branches, std::string name = "");

  static IntervalMap manneville(double beta);
  static IntervalMap linear(const std::vector<double>& slopes, const std::vector<double>& left_ends);
  static IntervalMap doubling();
  static IntervalMap middle_thirds();

  int size() const { return static_cast<int>(branches_.size()); }
  const std::string& name() const { return name_; }
  const BranchSpec& branch(int i) const { return branches_.at(static_cast<std::size_t>(i)); }
  const std::vector<BranchSpec>& branches() const { return branches_; }
  const std::vector<FixedPoint>& fixed_points() const { return fixed_points_; }
  bool is_linear() const { return linear_; }
  bool has_gaps() const { return gaps_; }

  // Branch containing x. A point shared by two closures goes to the branch
  // whose left endpoint equals x, ties to the lower index.
  int branch_of(double x) const;
  double eval(double x) const;
  double derivative(double x) const;
  double inverse(int symbol, double y, double tol = kDefaultInverseTol) const;
  // |S_a'(y)| = 1/|T_a'(S_a(y))|
  double inverse_derivative(int symbol, double y) const;

 private:
  std::vector<BranchSpec> branches_;
  std::vector<FixedPoint> fixed_points_;
  std::string name_;
  bool linear_ = false;
  bool gaps_ = false;
};

std::vector<FixedPoint> find_fixed_points(const IntervalMap& map, double tol = 1e-14);

}  // namespace dimlab
