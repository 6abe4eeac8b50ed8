#pragma once

#include <cstddef>
#include <limits>
#include <string_view>
#include <vector>

namespace fairmatch::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Sense { less_equal, equal, greater_equal };
enum class Status { optimal, infeasible, unbounded, iteration_limit };

std::string_view to_string(Status s);

struct Term {
  std::size_t var;
  double coef;
};

struct Constraint {
  std::vector<Term> terms;
  Sense sense;
  double rhs;
};

/// min c'x  s.t.  rows (<=, =, >=),  lower <= x <= upper.
/// Lower bounds must be finite; upper bounds may be kInfinity.
class Problem {
 public:
  std::size_t add_variable(double cost, double lower, double upper);
  void add_constraint(std::vector<Term> terms, Sense sense, double rhs);

  std::size_t num_variables() const { return cost_.size(); }
  std::size_t num_constraints() const { return rows_.size(); }
  const std::vector<double>& cost() const { return cost_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<Constraint>& constraints() const { return rows_; }

 private:
  std::vector<double> cost_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<Constraint> rows_;
};

struct Options {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-11;
  /// Per phase; 0 picks 100 * (rows + columns) + 1000.
  std::size_t max_iterations = 0;
  /// Consecutive degenerate pivots tolerated under Dantzig pricing before
  /// switching to Bland's rule.
  std::size_t degenerate_before_bland = 50;
  bool always_bland = false;
};

struct Result {
  Status status = Status::infeasible;
  std::vector<double> x;  // structural variables; empty unless optimal
  double objective = 0.0;
  std::size_t iterations = 0;
};

/// Two-phase bounded-variable primal simplex on a dense tableau. Nonbasic
/// variables sit at one of their bounds, so box constraints never become
/// rows. Basic values are re-solved from the original matrix at the end.
Result solve(const Problem& problem, const Options& options = {});

}  // namespace fairmatch::lp
