#include "fairmatch/lp.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace fairmatch::lp {

std::string_view to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

std::size_t Problem::add_variable(double cost, double lower, double upper) {
  if (!std::isfinite(lower)) throw std::invalid_argument("lower bounds must be finite");
  if (upper < lower) throw std::invalid_argument("upper bound below lower bound");
  cost_.push_back(cost);
  lower_.push_back(lower);
  upper_.push_back(upper);
  return cost_.size() - 1;
}

void Problem::add_constraint(std::vector<Term> terms, Sense sense, double rhs) {
  for (const Term& t : terms) {
    if (t.var >= cost_.size()) throw std::invalid_argument("constraint references unknown variable");
  }
  rows_.push_back({std::move(terms), sense, rhs});
}

namespace {

enum class Phase { feasibility, optimality };

class Tableau {
 public:
  Tableau(const Problem& p, const Options& opt) : opt_(opt) {
    m_ = p.num_constraints();
    n_struct_ = p.num_variables();

    // Column layout: structural | one slack per inequality | one artificial per row.
    std::vector<std::optional<std::size_t>> slack_of_row(m_);
    std::size_t n_slack = 0;
    for (std::size_t r = 0; r < m_; ++r) {
      if (p.constraints()[r].sense != Sense::equal) slack_of_row[r] = n_struct_ + n_slack++;
    }
    first_artificial_ = n_struct_ + n_slack;
    n_ = first_artificial_ + m_;

    lo_.assign(n_, 0.0);
    hi_.assign(n_, kInfinity);
    cost_.assign(n_, 0.0);
    for (std::size_t j = 0; j < n_struct_; ++j) {
      lo_[j] = p.lower()[j];
      hi_[j] = p.upper()[j];
      cost_[j] = p.cost()[j];
    }

    dense_.assign(m_ * n_, 0.0);
    rhs_.assign(m_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      const Constraint& c = p.constraints()[r];
      for (const Term& t : c.terms) at(dense_, r, t.var) += t.coef;
      if (slack_of_row[r]) at(dense_, r, *slack_of_row[r]) = c.sense == Sense::less_equal ? 1.0 : -1.0;
      rhs_[r] = c.rhs;
    }

    value_.assign(n_, 0.0);
    at_upper_.assign(n_, false);
    for (std::size_t j = 0; j < first_artificial_; ++j) value_[j] = lo_[j];

    // Artificial k carries sign(residual_k) so it starts at |residual_k| >= 0.
    tab_ = dense_;
    basis_.assign(m_, 0);
    row_of_.assign(n_, npos);
    for (std::size_t r = 0; r < m_; ++r) {
      double residual = rhs_[r];
      for (std::size_t j = 0; j < first_artificial_; ++j) residual -= at(dense_, r, j) * value_[j];
      const double sign = residual >= 0.0 ? 1.0 : -1.0;
      const std::size_t a = first_artificial_ + r;
      at(dense_, r, a) = sign;
      for (std::size_t j = 0; j < n_; ++j) at(tab_, r, j) = at(dense_, r, j) * sign;
      value_[a] = std::abs(residual);
      basis_[r] = a;
      row_of_[a] = r;
    }
  }

  Status run(Phase phase, std::size_t& iterations) {
    std::vector<double> c(n_, 0.0);
    if (phase == Phase::feasibility) {
      for (std::size_t j = first_artificial_; j < n_; ++j) c[j] = 1.0;
    } else {
      c = cost_;
      for (std::size_t j = first_artificial_; j < n_; ++j) {
        hi_[j] = 0.0;
        c[j] = 0.0;
      }
    }
    const std::size_t limit = opt_.max_iterations ? opt_.max_iterations : 100 * (m_ + n_) + 1000;
    std::size_t degenerate_run = 0;
    std::vector<double> reduced(n_);

    for (std::size_t it = 0; it < limit; ++it) {
      const bool bland = opt_.always_bland || degenerate_run >= opt_.degenerate_before_bland;

      for (std::size_t j = 0; j < n_; ++j) {
        if (row_of_[j] != npos) {
          reduced[j] = 0.0;
          continue;
        }
        double d = c[j];
        for (std::size_t r = 0; r < m_; ++r) d -= c[basis_[r]] * at(tab_, r, j);
        reduced[j] = d;
      }

      std::size_t entering = npos;
      double best = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        if (row_of_[j] != npos || hi_[j] <= lo_[j]) continue;
        const double d = reduced[j];
        const bool improving = at_upper_[j] ? d > opt_.optimality_tol : d < -opt_.optimality_tol;
        if (!improving) continue;
        if (bland) {
          entering = j;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          entering = j;
        }
      }
      if (entering == npos) return Status::optimal;

      const double dir = at_upper_[entering] ? -1.0 : 1.0;
      double step = hi_[entering] - lo_[entering];
      std::size_t leaving_row = npos;
      double leaving_alpha = 0.0;
      for (std::size_t r = 0; r < m_; ++r) {
        const double alpha = at(tab_, r, entering) * dir;
        const std::size_t b = basis_[r];
        double limit_r;
        if (alpha > opt_.pivot_tol) {
          limit_r = (value_[b] - lo_[b]) / alpha;
        } else if (alpha < -opt_.pivot_tol && std::isfinite(hi_[b])) {
          limit_r = (hi_[b] - value_[b]) / -alpha;
        } else {
          continue;
        }
        limit_r = std::max(limit_r, 0.0);
        bool take = false;
        if (leaving_row == npos || limit_r < step) {
          take = leaving_row == npos ? limit_r <= step : true;
        } else if (limit_r == step) {
          take = bland ? b < basis_[leaving_row] : std::abs(alpha) > std::abs(leaving_alpha);
        }
        if (take) {
          step = limit_r;
          leaving_row = r;
          leaving_alpha = alpha;
        }
      }

      if (leaving_row == npos && !std::isfinite(step)) return Status::unbounded;

      ++iterations;
      degenerate_run = step <= 1e-12 ? degenerate_run + 1 : 0;

      value_[entering] += dir * step;
      for (std::size_t r = 0; r < m_; ++r) value_[basis_[r]] -= at(tab_, r, entering) * dir * step;

      if (leaving_row == npos) {
        // Bound flip: the entering variable reaches its opposite bound first.
        at_upper_[entering] = !at_upper_[entering];
        value_[entering] = at_upper_[entering] ? hi_[entering] : lo_[entering];
        continue;
      }

      const std::size_t leaving = basis_[leaving_row];
      const bool to_lower = leaving_alpha > 0.0;
      value_[leaving] = to_lower ? lo_[leaving] : hi_[leaving];
      at_upper_[leaving] = !to_lower;
      pivot(leaving_row, entering);
    }
    return Status::iteration_limit;
  }

  double artificial_mass() const {
    double s = 0.0;
    for (std::size_t j = first_artificial_; j < n_; ++j) s += value_[j];
    return s;
  }

  double rhs_scale() const {
    double s = 1.0;
    for (double b : rhs_) s = std::max(s, std::abs(b));
    return s;
  }

  // Re-solve B x_B = b - N x_N against the original (unscaled) rows.
  void polish() {
    std::vector<double> mat(m_ * m_, 0.0);
    std::vector<double> rhs = rhs_;
    for (std::size_t r = 0; r < m_; ++r) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (row_of_[j] != npos) continue;
        rhs[r] -= at(dense_, r, j) * value_[j];
      }
      for (std::size_t k = 0; k < m_; ++k) mat[r * m_ + k] = at(dense_, r, basis_[k]);
    }
    // Gaussian elimination with partial pivoting.
    for (std::size_t col = 0; col < m_; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < m_; ++r) {
        if (std::abs(mat[r * m_ + col]) > std::abs(mat[piv * m_ + col])) piv = r;
      }
      if (std::abs(mat[piv * m_ + col]) < 1e-12) return;  // keep tableau values
      if (piv != col) {
        for (std::size_t k = 0; k < m_; ++k) std::swap(mat[piv * m_ + k], mat[col * m_ + k]);
        std::swap(rhs[piv], rhs[col]);
      }
      for (std::size_t r = col + 1; r < m_; ++r) {
        const double f = mat[r * m_ + col] / mat[col * m_ + col];
        if (f == 0.0) continue;
        for (std::size_t k = col; k < m_; ++k) mat[r * m_ + k] -= f * mat[col * m_ + k];
        rhs[r] -= f * rhs[col];
      }
    }
    std::vector<double> sol(m_);
    for (std::size_t r = m_; r-- > 0;) {
      double s = rhs[r];
      for (std::size_t k = r + 1; k < m_; ++k) s -= mat[r * m_ + k] * sol[k];
      sol[r] = s / mat[r * m_ + r];
    }
    for (std::size_t k = 0; k < m_; ++k) {
      const std::size_t b = basis_[k];
      value_[b] = std::clamp(sol[k], lo_[b], hi_[b]);
    }
  }

  std::vector<double> structural() const {
    return {value_.begin(), value_.begin() + static_cast<std::ptrdiff_t>(n_struct_)};
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  double& at(std::vector<double>& mat, std::size_t r, std::size_t c) { return mat[r * n_ + c]; }
  double at(const std::vector<double>& mat, std::size_t r, std::size_t c) const { return mat[r * n_ + c]; }

  void pivot(std::size_t row, std::size_t col) {
    const double p = at(tab_, row, col);
    for (std::size_t j = 0; j < n_; ++j) at(tab_, row, j) /= p;
    for (std::size_t r = 0; r < m_; ++r) {
      if (r == row) continue;
      const double f = at(tab_, r, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n_; ++j) at(tab_, r, j) -= f * at(tab_, row, j);
      at(tab_, r, col) = 0.0;
    }
    row_of_[basis_[row]] = npos;
    basis_[row] = col;
    row_of_[col] = row;
  }

  const Options& opt_;
  std::size_t m_ = 0;
  std::size_t n_ = 0;
  std::size_t n_struct_ = 0;
  std::size_t first_artificial_ = 0;
  std::vector<double> dense_;  // original rows incl. slack/artificial columns
  std::vector<double> tab_;    // B^-1 A
  std::vector<double> rhs_;
  std::vector<double> lo_, hi_, cost_, value_;
  std::vector<bool> at_upper_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> row_of_;
};

}  // namespace

Result solve(const Problem& problem, const Options& options) {
  Result res;
  Tableau tab(problem, options);

  Status s = tab.run(Phase::feasibility, res.iterations);
  if (s == Status::iteration_limit) {
    res.status = s;
    return res;
  }
  if (tab.artificial_mass() > options.feasibility_tol * tab.rhs_scale()) {
    res.status = Status::infeasible;
    return res;
  }

  s = tab.run(Phase::optimality, res.iterations);
  res.status = s;
  if (s != Status::optimal) return res;

  tab.polish();
  res.x = tab.structural();
  res.objective = 0.0;
  for (std::size_t j = 0; j < res.x.size(); ++j) res.objective += problem.cost()[j] * res.x[j];
  return res;
}

}  // namespace fairmatch::lp
