// Copyright 2026 The apcdn Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Exact solver for small bounded-variable mixed-integer linear programs.
//
// The LP engine is a dense-tableau bounded-variable simplex. Every row is
// turned into an equality with a bounded logical variable (a.x - s = 0), so the
// all-logical basis is always available as a starting point and primal
// infeasibility is handled by a composite phase 1 minimising the sum of bound
// violations. Pricing is Dantzig's largest reduced cost, switching to Bland's
// lowest-index rule after a streak of degenerate pivots.
//
// Integer variables are handled by best-bound branch-and-bound: branch on the
// lowest-index fractional integer variable, floor child first, ties in the
// node queue broken by insertion order. Children re-optimise from the parent's
// final tableau with the dual simplex.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace apcdn::milp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class RowSense { kLessEqual, kEqual, kGreaterEqual };
enum class ObjectiveSense { kMinimize, kMaximize };

struct VariableSpec {
  std::string name;
  double lower = 0.0;
  double upper = kInfinity;
  bool integral = false;
  // Among fractional integral variables, branch on the highest priority
  // first; ties go to the lowest index.
  int branch_priority = 0;
};

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct LinearConstraint {
  std::string name;
  std::vector<Term> terms;
  RowSense sense = RowSense::kLessEqual;
  double rhs = 0.0;
};

struct Objective {
  ObjectiveSense sense = ObjectiveSense::kMinimize;
  std::vector<Term> terms;
};

struct ProblemSpec {
  std::vector<VariableSpec> variables;
  std::vector<LinearConstraint> constraints;
  Objective objective;

  int add_variable(std::string name, double lower, double upper,
                   bool integral = false) {
    variables.push_back({std::move(name), lower, upper, integral});
    return static_cast<int>(variables.size()) - 1;
  }

  void add_constraint(std::string name, std::vector<Term> terms, RowSense sense,
                      double rhs) {
    constraints.push_back({std::move(name), std::move(terms), sense, rhs});
  }

  // Returns a description of the first structural problem found.
  std::optional<std::string> check() const {
    if (variables.empty()) return "problem has no variables";
    const int n = static_cast<int>(variables.size());
    for (const VariableSpec& v : variables) {
      if (std::isnan(v.lower) || std::isnan(v.upper)) return "NaN bound on " + v.name;
      if (v.integral && (!std::isfinite(v.lower) || !std::isfinite(v.upper))) {
        return "integral variable " + v.name + " needs finite bounds";
      }
    }
    auto check_terms = [n](const std::vector<Term>& terms) -> bool {
      for (const Term& t : terms) {
        if (t.var < 0 || t.var >= n || !std::isfinite(t.coef)) return false;
      }
      return true;
    };
    for (const LinearConstraint& c : constraints) {
      if (!check_terms(c.terms)) return "bad term in constraint " + c.name;
      if (!std::isfinite(c.rhs)) return "non-finite rhs in constraint " + c.name;
    }
    if (!check_terms(objective.terms)) return "bad term in objective";
    return std::nullopt;
  }
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kIterationLimit: return "iteration-limit";
  }
  return "?";
}

struct SolverOptions {
  double feasibility_tolerance = 1e-6;
  double integrality_tolerance = 1e-6;
  std::int64_t max_pivots = 50'000;  // per LP solve
  std::int64_t max_nodes = 100'000;
  // Activity-based bound tightening before the root LP of solve_milp.
  bool propagate_bounds = true;
  // Memory ceiling for parent tableaus kept alive for warm starts; nodes
  // beyond it are solved from the logical basis instead.
  std::size_t warm_start_budget_bytes = std::size_t{256} << 20;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kInfeasible;
  std::vector<double> values;
  double objective_value = 0.0;
  std::int64_t pivots = 0;
  std::int64_t nodes = 0;
};

inline double evaluate(std::span<const Term> terms, std::span<const double> values) {
  double sum = 0.0;
  for (const Term& t : terms) sum += t.coef * values[t.var];
  return sum;
}

// Adds one row pinning `terms` to the optimum just reached, for lexicographic
// chaining of objectives.
inline ProblemSpec freeze_stage(ProblemSpec problem, std::vector<Term> terms,
                                double achieved, ObjectiveSense sense,
                                double slack) {
  const std::string name = "freeze_" + std::to_string(problem.constraints.size());
  if (sense == ObjectiveSense::kMaximize) {
    problem.add_constraint(name, std::move(terms), RowSense::kGreaterEqual,
                           achieved - slack);
  } else {
    problem.add_constraint(name, std::move(terms), RowSense::kLessEqual,
                           achieved + slack);
  }
  return problem;
}

namespace detail {

inline constexpr double kPrimalTol = 1e-9;
inline constexpr double kDualTol = 1e-9;
inline constexpr double kPivotTol = 1e-9;
inline constexpr double kDropTol = 1e-13;
inline constexpr int kDegenerateStreak = 50;

enum class VarState : std::uint8_t { kBasic, kAtLower, kAtUpper, kFree };

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

// Dense bounded simplex over structural variables followed by one logical
// variable per row. Copyable so branch-and-bound children can start from the
// parent's final tableau.
class DenseSimplex {
 public:
  DenseSimplex(const ProblemSpec& problem, std::span<const double> lower,
               std::span<const double> upper)
      : m_(static_cast<int>(problem.constraints.size())),
        n_struct_(static_cast<int>(problem.variables.size())),
        n_(n_struct_ + m_) {
    tab_.assign(static_cast<std::size_t>(m_) * n_, 0.0);
    lb_.assign(n_, 0.0);
    ub_.assign(n_, 0.0);
    cost_.assign(n_, 0.0);
    x_.assign(n_, 0.0);
    head_.assign(m_, 0);
    row_of_.assign(n_, -1);
    state_.assign(n_, VarState::kAtLower);

    const double sign =
        problem.objective.sense == ObjectiveSense::kMaximize ? -1.0 : 1.0;
    for (const Term& t : problem.objective.terms) cost_[t.var] += sign * t.coef;

    for (int j = 0; j < n_struct_; ++j) {
      lb_[j] = lower[j];
      ub_[j] = upper[j];
      set_nonbasic_default(j);
    }
    for (int r = 0; r < m_; ++r) {
      const LinearConstraint& c = problem.constraints[r];
      double* row = row_ptr(r);
      for (const Term& t : c.terms) row[t.var] -= t.coef;
      const int s = n_struct_ + r;
      row[s] = 1.0;
      switch (c.sense) {
        case RowSense::kLessEqual: lb_[s] = -kInfinity; ub_[s] = c.rhs; break;
        case RowSense::kGreaterEqual: lb_[s] = c.rhs; ub_[s] = kInfinity; break;
        case RowSense::kEqual: lb_[s] = c.rhs; ub_[s] = c.rhs; break;
      }
      head_[r] = s;
      row_of_[s] = r;
      state_[s] = VarState::kBasic;
    }
    recompute_basics();
    d_ = cost_;  // logical costs are zero, so d = c initially
  }

  int rows() const { return m_; }
  int structurals() const { return n_struct_; }
  std::size_t bytes() const { return tab_.size() * sizeof(double) + n_ * 48; }
  std::int64_t pivots() const { return pivots_; }

  std::span<const double> values() const {
    return std::span<const double>(x_).first(n_struct_);
  }

  double objective() const {
    double z = 0.0;
    for (int j = 0; j < n_struct_; ++j) z += cost_[j] * x_[j];
    return z;
  }

  // Tightens the bounds of a structural variable. Nonbasic variables follow
  // their bound and the basic values are updated accordingly; returns false
  // if the new interval is empty.
  bool tighten(int j, double lower, double upper) {
    lower = std::max(lower, lb_[j]);
    upper = std::min(upper, ub_[j]);
    if (lower > upper + kPrimalTol) return false;
    lb_[j] = lower;
    ub_[j] = std::max(lower, upper);
    if (state_[j] == VarState::kBasic) return true;
    double target = x_[j];
    if (state_[j] == VarState::kAtLower) {
      target = lb_[j];
    } else if (state_[j] == VarState::kAtUpper) {
      target = ub_[j];
    } else if (std::isfinite(lb_[j]) && target < lb_[j]) {
      target = lb_[j];
      state_[j] = VarState::kAtLower;
    } else if (std::isfinite(ub_[j]) && target > ub_[j]) {
      target = ub_[j];
      state_[j] = VarState::kAtUpper;
    }
    if (!std::isfinite(target)) {
      target = std::isfinite(lb_[j]) ? lb_[j] : ub_[j];
    }
    move_nonbasic(j, target - x_[j]);
    return true;
  }

  // Phase 1 (if needed) then phase 2 from the current basis.
  LpStatus solve_primal(std::int64_t max_pivots) {
    const std::int64_t limit = pivots_ + max_pivots;
    LpStatus st = primal_loop(/*phase_one=*/true, limit);
    if (st != LpStatus::kOptimal) return st;
    st = primal_loop(/*phase_one=*/false, limit);
    if (st != LpStatus::kOptimal) return st;
    return polish(limit);
  }

  // Dual simplex from a dual-feasible basis whose primal values were
  // disturbed by bound changes, followed by a primal clean-up pass.
  LpStatus reoptimize(std::int64_t max_pivots) {
    const std::int64_t limit = pivots_ + max_pivots;
    LpStatus st = dual_loop(limit);
    if (st != LpStatus::kOptimal) return st;
    st = primal_loop(/*phase_one=*/true, limit);
    if (st != LpStatus::kOptimal) return st;
    st = primal_loop(/*phase_one=*/false, limit);
    if (st != LpStatus::kOptimal) return st;
    return polish(limit);
  }

  // Largest violation of the original rows by the current values.
  double residual(const ProblemSpec& problem) const {
    double worst = 0.0;
    for (int r = 0; r < m_; ++r) {
      double act = 0.0;
      for (const Term& t : problem.constraints[r].terms) act += t.coef * x_[t.var];
      worst = std::max(worst, std::abs(act - x_[n_struct_ + r]));
    }
    return worst;
  }

  double max_primal_violation() const {
    double worst = 0.0;
    for (int j = 0; j < n_; ++j) worst = std::max(worst, violation(j));
    return worst;
  }

 private:
  double* row_ptr(int r) { return tab_.data() + static_cast<std::size_t>(r) * n_; }
  const double* row_ptr(int r) const {
    return tab_.data() + static_cast<std::size_t>(r) * n_;
  }
  double at(int r, int j) const { return tab_[static_cast<std::size_t>(r) * n_ + j]; }

  void set_nonbasic_default(int j) {
    if (std::isfinite(lb_[j])) {
      state_[j] = VarState::kAtLower;
      x_[j] = lb_[j];
    } else if (std::isfinite(ub_[j])) {
      state_[j] = VarState::kAtUpper;
      x_[j] = ub_[j];
    } else {
      state_[j] = VarState::kFree;
      x_[j] = 0.0;
    }
  }

  double violation(int j) const {
    if (x_[j] < lb_[j]) return lb_[j] - x_[j];
    if (x_[j] > ub_[j]) return x_[j] - ub_[j];
    return 0.0;
  }

  void move_nonbasic(int j, double delta) {
    if (delta == 0.0) return;
    x_[j] += delta;
    for (int r = 0; r < m_; ++r) {
      const double a = at(r, j);
      if (a != 0.0) x_[head_[r]] -= a * delta;
    }
  }

  // x_B = -T_N x_N, exact for the current tableau.
  void recompute_basics() {
    for (int r = 0; r < m_; ++r) {
      const double* row = row_ptr(r);
      double v = 0.0;
      for (int j = 0; j < n_; ++j) {
        if (state_[j] != VarState::kBasic && row[j] != 0.0 && x_[j] != 0.0) {
          v -= row[j] * x_[j];
        }
      }
      x_[head_[r]] = v;
    }
  }

  void recompute_reduced_costs() {
    d_ = cost_;
    for (int r = 0; r < m_; ++r) {
      const double cb = cost_[head_[r]];
      if (cb == 0.0) continue;
      const double* row = row_ptr(r);
      for (int j = 0; j < n_; ++j) {
        if (row[j] != 0.0) d_[j] -= cb * row[j];
      }
    }
    for (int r = 0; r < m_; ++r) d_[head_[r]] = 0.0;
  }

  void pivot(int r, int q) {
    double* prow = row_ptr(r);
    const double inv = 1.0 / prow[q];
    nz_.clear();
    for (int j = 0; j < n_; ++j) {
      if (prow[j] != 0.0) {
        prow[j] *= inv;
        nz_.push_back(j);
      }
    }
    prow[q] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = row_ptr(i);
      const double f = row[q];
      if (f == 0.0) continue;
      for (int j : nz_) {
        double v = row[j] - f * prow[j];
        row[j] = std::abs(v) < kDropTol ? 0.0 : v;
      }
      row[q] = 0.0;
    }
    const double fd = d_[q];
    if (fd != 0.0) {
      for (int j : nz_) d_[j] -= fd * prow[j];
    }
    d_[q] = 0.0;
    const int leaving = head_[r];
    row_of_[leaving] = -1;
    head_[r] = q;
    row_of_[q] = r;
    state_[q] = VarState::kBasic;
    ++pivots_;
    (void)leaving;
  }

  struct Entering {
    int var = -1;
    double direction = 0.0;
  };

  Entering choose_entering(std::span<const double> reduced, bool bland) const {
    Entering best;
    double best_score = 0.0;
    for (int j = 0; j < n_; ++j) {
      const VarState s = state_[j];
      if (s == VarState::kBasic || lb_[j] == ub_[j]) continue;
      const double dj = reduced[j];
      double dir = 0.0;
      if (dj < -kDualTol && (s == VarState::kAtLower || s == VarState::kFree)) {
        dir = 1.0;
      } else if (dj > kDualTol && (s == VarState::kAtUpper || s == VarState::kFree)) {
        dir = -1.0;
      }
      if (dir == 0.0) continue;
      if (bland) return {j, dir};
      if (std::abs(dj) > best_score) {
        best_score = std::abs(dj);
        best = {j, dir};
      }
    }
    return best;
  }

  LpStatus primal_loop(bool phase_one, std::int64_t limit) {
    std::vector<double> phase_costs;
    int degenerate = 0;
    while (true) {
      if (pivots_ >= limit) return LpStatus::kIterationLimit;
      std::span<const double> reduced = d_;
      if (phase_one) {
        phase_costs.assign(n_, 0.0);
        bool any = false;
        for (int r = 0; r < m_; ++r) {
          const int b = head_[r];
          double w = 0.0;
          if (x_[b] < lb_[b] - kPrimalTol) {
            w = -1.0;
          } else if (x_[b] > ub_[b] + kPrimalTol) {
            w = 1.0;
          }
          if (w == 0.0) continue;
          any = true;
          const double* row = row_ptr(r);
          for (int j = 0; j < n_; ++j) {
            if (row[j] != 0.0) phase_costs[j] -= w * row[j];
          }
        }
        if (!any) return LpStatus::kOptimal;
        for (int r = 0; r < m_; ++r) phase_costs[head_[r]] = 0.0;
        reduced = phase_costs;
      }

      const bool bland = degenerate > kDegenerateStreak;
      const Entering in = choose_entering(reduced, bland);
      if (in.var < 0) {
        return phase_one ? LpStatus::kInfeasible : LpStatus::kOptimal;
      }
      const int q = in.var;
      const double dir = in.direction;

      double theta = ub_[q] - lb_[q];  // bound flip
      int leave_row = -1;
      double leave_target = 0.0;
      double leave_rate = 0.0;
      for (int r = 0; r < m_; ++r) {
        const double a = at(r, q);
        if (std::abs(a) <= kPivotTol) continue;
        const double rate = -a * dir;  // d x_B / d theta
        const int b = head_[r];
        const double xb = x_[b];
        double limit_val;
        double target;
        if (phase_one && xb < lb_[b] - kPrimalTol) {
          if (rate <= 0.0) continue;
          target = lb_[b];
        } else if (phase_one && xb > ub_[b] + kPrimalTol) {
          if (rate >= 0.0) continue;
          target = ub_[b];
        } else if (rate > 0.0) {
          if (!std::isfinite(ub_[b])) continue;
          target = ub_[b];
        } else {
          if (!std::isfinite(lb_[b])) continue;
          target = lb_[b];
        }
        limit_val = std::max(0.0, (target - xb) / rate);
        bool take = false;
        if (limit_val < theta - 1e-12) {
          take = true;
        } else if (limit_val <= theta + 1e-12 && leave_row >= 0) {
          if (bland) {
            take = b < head_[leave_row];
          } else {
            take = std::abs(rate) > std::abs(leave_rate);
          }
        }
        if (take) {
          theta = limit_val;
          leave_row = r;
          leave_target = target;
          leave_rate = rate;
        }
      }

      if (leave_row < 0 && !std::isfinite(theta)) {
        return phase_one ? LpStatus::kInfeasible : LpStatus::kUnbounded;
      }
      degenerate = theta <= 1e-12 ? degenerate + 1 : 0;

      // Apply the step.
      const double step = dir * theta;
      if (step != 0.0) {
        x_[q] += step;
        for (int r = 0; r < m_; ++r) {
          const double a = at(r, q);
          if (a != 0.0) x_[head_[r]] -= a * step;
        }
      }
      if (leave_row < 0) {
        // Entering variable reached its opposite bound.
        if (dir > 0) {
          state_[q] = VarState::kAtUpper;
          x_[q] = ub_[q];
        } else {
          state_[q] = VarState::kAtLower;
          x_[q] = lb_[q];
        }
        ++pivots_;
        continue;
      }
      const int leaving = head_[leave_row];
      pivot(leave_row, q);
      x_[leaving] = leave_target;
      state_[leaving] = leave_target == lb_[leaving] ? VarState::kAtLower
                                                     : VarState::kAtUpper;
    }
  }

  LpStatus dual_loop(std::int64_t limit) {
    int degenerate = 0;
    while (true) {
      if (pivots_ >= limit) return LpStatus::kIterationLimit;
      const bool bland = degenerate > kDegenerateStreak;
      int r = -1;
      double worst = kPrimalTol;
      for (int i = 0; i < m_; ++i) {
        const double v = violation(head_[i]);
        if (v <= kPrimalTol) continue;
        if (bland) {
          if (r < 0 || head_[i] < head_[r]) r = i;
        } else if (v > worst) {
          worst = v;
          r = i;
        }
      }
      if (r < 0) return LpStatus::kOptimal;

      const int b = head_[r];
      const double target = x_[b] < lb_[b] ? lb_[b] : ub_[b];
      const double delta = x_[b] - target;  // x_b must change by -delta
      const double* row = row_ptr(r);
      int q = -1;
      double best_ratio = kInfinity;
      for (int j = 0; j < n_; ++j) {
        const VarState s = state_[j];
        if (s == VarState::kBasic || lb_[j] == ub_[j]) continue;
        const double a = row[j];
        if (std::abs(a) <= kPivotTol) continue;
        // Moving x_j by delta / a brings x_b onto its bound.
        const bool increase = (delta > 0) == (a > 0);
        if (increase && s == VarState::kAtUpper) continue;
        if (!increase && s == VarState::kAtLower) continue;
        const double ratio = std::abs(d_[j]) / std::abs(a);
        bool take = false;
        if (ratio < best_ratio - 1e-12) {
          take = true;
        } else if (ratio <= best_ratio + 1e-12 && q >= 0 && !bland) {
          take = std::abs(a) > std::abs(row[q]);
        }
        if (take) {
          best_ratio = ratio;
          q = j;
        }
      }
      if (q < 0) return LpStatus::kInfeasible;
      degenerate = best_ratio <= 1e-12 ? degenerate + 1 : 0;

      const double step = delta / row[q];
      x_[q] += step;
      for (int i = 0; i < m_; ++i) {
        const double a = at(i, q);
        if (a != 0.0) x_[head_[i]] -= a * step;
      }
      pivot(r, q);
      x_[b] = target;
      state_[b] = target == lb_[b] ? VarState::kAtLower : VarState::kAtUpper;
    }
  }

  // Refreshes values and reduced costs from the tableau and re-runs the
  // primal phases if drift broke feasibility or optimality.
  LpStatus polish(std::int64_t limit) {
    for (int round = 0; round < 3; ++round) {
      recompute_basics();
      recompute_reduced_costs();
      bool clean = true;
      for (int r = 0; r < m_ && clean; ++r) {
        if (violation(head_[r]) > 1e-7) clean = false;
      }
      if (clean && choose_entering(d_, false).var < 0) return LpStatus::kOptimal;
      LpStatus st = primal_loop(true, limit);
      if (st != LpStatus::kOptimal) return st;
      st = primal_loop(false, limit);
      if (st != LpStatus::kOptimal) return st;
    }
    return LpStatus::kOptimal;
  }

  int m_;
  int n_struct_;
  int n_;
  std::vector<double> tab_;
  std::vector<double> lb_, ub_, cost_, x_, d_;
  std::vector<int> head_;
  std::vector<int> row_of_;
  std::vector<VarState> state_;
  std::vector<int> nz_;
  std::int64_t pivots_ = 0;
};

inline SolveStatus to_solve_status(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return SolveStatus::kOptimal;
    case LpStatus::kInfeasible: return SolveStatus::kInfeasible;
    case LpStatus::kUnbounded: return SolveStatus::kUnbounded;
    case LpStatus::kIterationLimit: return SolveStatus::kIterationLimit;
  }
  return SolveStatus::kInfeasible;
}

// Single-row activity propagation. Returns false if some interval empties.
inline bool propagate_bounds(const ProblemSpec& problem, std::vector<double>& lo,
                             std::vector<double>& hi, double int_tol) {
  const auto& vars = problem.variables;
  for (int pass = 0; pass < 20; ++pass) {
    bool changed = false;
    for (const LinearConstraint& c : problem.constraints) {
      double min_act = 0.0, max_act = 0.0;
      int min_inf = 0, max_inf = 0;
      for (const Term& t : c.terms) {
        if (t.coef > 0) {
          if (std::isfinite(lo[t.var])) min_act += t.coef * lo[t.var]; else ++min_inf;
          if (std::isfinite(hi[t.var])) max_act += t.coef * hi[t.var]; else ++max_inf;
        } else if (t.coef < 0) {
          if (std::isfinite(hi[t.var])) min_act += t.coef * hi[t.var]; else ++min_inf;
          if (std::isfinite(lo[t.var])) max_act += t.coef * lo[t.var]; else ++max_inf;
        }
      }
      const bool has_upper = c.sense != RowSense::kGreaterEqual;
      const bool has_lower = c.sense != RowSense::kLessEqual;
      for (const Term& t : c.terms) {
        if (t.coef == 0.0) continue;
        const int j = t.var;
        // Activity of the other terms.
        double others_min, others_max;
        int others_min_inf = min_inf, others_max_inf = max_inf;
        if (t.coef > 0) {
          if (std::isfinite(lo[j])) others_min = min_act - t.coef * lo[j]; else { others_min = min_act; --others_min_inf; }
          if (std::isfinite(hi[j])) others_max = max_act - t.coef * hi[j]; else { others_max = max_act; --others_max_inf; }
        } else {
          if (std::isfinite(hi[j])) others_min = min_act - t.coef * hi[j]; else { others_min = min_act; --others_min_inf; }
          if (std::isfinite(lo[j])) others_max = max_act - t.coef * lo[j]; else { others_max = max_act; --others_max_inf; }
        }
        double new_lo = -kInfinity, new_hi = kInfinity;
        if (has_upper && others_min_inf == 0) {
          const double v = (c.rhs - others_min) / t.coef;
          if (t.coef > 0) new_hi = v; else new_lo = v;
        }
        if (has_lower && others_max_inf == 0) {
          const double v = (c.rhs - others_max) / t.coef;
          if (t.coef > 0) new_lo = std::max(new_lo, v); else new_hi = std::min(new_hi, v);
        }
        if (vars[j].integral) {
          new_lo = std::ceil(new_lo - int_tol);
          new_hi = std::floor(new_hi + int_tol);
        } else {
          new_lo -= 1e-9 * (1.0 + std::abs(new_lo));
          new_hi += 1e-9 * (1.0 + std::abs(new_hi));
        }
        const double min_gain = vars[j].integral ? 0.5 : 1e-7 * (1.0 + std::abs(hi[j] - lo[j]));
        if (new_lo > lo[j] + min_gain) {
          lo[j] = new_lo;
          changed = true;
        }
        if (new_hi < hi[j] - min_gain) {
          hi[j] = new_hi;
          changed = true;
        }
        if (lo[j] > hi[j] + 1e-9) return false;
        if (lo[j] > hi[j]) hi[j] = lo[j];
      }
    }
    if (!changed) break;
  }
  return true;
}

inline void fill_result(SolveResult& result, const ProblemSpec& problem,
                        std::span<const double> values) {
  result.values.assign(values.begin(), values.end());
  result.objective_value = evaluate(problem.objective.terms, result.values);
}

}  // namespace detail

// Continuous relaxation; integrality flags are ignored.
inline SolveResult solve_lp(const ProblemSpec& problem,
                            const SolverOptions& options = {}) {
  if (auto err = problem.check()) throw std::invalid_argument(*err);
  SolveResult result;
  std::vector<double> lo, hi;
  for (const VariableSpec& v : problem.variables) {
    lo.push_back(v.lower);
    hi.push_back(v.upper);
    if (v.lower > v.upper) return result;  // infeasible
  }
  detail::DenseSimplex lp(problem, lo, hi);
  const detail::LpStatus st = lp.solve_primal(options.max_pivots);
  result.status = detail::to_solve_status(st);
  result.pivots = lp.pivots();
  if (st == detail::LpStatus::kOptimal) detail::fill_result(result, problem, lp.values());
  return result;
}

inline SolveResult solve_milp(const ProblemSpec& problem,
                              const SolverOptions& options = {}) {
  using detail::DenseSimplex;
  using detail::LpStatus;
  if (auto err = problem.check()) throw std::invalid_argument(*err);

  SolveResult result;
  const int n = static_cast<int>(problem.variables.size());
  std::vector<double> root_lo(n), root_hi(n);
  for (int j = 0; j < n; ++j) {
    root_lo[j] = problem.variables[j].lower;
    root_hi[j] = problem.variables[j].upper;
    if (problem.variables[j].integral) {
      root_lo[j] = std::ceil(root_lo[j] - options.integrality_tolerance);
      root_hi[j] = std::floor(root_hi[j] + options.integrality_tolerance);
    }
    if (root_lo[j] > root_hi[j]) return result;
  }
  if (options.propagate_bounds &&
      !detail::propagate_bounds(problem, root_lo, root_hi,
                                options.integrality_tolerance)) {
    return result;
  }
  const double sign =
      problem.objective.sense == ObjectiveSense::kMaximize ? -1.0 : 1.0;

  struct Node {
    std::vector<double> lo, hi;
    std::shared_ptr<const DenseSimplex> parent;  // null: solve from scratch
    int branch_var = -1;
    double bound = -kInfinity;  // minimisation form
    std::int64_t seq = 0;
    int depth = 0;
    double key = -kInfinity;  // bound on a 1e-9 grid
  };
  // Best bound first; among equal bounds the deepest, newest node, so that
  // degenerate optimal faces are dived into rather than swept breadth-first.
  struct Order {
    bool operator()(const Node* a, const Node* b) const {
      if (a->key != b->key) return a->key > b->key;
      if (a->depth != b->depth) return a->depth < b->depth;
      return a->seq < b->seq;
    }
  };
  std::vector<std::unique_ptr<Node>> storage;
  std::priority_queue<Node*, std::vector<Node*>, Order> open;
  std::int64_t next_seq = 0;
  std::size_t warm_bytes = 0;

  auto push = [&](Node node) {
    node.seq = next_seq++;
    node.key = std::isfinite(node.bound) ? std::nearbyint(node.bound * 1e9) : node.bound;
    if (node.parent) warm_bytes += node.parent->bytes();
    storage.push_back(std::make_unique<Node>(std::move(node)));
    open.push(storage.back().get());
  };
  push(Node{root_lo, root_hi, nullptr, -1, -kInfinity, 0, 0});

  bool have_incumbent = false;
  double incumbent = kInfinity;  // minimisation form
  std::vector<double> best;
  const double gap_tol = 1e-9;

  while (!open.empty()) {
    Node* node = open.top();
    open.pop();
    std::shared_ptr<const DenseSimplex> parent = std::move(node->parent);
    node->parent.reset();
    if (parent) warm_bytes -= parent->bytes();
    const std::vector<double> lo = std::move(node->lo);
    const std::vector<double> hi = std::move(node->hi);
    const int branch_var = node->branch_var;
    const double node_bound = node->bound;
    const int depth = node->depth;
    if (have_incumbent && node_bound >= incumbent - gap_tol) continue;

    if (result.nodes >= options.max_nodes) {
      result.status = SolveStatus::kIterationLimit;
      return result;
    }
    ++result.nodes;

    std::shared_ptr<DenseSimplex> lp;
    LpStatus st;
    bool warm = false;
    if (parent) {
      lp = parent.use_count() == 1
               ? std::const_pointer_cast<DenseSimplex>(std::move(parent))
               : std::make_shared<DenseSimplex>(*parent);
      parent.reset();
      const std::int64_t before = lp->pivots();
      if (!lp->tighten(branch_var, lo[branch_var], hi[branch_var])) {
        continue;
      }
      st = lp->reoptimize(options.max_pivots);
      result.pivots += lp->pivots() - before;
      warm = true;
    } else {
      lp = std::make_shared<DenseSimplex>(problem, lo, hi);
      st = lp->solve_primal(options.max_pivots);
      result.pivots += lp->pivots();
    }
    if (st == LpStatus::kOptimal && lp->residual(problem) > 1e-7) {
      // Accumulated round-off in an inherited tableau; start over.
      lp = std::make_shared<DenseSimplex>(problem, lo, hi);
      st = lp->solve_primal(options.max_pivots);
      result.pivots += lp->pivots();
      warm = false;
    }
    (void)warm;
    if (st == LpStatus::kInfeasible) continue;
    if (st == LpStatus::kIterationLimit) {
      result.status = SolveStatus::kIterationLimit;
      return result;
    }
    if (st == LpStatus::kUnbounded) {
      result.status = SolveStatus::kUnbounded;
      return result;
    }

    const double obj = lp->objective();
    if (have_incumbent && obj >= incumbent - gap_tol) continue;

    const std::span<const double> x = lp->values();
    int frac = -1;
    for (int j = 0; j < n; ++j) {
      const VariableSpec& var = problem.variables[j];
      if (!var.integral) continue;
      if (frac >= 0 && var.branch_priority <= problem.variables[frac].branch_priority) {
        continue;
      }
      if (std::abs(x[j] - std::round(x[j])) > options.integrality_tolerance) frac = j;
    }
    if (frac < 0) {
      best.assign(x.begin(), x.end());
      for (int j = 0; j < n; ++j) {
        if (problem.variables[j].integral) best[j] = std::round(best[j]);
      }
      incumbent = sign * evaluate(problem.objective.terms, best);
      have_incumbent = true;
      continue;
    }

    const double v = x[frac];
    std::shared_ptr<const DenseSimplex> shared = std::move(lp);
    const bool keep = warm_bytes + 2 * shared->bytes() <= options.warm_start_budget_bytes;
    Node down{lo, hi, keep ? shared : nullptr, frac, obj, 0, depth + 1};
    down.hi[frac] = std::floor(v);
    Node up{lo, hi, keep ? shared : nullptr, frac, obj, 0, depth + 1};
    up.lo[frac] = std::ceil(v);
    shared.reset();
    push(std::move(down));
    push(std::move(up));
  }

  if (have_incumbent) {
    result.status = SolveStatus::kOptimal;
    detail::fill_result(result, problem, best);
  } else {
    result.status = SolveStatus::kInfeasible;
  }
  return result;
}

struct LexicographicResult {
  SolveStatus status = SolveStatus::kInfeasible;
  int stages_solved = 0;  // stages that reached optimality
  std::vector<double> stage_values;
  std::vector<double> values;  // solution of the last solved stage
  std::int64_t nodes = 0;
  std::int64_t pivots = 0;
};

// `base` with the first `k` objectives pinned at `achieved` and objective k
// active.
inline ProblemSpec stage_problem(const ProblemSpec& base,
                                 std::span<const Objective> stages,
                                 std::span<const double> achieved, int k,
                                 double slack) {
  ProblemSpec p = base;
  for (int s = 0; s < k; ++s) {
    p = freeze_stage(std::move(p), stages[s].terms, achieved[s], stages[s].sense,
                     slack);
  }
  p.objective = stages[k];
  return p;
}

// Optimises `stages` in order, each one under the optimality of the previous
// ones (up to `slack`). Stops at the first stage that is not optimal.
inline LexicographicResult solve_lexicographic(const ProblemSpec& base,
                                               std::span<const Objective> stages,
                                               double slack,
                                               const SolverOptions& options = {}) {
  LexicographicResult out;
  ProblemSpec p = base;
  for (std::size_t k = 0; k < stages.size(); ++k) {
    if (k > 0) {
      p = freeze_stage(std::move(p), stages[k - 1].terms, out.stage_values.back(),
                       stages[k - 1].sense, slack);
    }
    p.objective = stages[k];
    const SolveResult r = solve_milp(p, options);
    out.nodes += r.nodes;
    out.pivots += r.pivots;
    out.status = r.status;
    if (r.status != SolveStatus::kOptimal) return out;
    out.stage_values.push_back(r.objective_value);
    out.values = r.values;
    ++out.stages_solved;
  }
  return out;
}

}  // namespace apcdn::milp
