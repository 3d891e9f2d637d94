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

// Three-stage lexicographic denoising of one course.
//
// Every count x (boarding y_i or alighting z_i) gets a triangular similarity
// to its observation c with half margin a:
//
//     H(x) = max(0, 1 - |x - c| / a)
//
// Stage I maximises min_i H_i, stage II maximises sum_i H_i under stage I's
// optimum, and stage III (only when priors exist) picks, under stage II's
// optimum, the counts closest to the historical split S * p where
// S = sum_i y_i. All stages share the operational constraints: flow
// conservation, counts and occupancy within [0, L_max], no boarding at the
// last stop, no alighting at the first one, counts at least the ticketing
// validations where those exist.
//
// Counts are laid out stop by stop: index 2*i is the boarding at stop i,
// index 2*i+1 the alighting.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apcdn/core.hpp"
#include "apcdn/milp.hpp"
#include "apcdn/priors.hpp"

namespace apcdn {

struct SimilaritySpec {
  int center = 0;
  double half_margin = 1.0;
};

inline double similarity(const SimilaritySpec& s, double x) {
  return std::max(0.0, 1.0 - std::abs(x - s.center) / s.half_margin);
}

inline double half_margin(int observed_count, const DenoiseConfig& config) {
  return std::max(static_cast<double>(config.alpha_floor),
                  config.alpha_ratio * observed_count);
}

inline int count_slot(int stop, bool alighting) { return 2 * stop + (alighting ? 1 : 0); }

inline std::vector<int> flatten(std::span<const StopCounts> counts) {
  std::vector<int> out;
  out.reserve(2 * counts.size());
  for (const StopCounts& c : counts) {
    out.push_back(c.boarding);
    out.push_back(c.alighting);
  }
  return out;
}

inline std::vector<StopCounts> unflatten(std::span<const int> flat) {
  std::vector<StopCounts> out(flat.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {flat[2 * i], flat[2 * i + 1]};
  return out;
}

// Centers are clamped into [0, count_cap]; margins use the raw observation.
inline std::vector<SimilaritySpec> build_similarities(const Course& course,
                                                      const DenoiseConfig& config) {
  const int cap = config.count_cap(course.capacity);
  std::vector<SimilaritySpec> out;
  out.reserve(2 * course.stops.size());
  for (const Stop& s : course.stops) {
    for (int obs : {s.observed.boarding, s.observed.alighting}) {
      out.push_back({std::clamp(obs, 0, cap), half_margin(obs, config)});
    }
  }
  return out;
}

enum class DenoiseStatus { kOk, kOkWithoutTicketing, kFailed };

inline const char* to_string(DenoiseStatus s) {
  switch (s) {
    case DenoiseStatus::kOk: return "ok";
    case DenoiseStatus::kOkWithoutTicketing: return "ok-without-ticketing";
    case DenoiseStatus::kFailed: return "failed";
  }
  return "?";
}

struct DenoiseResult {
  std::vector<StopCounts> counts;
  OccupancyProfile occupancy;
  double stage1_value = 0.0;  // optimal minimum similarity
  double stage2_value = 0.0;  // optimal similarity sum
  std::optional<double> stage3_value;
  std::optional<double> objective;  // single-objective baselines only
  double quality = 0.0;  // stage2_value / (2N)
  bool ticketing_dropped = false;
  DenoiseStatus status = DenoiseStatus::kFailed;
  std::string message;
  std::int64_t nodes = 0;
  double runtime_ms = 0.0;

  bool ok() const { return status != DenoiseStatus::kFailed; }
};

inline double quality_score(const DenoiseResult& result, int stops) {
  return result.stage2_value / (2.0 * stops);
}

// Variables and rows common to every optimisation-based method.
struct FlowModel {
  milp::ProblemSpec problem;
  std::vector<int> count_vars;      // 2N, stop by stop
  std::vector<int> occupancy_vars;  // N-1, after stops 0..N-2
  int max_load = 0;
};

inline FlowModel build_flow_model(const Course& course, const DenoiseConfig& config,
                                  bool with_ticketing) {
  using milp::RowSense;
  FlowModel m;
  const int n = static_cast<int>(course.stops.size());
  m.max_load = config.max_load(course.capacity);
  const double l_max = m.max_load;
  for (int i = 0; i < n; ++i) {
    const TicketCounts& t = course.stops[i].ticketing;
    for (bool alight : {false, true}) {
      double lo = 0.0;
      double hi = l_max;
      if ((!alight && i == n - 1) || (alight && i == 0)) hi = 0.0;
      const std::optional<int>& tick = alight ? t.alighting : t.boarding;
      if (with_ticketing && tick) lo = std::max(lo, static_cast<double>(*tick));
      const std::string name = (alight ? "z" : "y") + std::to_string(i + 1);
      m.count_vars.push_back(m.problem.add_variable(name, lo, hi, true));
    }
  }
  for (int i = 0; i + 1 < n; ++i) {
    m.occupancy_vars.push_back(
        m.problem.add_variable("o" + std::to_string(i + 1), 0.0, l_max));
  }
  // o_i = o_{i-1} + y_i - z_i
  for (int i = 0; i + 1 < n; ++i) {
    std::vector<milp::Term> terms = {{m.occupancy_vars[i], 1.0},
                                     {m.count_vars[count_slot(i, false)], -1.0},
                                     {m.count_vars[count_slot(i, true)], 1.0}};
    if (i > 0) terms.push_back({m.occupancy_vars[i - 1], -1.0});
    m.problem.add_constraint("occ" + std::to_string(i + 1), std::move(terms),
                             RowSense::kEqual, 0.0);
  }
  // Flow conservation, written as the vehicle being empty after the last stop;
  // with the occupancy chain this is sum y = sum z.
  std::vector<milp::Term> last = {{m.count_vars[count_slot(n - 1, false)], 1.0},
                                  {m.count_vars[count_slot(n - 1, true)], -1.0}};
  if (n >= 2) last.push_back({m.occupancy_vars[n - 2], 1.0});
  m.problem.add_constraint("balance", std::move(last), RowSense::kEqual, 0.0);
  return m;
}

struct DenoiseModel {
  FlowModel flow;
  std::vector<SimilaritySpec> sims;
  std::vector<int> sim_vars;
  std::vector<int> clamp_vars;
  int min_var = -1;
  std::vector<milp::Objective> stages;  // I, II and III when priors are attached
};

// Adds H_i, the clamp binaries and the stage I/II objectives. Each clamp
// binary b_i switches H_i to zero; the big-M on each side is the smallest
// value that keeps the triangle inactive over the count's box.
inline DenoiseModel build_denoise_model(const Course& course, const DenoiseConfig& config,
                                        bool with_ticketing) {
  using milp::RowSense;
  DenoiseModel d;
  d.flow = build_flow_model(course, config, with_ticketing);
  d.sims = build_similarities(course, config);
  milp::ProblemSpec& p = d.flow.problem;
  const int counts = static_cast<int>(d.sims.size());

  for (int k = 0; k < counts; ++k) {
    const milp::VariableSpec& xv = p.variables[d.flow.count_vars[k]];
    const double c = d.sims[k].center;
    const double a = d.sims[k].half_margin;
    const double m_up = std::max(0.0, (xv.upper - c) / a - 1.0);
    const double m_down = std::max(0.0, (c - xv.lower) / a - 1.0);
    const bool can_clamp = m_up > 0.0 || m_down > 0.0;
    d.clamp_vars.push_back(
        p.add_variable("b" + std::to_string(k), 0.0, can_clamp ? 1.0 : 0.0, true));
    p.variables[d.clamp_vars.back()].branch_priority = 1;
  }
  for (int k = 0; k < counts; ++k) {
    d.sim_vars.push_back(p.add_variable("h" + std::to_string(k), 0.0, 1.0));
  }
  d.min_var = p.add_variable("t", 0.0, 1.0);

  for (int k = 0; k < counts; ++k) {
    const int x = d.flow.count_vars[k];
    const int h = d.sim_vars[k];
    const int b = d.clamp_vars[k];
    const milp::VariableSpec& xv = p.variables[x];
    const double c = d.sims[k].center;
    const double a = d.sims[k].half_margin;
    const double m_up = std::max(0.0, (xv.upper - c) / a - 1.0);
    const double m_down = std::max(0.0, (c - xv.lower) / a - 1.0);
    const std::string id = std::to_string(k);
    // h <= 1 - (x - c)/a + m_up * b
    p.add_constraint("sim_up" + id, {{h, 1.0}, {x, 1.0 / a}, {b, -m_up}},
                     RowSense::kLessEqual, 1.0 + c / a);
    // h <= 1 + (x - c)/a + m_down * b
    p.add_constraint("sim_dn" + id, {{h, 1.0}, {x, -1.0 / a}, {b, -m_down}},
                     RowSense::kLessEqual, 1.0 - c / a);
    p.add_constraint("clamp" + id, {{h, 1.0}, {b, 1.0}}, RowSense::kLessEqual, 1.0);
    p.add_constraint("min" + id, {{d.min_var, 1.0}, {h, -1.0}}, RowSense::kLessEqual,
                     0.0);
  }

  d.stages.push_back({milp::ObjectiveSense::kMaximize, {{d.min_var, 1.0}}});
  std::vector<milp::Term> sum;
  for (int h : d.sim_vars) sum.push_back({h, 1.0});
  d.stages.push_back({milp::ObjectiveSense::kMaximize, std::move(sum)});
  return d;
}

// Stage III: minimise sum_i |x_i - S p_i| with S = sum_i y_i.
inline void add_prior_stage(DenoiseModel& d, const Priors& priors) {
  using milp::RowSense;
  milp::ProblemSpec& p = d.flow.problem;
  const int n = static_cast<int>(priors.p_board.size());
  const double total_cap = static_cast<double>(d.flow.max_load) * n;
  const int s = p.add_variable("S", 0.0, total_cap);
  std::vector<milp::Term> def = {{s, 1.0}};
  for (int i = 0; i < n; ++i) def.push_back({d.flow.count_vars[count_slot(i, false)], -1.0});
  p.add_constraint("total", std::move(def), RowSense::kEqual, 0.0);

  std::vector<milp::Term> objective;
  for (int i = 0; i < n; ++i) {
    for (bool alight : {false, true}) {
      const int k = count_slot(i, alight);
      const double share = alight ? priors.p_alight[i] : priors.p_board[i];
      const int x = d.flow.count_vars[k];
      const int dev = p.add_variable("d" + std::to_string(k), 0.0, milp::kInfinity);
      const std::string id = std::to_string(k);
      p.add_constraint("dev_hi" + id, {{dev, 1.0}, {x, -1.0}, {s, share}},
                       RowSense::kGreaterEqual, 0.0);
      p.add_constraint("dev_lo" + id, {{dev, 1.0}, {x, 1.0}, {s, -share}},
                       RowSense::kGreaterEqual, 0.0);
      objective.push_back({dev, 1.0});
    }
  }
  d.stages.push_back({milp::ObjectiveSense::kMinimize, std::move(objective)});
}

inline double prior_distance(std::span<const StopCounts> counts, const Priors& priors) {
  double total = 0.0;
  for (const StopCounts& c : counts) total += c.boarding;
  double dist = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    dist += std::abs(counts[i].boarding - total * priors.p_board[i]);
    dist += std::abs(counts[i].alighting - total * priors.p_alight[i]);
  }
  return dist;
}

inline milp::SolverOptions solver_options(const DenoiseConfig& config) {
  milp::SolverOptions o;
  o.feasibility_tolerance = config.feasibility_tolerance;
  o.integrality_tolerance = config.integrality_tolerance;
  return o;
}

namespace detail {

inline std::vector<StopCounts> extract_counts(const FlowModel& m,
                                              std::span<const double> values) {
  std::vector<int> flat;
  flat.reserve(m.count_vars.size());
  for (int v : m.count_vars) flat.push_back(static_cast<int>(std::lround(values[v])));
  return unflatten(flat);
}

// Fills the stage values from the integer counts themselves rather than from
// the LP values, so they are exact.
inline void score(DenoiseResult& r, std::span<const SimilaritySpec> sims,
                  const Priors* priors) {
  const std::vector<int> flat = flatten(r.counts);
  double lowest = 1.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < flat.size(); ++k) {
    const double h = similarity(sims[k], flat[k]);
    lowest = std::min(lowest, h);
    sum += h;
  }
  r.stage1_value = lowest;
  r.stage2_value = sum;
  r.quality = sum / static_cast<double>(flat.size());
  if (priors) r.stage3_value = prior_distance(r.counts, *priors);
  r.occupancy = compute_occupancy(r.counts);
}

}  // namespace detail

// Whether some flow fits when every count k stays within
// floor(lambda * a_k) of its center (and inside its own bounds). The
// reachable occupancies after each stop always form an interval, so one
// forward pass decides it.
inline bool windows_feasible(const FlowModel& m, std::span<const SimilaritySpec> sims,
                             double lambda) {
  const int n = static_cast<int>(m.count_vars.size()) / 2;
  auto window = [&](int k, std::int64_t& lo, std::int64_t& hi) {
    const milp::VariableSpec& v = m.problem.variables[m.count_vars[k]];
    const std::int64_t reach =
        std::isinf(lambda)
            ? std::numeric_limits<int>::max()
            : static_cast<std::int64_t>(std::floor(lambda * sims[k].half_margin + 1e-9));
    lo = std::max(static_cast<std::int64_t>(std::ceil(v.lower)), sims[k].center - reach);
    hi = std::min(static_cast<std::int64_t>(std::floor(v.upper)), sims[k].center + reach);
    return lo <= hi;
  };
  std::int64_t occ_lo = 0, occ_hi = 0;
  for (int i = 0; i < n; ++i) {
    std::int64_t y_lo, y_hi, z_lo, z_hi;
    if (!window(count_slot(i, false), y_lo, y_hi) || !window(count_slot(i, true), z_lo, z_hi)) {
      return false;
    }
    const std::int64_t lo = occ_lo + y_lo - z_hi;
    const std::int64_t hi = occ_hi + y_hi - z_lo;
    if (i == n - 1) return lo <= 0 && 0 <= hi;
    occ_lo = std::max<std::int64_t>(lo, 0);
    occ_hi = std::min<std::int64_t>(hi, m.max_load);
    if (occ_lo > occ_hi) return false;
  }
  return false;
}

// Stage I optimum without branching. At an integer optimum the minimum
// similarity is 1 - d/a for some count with integer deviation d < a, so the
// smallest feasible window scale among those breakpoints gives it; if none
// fits, some similarity must be zero. Returns nullopt when the constraints
// admit no flow at all.
inline std::optional<double> max_min_similarity(const FlowModel& m,
                                                std::span<const SimilaritySpec> sims) {
  if (!windows_feasible(m, sims, std::numeric_limits<double>::infinity())) return std::nullopt;
  std::vector<double> breaks;
  for (const SimilaritySpec& s : sims) {
    for (int d = 0; d < s.half_margin; ++d) breaks.push_back(d / s.half_margin);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  auto first = std::partition_point(breaks.begin(), breaks.end(), [&](double lambda) {
    return !windows_feasible(m, sims, lambda);
  });
  if (first == breaks.end()) return 0.0;
  return 1.0 - *first;
}

// Stage II optimum without branching: the best sum of similarities over
// integer flows whose similarities all reach `floor_value` (no restriction
// when it is zero). The objective is separable and the only coupling is the
// occupancy chain, so a forward pass over occupancies is exact: boarding
// first (the load may briefly exceed L_max), then alighting. Returns the
// flat counts, or nullopt when no flow qualifies.
inline std::optional<std::vector<int>> max_similarity_sum(const FlowModel& m,
                                                          std::span<const SimilaritySpec> sims,
                                                          double floor_value, double slack) {
  const int n = static_cast<int>(m.count_vars.size()) / 2;
  const int cap = m.max_load;
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  auto allowed = [&](int k, std::vector<double>& gain) {
    const milp::VariableSpec& v = m.problem.variables[m.count_vars[k]];
    const int lo = static_cast<int>(std::ceil(v.lower));
    const int hi = static_cast<int>(std::floor(v.upper));
    gain.assign(std::max(0, hi + 1), kNone);
    for (int x = std::max(lo, 0); x <= hi; ++x) {
      const double h = similarity(sims[k], x);
      if (floor_value <= 0.0 || h >= floor_value - slack) gain[x] = h;
    }
  };
  std::vector<double> value(cap + 1, kNone), mid(2 * cap + 1), next(cap + 1);
  value[0] = 0.0;
  std::vector<std::vector<int>> board_choice(n), alight_choice(n);
  std::vector<double> gy, gz;
  for (int i = 0; i < n; ++i) {
    allowed(count_slot(i, false), gy);
    allowed(count_slot(i, true), gz);
    std::fill(mid.begin(), mid.end(), kNone);
    board_choice[i].assign(2 * cap + 1, -1);
    for (int o = 0; o <= cap; ++o) {
      if (value[o] == kNone) continue;
      for (int y = 0; y < static_cast<int>(gy.size()) && o + y <= 2 * cap; ++y) {
        if (gy[y] == kNone) continue;
        const double v = value[o] + gy[y];
        if (v > mid[o + y]) {
          mid[o + y] = v;
          board_choice[i][o + y] = y;
        }
      }
    }
    std::fill(next.begin(), next.end(), kNone);
    alight_choice[i].assign(cap + 1, -1);
    const int last = i == n - 1 ? 0 : cap;
    for (int u = 0; u <= 2 * cap; ++u) {
      if (mid[u] == kNone) continue;
      for (int z = std::max(0, u - last); z < static_cast<int>(gz.size()) && z <= u; ++z) {
        if (gz[z] == kNone) continue;
        const double v = mid[u] + gz[z];
        if (v > next[u - z]) {
          next[u - z] = v;
          alight_choice[i][u - z] = z;
        }
      }
    }
    value.swap(next);
  }
  if (value[0] == kNone) return std::nullopt;
  std::vector<int> flat(2 * n);
  int occ = 0;
  for (int i = n - 1; i >= 0; --i) {
    const int z = alight_choice[i][occ];
    const int u = occ + z;
    const int y = board_choice[i][u];
    flat[count_slot(i, true)] = z;
    flat[count_slot(i, false)] = y;
    occ = u - y;
  }
  return flat;
}

struct LexicographicOptions {
  bool use_ticketing = true;
  bool use_priors = true;
  // Solve stage I with the breakpoint search and stage II with the occupancy
  // recursion instead of branch and bound. Both paths are exact; the direct
  // ones are much faster on long or badly distorted courses.
  bool stage1_search = true;
  bool stage2_search = true;
};

// Runs the stages once with or without the ticketing bounds.
inline DenoiseResult denoise_attempt(const Course& course, const Priors* priors,
                                     const DenoiseConfig& config, bool with_ticketing,
                                     const LexicographicOptions& options = {}) {
  DenoiseResult r;
  DenoiseModel model = build_denoise_model(course, config, with_ticketing);
  if (priors) add_prior_stage(model, *priors);
  const std::span<const milp::Objective> stages = model.stages;
  const milp::SolverOptions solver = solver_options(config);
  milp::LexicographicResult lex;
  std::optional<std::vector<int>> direct;
  if (options.stage1_search) {
    const std::optional<double> h = max_min_similarity(model.flow, model.sims);
    if (!h) {
      r.message = "stage 1 infeasible";
      return r;
    }
    const milp::ProblemSpec rest = milp::freeze_stage(
        model.flow.problem, stages[0].terms, *h, stages[0].sense, config.lex_slack);
    if (options.stage2_search) {
      direct = max_similarity_sum(model.flow, model.sims, *h, config.lex_slack);
      if (!direct) {
        r.message = "stage 2 infeasible";
        return r;
      }
      if (priors) {
        double sum = 0.0;
        for (std::size_t k = 0; k < direct->size(); ++k) {
          sum += similarity(model.sims[k], (*direct)[k]);
        }
        const milp::ProblemSpec last = milp::freeze_stage(rest, stages[1].terms, sum,
                                                          stages[1].sense, config.lex_slack);
        lex = milp::solve_lexicographic(last, stages.subspan(2), config.lex_slack, solver);
        lex.stage_values.insert(lex.stage_values.begin(), {*h, sum});
        lex.stages_solved += 2;
      } else {
        lex.status = milp::SolveStatus::kOptimal;
        lex.stages_solved = 2;
      }
    } else {
      lex = milp::solve_lexicographic(rest, stages.subspan(1), config.lex_slack, solver);
      lex.stage_values.insert(lex.stage_values.begin(), *h);
      ++lex.stages_solved;
    }
  } else {
    lex = milp::solve_lexicographic(model.flow.problem, stages, config.lex_slack, solver);
  }
  r.nodes = lex.nodes;
  if (lex.stages_solved < static_cast<int>(stages.size())) {
    r.message = std::string("stage ") + std::to_string(lex.stages_solved + 1) + " " +
                milp::to_string(lex.status);
    return r;
  }
  r.counts = direct && !priors ? unflatten(*direct) : detail::extract_counts(model.flow, lex.values);
  detail::score(r, model.sims, priors);
  r.status = DenoiseStatus::kOk;
  return r;
}

// Full pipeline with the ticketing fallback: when no flow at all satisfies
// the ticketing bounds they are treated as aberrant and dropped. `priors` is
// ignored unless it matches the course's line, direction and stops.
inline DenoiseResult denoise_course(const Course& course, const Priors* priors,
                                    const DenoiseConfig& config,
                                    const LexicographicOptions& options = {}) {
  const auto start = std::chrono::steady_clock::now();
  auto finish = [&](DenoiseResult r) {
    r.runtime_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    return r;
  };
  if (auto err = check_well_formed(course)) {
    DenoiseResult r;
    r.message = *err;
    return finish(r);
  }
  if (!course.has_apc) {
    DenoiseResult r;
    r.message = "course has no counting-cell data";
    return finish(r);
  }
  const Priors* usable = options.use_priors && priors && priors->matches(course) ? priors : nullptr;
  bool tick = options.use_ticketing && course.has_ticketing();
  bool dropped = false;
  if (tick && !windows_feasible(build_flow_model(course, config, true),
                                build_similarities(course, config),
                                std::numeric_limits<double>::infinity())) {
    tick = false;
    dropped = true;
  }
  DenoiseResult r = denoise_attempt(course, usable, config, tick, options);
  if (r.ok() && dropped) {
    r.status = DenoiseStatus::kOkWithoutTicketing;
    r.ticketing_dropped = true;
  }
  return finish(r);
}

inline DenoiseResult denoise_course(const Course& course, const DenoiseConfig& config) {
  return denoise_course(course, nullptr, config);
}

}  // namespace apcdn
