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


// Comparison denoisers. All of them share the flow model of the denoiser and
// ignore ticketing unless asked. Their DenoiseResult carries the similarity
// scores of the output for reporting; only `objective` is what the method
// actually optimised.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <vector>

#include "apcdn/core.hpp"
#include "apcdn/denoiser.hpp"
#include "apcdn/milp.hpp"
#include "apcdn/random.hpp"

namespace apcdn {

struct BaselineOptions {
  bool with_ticketing = false;
};

namespace detail {

class Stopwatch {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                     start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::optional<DenoiseResult> reject_unusable(const Course& course) {
  DenoiseResult r;
  if (auto err = check_well_formed(course)) {
    r.message = *err;
    return r;
  }
  if (!course.has_apc) {
    r.message = "course has no counting-cell data";
    return r;
  }
  return std::nullopt;
}

// Whether the ticketing bounds take part: they must be requested, present
// and satisfiable by some flow. `dropped` reports bounds discarded for being
// unsatisfiable.
inline bool use_ticketing(const Course& course, const DenoiseConfig& config, bool requested,
                          bool& dropped) {
  dropped = false;
  if (!requested || !course.has_ticketing()) return false;
  dropped = !windows_feasible(build_flow_model(course, config, true),
                              build_similarities(course, config),
                              std::numeric_limits<double>::infinity());
  return !dropped;
}

inline void mark_dropped(DenoiseResult& r, bool dropped) {
  if (dropped && r.ok()) {
    r.ticketing_dropped = true;
    r.status = DenoiseStatus::kOkWithoutTicketing;
  }
}

inline DenoiseResult finish_baseline(const Course& course, const DenoiseConfig& config,
                                     std::vector<StopCounts> counts) {
  DenoiseResult r;
  r.counts = std::move(counts);
  score(r, build_similarities(course, config), nullptr);
  r.status = DenoiseStatus::kOk;
  return r;
}

}  // namespace detail

// min sum_i |x_i - obs_i| over valid flows.
inline DenoiseResult denoise_l1(const Course& course, const DenoiseConfig& config,
                                const BaselineOptions& options = {}) {
  detail::Stopwatch clock;
  if (auto bad = detail::reject_unusable(course)) return *bad;
  bool dropped = false;
  const bool tick = detail::use_ticketing(course, config, options.with_ticketing, dropped);
  FlowModel m = build_flow_model(course, config, tick);
  const std::vector<int> obs = flatten(course.observed_counts());
  milp::Objective objective{milp::ObjectiveSense::kMinimize, {}};
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const int x = m.count_vars[k];
    const int d = m.problem.add_variable("d" + std::to_string(k), 0.0, milp::kInfinity);
    m.problem.add_constraint("dev_hi" + std::to_string(k), {{d, 1.0}, {x, -1.0}},
                             milp::RowSense::kGreaterEqual, -obs[k]);
    m.problem.add_constraint("dev_lo" + std::to_string(k), {{d, 1.0}, {x, 1.0}},
                             milp::RowSense::kGreaterEqual, obs[k]);
    objective.terms.push_back({d, 1.0});
  }
  m.problem.objective = std::move(objective);
  const milp::SolveResult s = milp::solve_milp(m.problem, solver_options(config));
  DenoiseResult r;
  if (s.status != milp::SolveStatus::kOptimal) {
    r.message = std::string("l1 ") + milp::to_string(s.status);
  } else {
    r = detail::finish_baseline(course, config, detail::extract_counts(m, s.values));
    const std::vector<int> flat = flatten(r.counts);
    double total = 0.0;
    for (std::size_t k = 0; k < obs.size(); ++k) total += std::abs(flat[k] - obs[k]);
    r.objective = total;
  }
  detail::mark_dropped(r, dropped);
  r.nodes = s.nodes;
  r.runtime_ms = clock.elapsed_ms();
  return r;
}

// min sum_i (x_i - obs_i)^2 over valid flows, as a linear program. Around
// a_i = obs_i clamped into the count's box, the square is split into
// unit-width segments whose slopes increase outward; that is exact at every
// integer and the constraint matrix stays a network matrix, so the simplex
// returns integral counts. Only `width` segments per side are modelled at
// first; the width doubles until the truncated problem is feasible and no
// count sits on a truncated end.
inline DenoiseResult denoise_l2(const Course& course, const DenoiseConfig& config,
                                const BaselineOptions& options = {}) {
  detail::Stopwatch clock;
  if (auto bad = detail::reject_unusable(course)) return *bad;
  bool dropped = false;
  const bool tick = detail::use_ticketing(course, config, options.with_ticketing, dropped);
  const std::vector<int> obs = flatten(course.observed_counts());
  DenoiseResult r;
  std::int64_t nodes = 0;
  for (int width = 8;; width *= 2) {
    FlowModel m = build_flow_model(course, config, tick);
    const std::size_t counts = obs.size();
    std::vector<int> anchor(counts);
    std::vector<bool> cut_up(counts), cut_down(counts);
    std::vector<int> up_cap(counts), down_cap(counts);
    milp::Objective objective{milp::ObjectiveSense::kMinimize, {}};
    for (std::size_t k = 0; k < counts; ++k) {
      const milp::VariableSpec box = m.problem.variables[m.count_vars[k]];
      const int lo = static_cast<int>(box.lower);
      const int hi = static_cast<int>(box.upper);
      const int a = std::clamp(obs[k], lo, hi);
      anchor[k] = a;
      up_cap[k] = std::min(width, hi - a);
      down_cap[k] = std::min(width, a - lo);
      cut_up[k] = up_cap[k] < hi - a;
      cut_down[k] = down_cap[k] < a - lo;
      std::vector<milp::Term> def = {{m.count_vars[k], 1.0}};
      const std::string id = std::to_string(k);
      for (int j = 1; j <= up_cap[k]; ++j) {
        const int u = m.problem.add_variable("u" + id + "_" + std::to_string(j), 0.0, 1.0);
        def.push_back({u, -1.0});
        objective.terms.push_back({u, 2.0 * (a - obs[k]) + 2.0 * j - 1.0});
      }
      for (int j = 1; j <= down_cap[k]; ++j) {
        const int v = m.problem.add_variable("v" + id + "_" + std::to_string(j), 0.0, 1.0);
        def.push_back({v, 1.0});
        objective.terms.push_back({v, -2.0 * (a - obs[k]) + 2.0 * j - 1.0});
      }
      m.problem.add_constraint("seg" + id, std::move(def), milp::RowSense::kEqual, a);
    }
    m.problem.objective = std::move(objective);
    const milp::SolveResult s = milp::solve_milp(m.problem, solver_options(config));
    nodes += s.nodes;
    const bool any_cut = std::find(cut_up.begin(), cut_up.end(), true) != cut_up.end() ||
                         std::find(cut_down.begin(), cut_down.end(), true) != cut_down.end();
    if (s.status == milp::SolveStatus::kInfeasible && any_cut) continue;
    if (s.status != milp::SolveStatus::kOptimal) {
      r.message = std::string("l2 ") + milp::to_string(s.status);
      break;
    }
    const std::vector<StopCounts> found = detail::extract_counts(m, s.values);
    const std::vector<int> flat = flatten(found);
    bool truncated = false;
    for (std::size_t k = 0; k < counts; ++k) {
      if ((cut_up[k] && flat[k] >= anchor[k] + up_cap[k]) ||
          (cut_down[k] && flat[k] <= anchor[k] - down_cap[k])) {
        truncated = true;
      }
    }
    if (truncated) continue;
    r = detail::finish_baseline(course, config, found);
    double total = 0.0;
    for (std::size_t k = 0; k < counts; ++k) {
      const double d = flat[k] - obs[k];
      total += d * d;
    }
    r.objective = total;
    break;
  }
  detail::mark_dropped(r, dropped);
  r.nodes = nodes;
  r.runtime_ms = clock.elapsed_ms();
  return r;
}

// The lexicographic denoiser without ticketing bounds and without stage III.
inline DenoiseResult denoise_two_stage(const Course& course, const DenoiseConfig& config) {
  LexicographicOptions options;
  options.use_ticketing = false;
  options.use_priors = false;
  return denoise_course(course, nullptr, config, options);
}

struct GibbsOptions {
  std::uint64_t seed = 0;
  int iterations = 200;  // full sweeps
  bool with_ticketing = false;
};

// Single-site Gibbs sampler over valid flows. The state starts at all zeros
// (or at the l1 solution when ticketing bounds apply; bounds no flow can meet
// are dropped as in the denoiser) and every sweep visits
// the free counts in stop order. The last alighting is not free: it is set
// by flow conservation, so each update moves it by the opposite amount. The
// conditional of a count is proportional to w(v) * w_last(v) over the values
// that keep every occupancy, the last alighting and the count in bounds, with
// w(v) = max(1e-9, 1 - |v - obs| / a).
inline DenoiseResult denoise_gibbs(const Course& course, const DenoiseConfig& config,
                                   const GibbsOptions& options = {}) {
  detail::Stopwatch clock;
  if (auto bad = detail::reject_unusable(course)) return *bad;
  if (options.iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  const int n = static_cast<int>(course.stops.size());
  const std::int64_t l_max = config.max_load(course.capacity);
  const std::vector<SimilaritySpec> sims = build_similarities(course, config);
  bool dropped = false;
  const bool tick = detail::use_ticketing(course, config, options.with_ticketing, dropped);

  std::vector<std::int64_t> lower(2 * n, 0);
  std::vector<std::int64_t> x(2 * n, 0);
  if (tick) {
    for (int i = 0; i < n; ++i) {
      lower[2 * i] = course.stops[i].ticketing.boarding.value_or(0);
      lower[2 * i + 1] = course.stops[i].ticketing.alighting.value_or(0);
    }
    BaselineOptions bo;
    bo.with_ticketing = true;
    const DenoiseResult start = denoise_l1(course, config, bo);
    if (!start.ok()) return start;
    const std::vector<int> flat = flatten(start.counts);
    for (int k = 0; k < 2 * n; ++k) x[k] = flat[k];
  }

  auto weight = [&](int k, std::int64_t v) {
    return std::max(1e-9, 1.0 - std::abs(static_cast<double>(v) - sims[k].center) /
                                    sims[k].half_margin);
  };
  const int last = count_slot(n - 1, true);
  std::vector<std::int64_t> occ(n, 0);
  auto recompute_occ = [&] {
    std::int64_t o = 0;
    for (int i = 0; i < n; ++i) {
      o += x[2 * i] - x[2 * i + 1];
      occ[i] = o;
    }
  };

  Rng rng(options.seed);
  std::vector<double> cumulative;
  for (int sweep = 0; sweep < options.iterations; ++sweep) {
    for (int k = 0; k < 2 * n; ++k) {
      const int stop = k / 2;
      const bool alight = k % 2 == 1;
      if ((!alight && stop == n - 1) || (alight && stop == 0) || k == last) continue;
      recompute_occ();
      // Moving x_k by +d changes occupancies from `stop` to n-2 by +d (boarding)
      // or -d (alighting), and the last alighting by the same signed amount.
      const std::int64_t sign = alight ? -1 : 1;
      std::int64_t d_lo = lower[k] - x[k];
      std::int64_t d_hi = l_max - x[k];
      auto restrict = [&](std::int64_t value, std::int64_t lo, std::int64_t hi) {
        // lo <= value + sign * d <= hi
        if (sign > 0) {
          d_lo = std::max(d_lo, lo - value);
          d_hi = std::min(d_hi, hi - value);
        } else {
          d_lo = std::max(d_lo, value - hi);
          d_hi = std::min(d_hi, value - lo);
        }
      };
      for (int i = stop; i + 1 < n; ++i) restrict(occ[i], 0, l_max);
      restrict(x[last], lower[last], l_max);
      if (d_lo > d_hi) continue;  // cannot happen from a valid state

      cumulative.clear();
      double total = 0.0;
      for (std::int64_t d = d_lo; d <= d_hi; ++d) {
        total += weight(k, x[k] + d) * weight(last, x[last] + sign * d);
        cumulative.push_back(total);
      }
      const double u = uniform01(rng) * total;
      const auto pick = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      const std::int64_t d =
          d_lo + std::min<std::int64_t>(pick - cumulative.begin(), d_hi - d_lo);
      x[k] += d;
      x[last] += sign * d;
    }
  }
  std::vector<int> flat(x.begin(), x.end());
  DenoiseResult r = detail::finish_baseline(course, config, unflatten(flat));
  detail::mark_dropped(r, dropped);
  r.runtime_ms = clock.elapsed_ms();
  return r;
}

}  // namespace apcdn
