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


// Measurement-distortion scenarios applied to clean courses, plus a small
// generator of synthetic clean courses.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "apcdn/core.hpp"
#include "apcdn/random.hpp"

namespace apcdn {

enum class ScenarioKind { kGaussian, kOverestimate, kUnderestimate, kSlope, kOutliers };

inline constexpr std::array<ScenarioKind, 5> kAllScenarios = {
    ScenarioKind::kGaussian, ScenarioKind::kOverestimate, ScenarioKind::kUnderestimate,
    ScenarioKind::kSlope, ScenarioKind::kOutliers};

inline const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::kGaussian: return "gaussian";
    case ScenarioKind::kOverestimate: return "over";
    case ScenarioKind::kUnderestimate: return "under";
    case ScenarioKind::kSlope: return "slope";
    case ScenarioKind::kOutliers: return "outliers";
  }
  return "?";
}

inline std::optional<ScenarioKind> parse_scenario(std::string_view s) {
  if (s == "gaussian") return ScenarioKind::kGaussian;
  if (s == "over" || s == "overestimate") return ScenarioKind::kOverestimate;
  if (s == "under" || s == "underestimate") return ScenarioKind::kUnderestimate;
  if (s == "slope") return ScenarioKind::kSlope;
  if (s == "outliers") return ScenarioKind::kOutliers;
  return std::nullopt;
}

struct Scenario {
  ScenarioKind kind = ScenarioKind::kGaussian;
  double noise_ratio = 0.10;  // sd of the Gaussian step, relative to the count
  int add_min = 1;
  int add_max = 5;
  double slope = 0.3;
  int outlier_count = 1;
  // Copy the clean counts into the ticketing slots of the noisy course.
  bool ticketing_from_truth = false;

  void validate() const {
    if (!(noise_ratio >= 0.0)) throw std::invalid_argument("noise_ratio must be >= 0");
    if (add_min < 0 || add_min > add_max) {
      throw std::invalid_argument("need 0 <= add_min <= add_max");
    }
    if (!(slope > 0.0 && slope < 1.0)) throw std::invalid_argument("slope must be in (0, 1)");
    if (outlier_count < 0) throw std::invalid_argument("outlier_count must be >= 0");
  }
};

struct SimulatedPair {
  Course truth;
  Course noisy;
};

namespace detail {

inline double mean_nonzero_count(const Course& c) {
  double sum = 0.0;
  int n = 0;
  for (const Stop& s : c.stops) {
    for (int v : {s.observed.boarding, s.observed.alighting}) {
      if (v > 0) {
        sum += v;
        ++n;
      }
    }
  }
  return n > 0 ? sum / n : 0.0;
}

}  // namespace detail

// Distorts every count of `truth` (stop by stop, boarding first): first the
// scenario bias, then zero-mean Gaussian noise with standard deviation
// noise_ratio * count, rounded and clamped at zero. Outlier positions are
// drawn before the per-count pass.
inline SimulatedPair distort(const Course& truth, const Scenario& scenario,
                             std::uint64_t seed) {
  scenario.validate();
  Rng rng(seed);
  const int counts = static_cast<int>(2 * truth.stops.size());

  std::vector<bool> outlier(counts, false);
  if (scenario.kind == ScenarioKind::kOutliers) {
    std::vector<int> order(counts);
    for (int k = 0; k < counts; ++k) order[k] = k;
    const int picks = std::min(scenario.outlier_count, counts);
    for (int k = 0; k < picks; ++k) {
      const auto j = static_cast<int>(uniform_int(rng, k, counts - 1));
      std::swap(order[k], order[j]);
      outlier[order[k]] = true;
    }
  }
  const double pivot = detail::mean_nonzero_count(truth);

  SimulatedPair out{truth, truth};
  for (int k = 0; k < counts; ++k) {
    Stop& stop = out.noisy.stops[k / 2];
    int& c = k % 2 == 0 ? stop.observed.boarding : stop.observed.alighting;
    switch (scenario.kind) {
      case ScenarioKind::kGaussian: break;
      case ScenarioKind::kOverestimate:
        c += static_cast<int>(uniform_int(rng, scenario.add_min, scenario.add_max));
        break;
      case ScenarioKind::kUnderestimate:
        c = std::max(0, c - static_cast<int>(uniform_int(rng, scenario.add_min,
                                                         scenario.add_max)));
        break;
      case ScenarioKind::kSlope:
        c = std::max(0, c + static_cast<int>(std::lround(scenario.slope * (pivot - c))));
        break;
      case ScenarioKind::kOutliers:
        if (outlier[k]) c = uniform01(rng) < 0.5 ? 2 * truth.capacity : 0;
        break;
    }
    const double sd = scenario.noise_ratio * c;
    if (sd > 0.0) {
      c = std::max(0, c + static_cast<int>(std::lround(sd * standard_normal(rng))));
    }
  }
  for (int i = 0; i < static_cast<int>(truth.stops.size()); ++i) {
    TicketCounts& t = out.noisy.stops[i].ticketing;
    t = {};
    if (scenario.ticketing_from_truth) {
      t.boarding = truth.stops[i].observed.boarding;
      t.alighting = truth.stops[i].observed.alighting;
    }
  }
  return out;
}

inline std::uint64_t scenario_seed(std::uint64_t master, ScenarioKind kind,
                                   std::size_t course_index) {
  return derive_seed(derive_seed(master, static_cast<std::uint64_t>(kind) + 1),
                     course_index);
}

// All five datasets. `params` supplies the shared parameters; its kind is
// ignored.
inline std::map<ScenarioKind, std::vector<SimulatedPair>> scenario_suite(
    std::span<const Course> truths, std::uint64_t master_seed,
    const Scenario& params = {}) {
  std::map<ScenarioKind, std::vector<SimulatedPair>> out;
  for (ScenarioKind kind : kAllScenarios) {
    Scenario s = params;
    s.kind = kind;
    std::vector<SimulatedPair>& pairs = out[kind];
    for (std::size_t i = 0; i < truths.size(); ++i) {
      pairs.push_back(distort(truths[i], s, scenario_seed(master_seed, kind, i)));
    }
  }
  return out;
}

struct SynthOptions {
  int lines = 2;
  int courses = 8;
  int min_stops = 8;
  int max_stops = 30;
  std::vector<int> capacities = {60, 80, 100};
};

// Clean courses: all courses of a line share its stop sequence and capacity;
// passengers board with a demand that fades along the line and alight with a
// probability that grows towards the end. Occupancy never exceeds capacity.
inline std::vector<Course> synthesize_courses(const SynthOptions& options,
                                              std::uint64_t seed) {
  if (options.lines < 1 || options.min_stops < 2 || options.max_stops < options.min_stops ||
      options.capacities.empty()) {
    throw std::invalid_argument("bad synthesis options");
  }
  Rng rng(seed);
  struct Line {
    std::string id;
    int stops;
    int capacity;
  };
  std::vector<Line> lines;
  for (int l = 0; l < options.lines; ++l) {
    const int stops = static_cast<int>(uniform_int(rng, options.min_stops, options.max_stops));
    const int cap = options.capacities[uniform_int(
        rng, 0, static_cast<std::int64_t>(options.capacities.size()) - 1)];
    lines.push_back({"L" + std::to_string(l + 1), stops, cap});
  }
  std::vector<Course> out;
  for (int k = 0; k < options.courses; ++k) {
    const Line& line = lines[k % lines.size()];
    Course c;
    c.line_id = line.id;
    c.direction = "out";
    c.course_id = line.id + "-" + std::to_string(k + 1);
    const int minutes = 6 * 60 + 15 * k;
    c.departure_time = "2026-03-02T" + std::string(minutes / 60 < 10 ? "0" : "") +
                       std::to_string(minutes / 60) + ":" +
                       (minutes % 60 < 10 ? "0" : "") + std::to_string(minutes % 60) + ":00";
    c.capacity = line.capacity;
    const double peak = line.capacity * (0.15 + 0.25 * uniform01(rng));
    int occ = 0;
    for (int i = 0; i < line.stops; ++i) {
      Stop s;
      s.stop_id = line.id + "-S" + std::to_string(i + 1);
      if (i == line.stops - 1) {
        s.observed = {0, occ};
        occ = 0;
      } else {
        int z = 0;
        if (i > 0) {
          const double p = 0.1 + 0.6 * static_cast<double>(i) / line.stops;
          for (int m = 0; m < occ; ++m) z += uniform01(rng) < p ? 1 : 0;
        }
        occ -= z;
        const double demand = peak * (1.0 - 0.7 * static_cast<double>(i) / line.stops);
        const int y = std::min(line.capacity - occ,
                               static_cast<int>(uniform_int(rng, 0, std::lround(demand))));
        occ += y;
        s.observed = {y, z};
      }
      c.stops.push_back(s);
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace apcdn
