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

// Domain types shared by every module: courses, per-stop counts, occupancy
// profiles and the validity check against the operational constraints
// (flow conservation, load bounds, endpoint rules, ticketing lower bounds).

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace apcdn {

// Passenger movements at one stop.
struct StopCounts {
  int boarding = 0;
  int alighting = 0;

  friend bool operator==(const StopCounts&, const StopCounts&) = default;
};

// Ticketing validations at one stop. Either side may be missing: alighting
// reconstruction is not always available, and empty means "no information",
// which is different from zero.
struct TicketCounts {
  std::optional<int> boarding;
  std::optional<int> alighting;

  bool any() const { return boarding.has_value() || alighting.has_value(); }
  friend bool operator==(const TicketCounts&, const TicketCounts&) = default;
};

struct Stop {
  std::string stop_id;
  StopCounts observed;
  TicketCounts ticketing;

  friend bool operator==(const Stop&, const Stop&) = default;
};

// One vehicle run along a line in one direction.
struct Course {
  std::string line_id;
  std::string direction;
  std::string course_id;
  std::string departure_time;  // ISO-8601 text, carried through untouched
  std::vector<Stop> stops;     // service order
  int capacity = 0;            // seats + standing
  // False for history-only courses that carry ticketing but no counting
  // cell data. Such courses feed the priors and cannot be denoised.
  bool has_apc = true;

  std::size_t size() const { return stops.size(); }
  bool has_ticketing() const {
    for (const Stop& s : stops) {
      if (s.ticketing.any()) return true;
    }
    return false;
  }
  std::vector<StopCounts> observed_counts() const {
    std::vector<StopCounts> out;
    out.reserve(stops.size());
    for (const Stop& s : stops) out.push_back(s.observed);
    return out;
  }
  std::vector<std::string> stop_ids() const {
    std::vector<std::string> out;
    out.reserve(stops.size());
    for (const Stop& s : stops) out.push_back(s.stop_id);
    return out;
  }

  friend bool operator==(const Course&, const Course&) = default;
};

// Passengers on board after the exchange at each stop, i.e. between stop i and
// stop i+1. Entries may be negative for inconsistent raw counts.
struct OccupancyProfile {
  std::vector<std::int64_t> after_stop;

  friend bool operator==(const OccupancyProfile&,
                         const OccupancyProfile&) = default;
};

struct DenoiseConfig {
  double load_factor = 1.4;       // L_max = round(load_factor * capacity)
  double count_cap_factor = 2.0;  // observed centers clamped to this * L_max
  int alpha_floor = 5;
  double alpha_ratio = 0.5;
  double feasibility_tolerance = 1e-6;
  double integrality_tolerance = 1e-6;
  double lex_slack = 1e-6;

  void validate() const {
    if (!(load_factor >= 1.0)) throw std::invalid_argument("load_factor must be >= 1");
    if (!(count_cap_factor >= 1.0)) {
      throw std::invalid_argument("count_cap_factor must be >= 1");
    }
    if (alpha_floor < 1) throw std::invalid_argument("alpha_floor must be >= 1");
    if (!(alpha_ratio > 0.0 && alpha_ratio <= 1.0)) {
      throw std::invalid_argument("alpha_ratio must be in (0, 1]");
    }
    if (!(feasibility_tolerance > 0.0) || !(integrality_tolerance > 0.0) ||
        !(lex_slack >= 0.0)) {
      throw std::invalid_argument("tolerances must be positive");
    }
  }

  int max_load(int capacity) const {
    return static_cast<int>(std::lround(load_factor * capacity));
  }
  int count_cap(int capacity) const {
    return static_cast<int>(std::lround(count_cap_factor * max_load(capacity)));
  }
};

enum class ConstraintTag { kBalance, kBounds, kEndpoints, kTicketing };

inline const char* to_string(ConstraintTag tag) {
  switch (tag) {
    case ConstraintTag::kBalance: return "balance";
    case ConstraintTag::kBounds: return "bounds";
    case ConstraintTag::kEndpoints: return "endpoints";
    case ConstraintTag::kTicketing: return "ticketing";
  }
  return "?";
}

struct Violation {
  ConstraintTag tag;
  int stop_index;  // -1 for course-level violations
  std::string detail;
};

struct ValidityReport {
  bool balanced = true;
  bool within_bounds = true;
  bool endpoints_ok = true;
  std::optional<bool> ticketing_ok;  // empty when the course has no ticketing
  std::vector<Violation> violations;

  bool all_ok() const {
    return balanced && within_bounds && endpoints_ok && ticketing_ok.value_or(true);
  }
};

inline OccupancyProfile compute_occupancy(std::span<const StopCounts> counts) {
  OccupancyProfile profile;
  profile.after_stop.reserve(counts.size());
  std::int64_t onboard = 0;
  for (const StopCounts& c : counts) {
    onboard += c.boarding;
    onboard -= c.alighting;
    profile.after_stop.push_back(onboard);
  }
  return profile;
}

// Checks raw or denoised counts of a course against the constraint set.
// `counts` must have one entry per stop of `course`.
inline ValidityReport validate_counts(const Course& course,
                                      std::span<const StopCounts> counts,
                                      const DenoiseConfig& config) {
  ValidityReport report;
  const int n = static_cast<int>(counts.size());
  const std::int64_t l_max = config.max_load(course.capacity);

  std::int64_t boardings = 0;
  std::int64_t alightings = 0;
  for (const StopCounts& c : counts) {
    boardings += c.boarding;
    alightings += c.alighting;
  }
  if (boardings != alightings) {
    report.balanced = false;
    report.violations.push_back(
        {ConstraintTag::kBalance, -1,
         "boardings " + std::to_string(boardings) + " != alightings " +
             std::to_string(alightings)});
  }

  const OccupancyProfile occ = compute_occupancy(counts);
  auto out_of_range = [&](std::int64_t v) { return v < 0 || v > l_max; };
  for (int i = 0; i < n; ++i) {
    const StopCounts& c = counts[i];
    std::string what;
    if (out_of_range(c.boarding)) what += "boarding " + std::to_string(c.boarding) + ";";
    if (out_of_range(c.alighting)) what += "alighting " + std::to_string(c.alighting) + ";";
    if (out_of_range(occ.after_stop[i])) {
      what += "occupancy " + std::to_string(occ.after_stop[i]) + ";";
    }
    if (!what.empty()) {
      report.within_bounds = false;
      report.violations.push_back({ConstraintTag::kBounds, i,
                                   what + " limit " + std::to_string(l_max)});
    }
  }

  if (n > 0) {
    if (counts[n - 1].boarding != 0) {
      report.endpoints_ok = false;
      report.violations.push_back({ConstraintTag::kEndpoints, n - 1,
                                   "boarding at last stop"});
    }
    if (counts[0].alighting != 0) {
      report.endpoints_ok = false;
      report.violations.push_back({ConstraintTag::kEndpoints, 0,
                                   "alighting at first stop"});
    }
  }

  if (course.has_ticketing()) {
    report.ticketing_ok = true;
    for (int i = 0; i < n && i < static_cast<int>(course.stops.size()); ++i) {
      const TicketCounts& t = course.stops[i].ticketing;
      std::string what;
      if (t.boarding && counts[i].boarding < *t.boarding) {
        what += "boarding " + std::to_string(counts[i].boarding) + " < " +
                std::to_string(*t.boarding) + ";";
      }
      if (t.alighting && counts[i].alighting < *t.alighting) {
        what += "alighting " + std::to_string(counts[i].alighting) + " < " +
                std::to_string(*t.alighting) + ";";
      }
      if (!what.empty()) {
        report.ticketing_ok = false;
        report.violations.push_back({ConstraintTag::kTicketing, i, what});
      }
    }
  }
  return report;
}

inline ValidityReport validate_course(const Course& course,
                                      const DenoiseConfig& config) {
  const std::vector<StopCounts> counts = course.observed_counts();
  return validate_counts(course, counts, config);
}

// Structural well-formedness (not count validity).
inline std::optional<std::string> check_well_formed(const Course& course) {
  if (course.stops.size() < 2) return "course needs at least 2 stops";
  if (course.capacity <= 0) return "capacity must be positive";
  for (const Stop& s : course.stops) {
    if (s.stop_id.empty()) return "empty stop_id";
    if (s.observed.boarding < 0 || s.observed.alighting < 0) {
      return "negative observed count";
    }
    if ((s.ticketing.boarding && *s.ticketing.boarding < 0) ||
        (s.ticketing.alighting && *s.ticketing.alighting < 0)) {
      return "negative ticketing count";
    }
  }
  return std::nullopt;
}

}  // namespace apcdn
