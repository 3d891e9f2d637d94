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


// Small course builders shared by the test binaries.

#pragma once

#include <algorithm>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "apcdn/core.hpp"
#include "apcdn/milp.hpp"

namespace apcdn::testing {

inline Course make_course(const std::vector<int>& boardings,
                          const std::vector<int>& alightings, int capacity,
                          const std::string& line = "L1", const std::string& dir = "out") {
  Course c;
  c.line_id = line;
  c.direction = dir;
  c.course_id = "c";
  c.departure_time = "2026-01-05T08:00:00";
  c.capacity = capacity;
  for (std::size_t i = 0; i < boardings.size(); ++i) {
    c.stops.push_back({"s" + std::to_string(i + 1), {boardings[i], alightings[i]}, {}});
  }
  return c;
}

inline std::vector<int> flat_counts(const Course& c) {
  std::vector<int> out;
  for (const Stop& s : c.stops) {
    out.push_back(s.observed.boarding);
    out.push_back(s.observed.alighting);
  }
  return out;
}

// Random counts in [0, max_count], endpoints unconstrained (noisy data).
inline Course random_noisy_course(std::mt19937_64& rng, int stops, int max_count,
                                  int capacity) {
  std::uniform_int_distribution<int> count(0, max_count);
  std::vector<int> y(stops), z(stops);
  for (int i = 0; i < stops; ++i) {
    y[i] = count(rng);
    z[i] = count(rng);
  }
  return make_course(y, z, capacity);
}

// Random flow with occupancy never above `max_load`.
inline Course random_valid_course(std::mt19937_64& rng, int stops, int max_count,
                                  int max_load, int capacity) {
  std::vector<int> y(stops, 0), z(stops, 0);
  int occ = 0;
  for (int i = 0; i < stops; ++i) {
    if (i == stops - 1) {
      z[i] = occ;
      break;
    }
    if (i > 0) {
      z[i] = std::uniform_int_distribution<int>(0, std::min(occ, max_count))(rng);
      occ -= z[i];
    }
    y[i] = std::uniform_int_distribution<int>(0, std::min(max_count, max_load - occ))(rng);
    occ += y[i];
  }
  return make_course(y, z, capacity);
}

// Random all-integer programs: up to 6 variables with bounds inside [0, 10],
// up to 4 rows.
inline milp::ProblemSpec random_integer_program(std::mt19937_64& rng) {
  using milp::RowSense;
  auto uni = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };
  milp::ProblemSpec p;
  const int n = uni(1, 6);
  for (int j = 0; j < n; ++j) {
    const int lo = uni(0, 7);
    const int hi = std::min(10, lo + uni(0, 6));
    p.add_variable("x" + std::to_string(j), lo, hi, true);
  }
  const int m = uni(0, 4);
  for (int r = 0; r < m; ++r) {
    std::vector<milp::Term> terms;
    for (int j = 0; j < n; ++j) {
      const int c = uni(-5, 5);
      if (c != 0) terms.push_back({j, static_cast<double>(c)});
    }
    const int kind = uni(0, 5);
    const RowSense sense = kind == 0   ? RowSense::kEqual
                           : kind < 3  ? RowSense::kGreaterEqual
                                       : RowSense::kLessEqual;
    p.add_constraint("r" + std::to_string(r), terms, sense, uni(-10, 30));
  }
  std::vector<milp::Term> obj;
  for (int j = 0; j < n; ++j) obj.push_back({j, static_cast<double>(uni(-6, 6))});
  p.objective = {uni(0, 1) ? milp::ObjectiveSense::kMaximize : milp::ObjectiveSense::kMinimize,
                 obj};
  return p;
}

}  // namespace apcdn::testing
