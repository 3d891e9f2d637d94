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

#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apcdn/core.hpp"

namespace apcdn {

// Historical share of boardings and alightings at each stop of one
// line/direction, blended from counting-cell and ticketing history:
//   p = r * p_apc + (1 - r) * p_ticketing
// with r the share of history courses that carry counting-cell data.
struct Priors {
  std::string line_id;
  std::string direction;
  std::vector<std::string> stop_ids;
  std::vector<double> p_board;
  std::vector<double> p_alight;
  double r = 1.0;
  int history_size = 0;     // courses used
  int skipped_courses = 0;  // same line/direction, different stop sequence

  bool matches(const Course& course) const {
    if (course.line_id != line_id || course.direction != direction) return false;
    if (course.stops.size() != stop_ids.size()) return false;
    for (std::size_t i = 0; i < stop_ids.size(); ++i) {
      if (course.stops[i].stop_id != stop_ids[i]) return false;
    }
    return true;
  }
};

namespace detail {

inline std::optional<std::vector<double>> normalise(const std::vector<double>& sums) {
  double total = 0.0;
  for (double v : sums) total += v;
  if (!(total > 0.0)) return std::nullopt;
  std::vector<double> out(sums.size());
  for (std::size_t i = 0; i < sums.size(); ++i) out[i] = sums[i] / total;
  return out;
}

inline std::optional<std::vector<double>> blend(
    const std::optional<std::vector<double>>& apc,
    const std::optional<std::vector<double>>& tick, double r) {
  // A source without passengers carries no spatial information; fall back to
  // the other one alone.
  if (apc && tick) {
    std::vector<double> out(apc->size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = r * (*apc)[i] + (1.0 - r) * (*tick)[i];
    }
    return out;
  }
  if (apc) return apc;
  return tick;
}

}  // namespace detail

// Passenger-weighted priors for (line_id, direction). The history window is
// whatever the caller passes. When `reference_stops` is empty the most
// frequent stop sequence among matching courses is used (ties: smallest
// lexicographically), so the result does not depend on history order.
inline std::optional<Priors> compute_priors(
    std::span<const Course> history, const std::string& line_id,
    const std::string& direction,
    std::span<const std::string> reference_stops = {}) {
  std::vector<const Course*> matching;
  for (const Course& c : history) {
    if (c.line_id == line_id && c.direction == direction) matching.push_back(&c);
  }
  if (matching.empty()) return std::nullopt;

  std::vector<std::string> reference(reference_stops.begin(), reference_stops.end());
  if (reference.empty()) {
    std::map<std::vector<std::string>, int> freq;
    for (const Course* c : matching) ++freq[c->stop_ids()];
    int best = 0;
    for (const auto& [seq, count] : freq) {
      if (count > best) {  // map order gives the lexicographic tie-break
        best = count;
        reference = seq;
      }
    }
  }
  const std::size_t n = reference.size();

  std::vector<double> apc_board(n, 0.0), apc_alight(n, 0.0);
  std::vector<double> tick_board(n, 0.0), tick_alight(n, 0.0);
  int with_apc = 0;
  int with_tick = 0;
  int used = 0;
  int skipped = 0;
  for (const Course* c : matching) {
    if (c->stop_ids() != reference) {
      ++skipped;
      continue;
    }
    const bool tick = c->has_ticketing();
    if (!c->has_apc && !tick) continue;
    ++used;
    if (c->has_apc) {
      ++with_apc;
      for (std::size_t i = 0; i < n; ++i) {
        apc_board[i] += c->stops[i].observed.boarding;
        apc_alight[i] += c->stops[i].observed.alighting;
      }
    }
    if (tick) {
      ++with_tick;
      for (std::size_t i = 0; i < n; ++i) {
        const TicketCounts& t = c->stops[i].ticketing;
        tick_board[i] += t.boarding.value_or(0);
        tick_alight[i] += t.alighting.value_or(0);
      }
    }
  }
  if (used == 0) return std::nullopt;

  Priors priors;
  priors.line_id = line_id;
  priors.direction = direction;
  priors.stop_ids = reference;
  priors.history_size = used;
  priors.skipped_courses = skipped;
  priors.r = static_cast<double>(with_apc) / static_cast<double>(used);

  const auto apc_b = with_apc ? detail::normalise(apc_board) : std::nullopt;
  const auto apc_a = with_apc ? detail::normalise(apc_alight) : std::nullopt;
  const auto tick_b = with_tick ? detail::normalise(tick_board) : std::nullopt;
  const auto tick_a = with_tick ? detail::normalise(tick_alight) : std::nullopt;
  auto board = detail::blend(apc_b, tick_b, priors.r);
  auto alight = detail::blend(apc_a, tick_a, priors.r);
  if (!board || !alight) return std::nullopt;
  priors.p_board = std::move(*board);
  priors.p_alight = std::move(*alight);
  return priors;
}

// Priors for every line/direction present in `history`.
inline std::vector<Priors> compute_all_priors(std::span<const Course> history) {
  std::map<std::pair<std::string, std::string>, bool> keys;
  for (const Course& c : history) keys[{c.line_id, c.direction}] = true;
  std::vector<Priors> out;
  for (const auto& [key, _] : keys) {
    if (auto p = compute_priors(history, key.first, key.second)) {
      out.push_back(std::move(*p));
    }
  }
  return out;
}

inline const Priors* find_priors(std::span<const Priors> all, const Course& course) {
  for (const Priors& p : all) {
    if (p.matches(course)) return &p;
  }
  return nullptr;
}

}  // namespace apcdn
