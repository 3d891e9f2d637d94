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


// Error metrics, rank sums and the method benchmark.

#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "apcdn/baselines.hpp"
#include "apcdn/core.hpp"
#include "apcdn/denoiser.hpp"
#include "apcdn/priors.hpp"
#include "apcdn/random.hpp"
#include "apcdn/simulator.hpp"

namespace apcdn {

// Load on arrival at each stop: 0 at the first stop, then the occupancy after
// the previous exchange. A trailing imbalance of raw counts is not a load
// anybody rides with, so it is left out.
inline std::vector<std::int64_t> arrival_loads(std::span<const StopCounts> counts) {
  std::vector<std::int64_t> out(counts.size(), 0);
  std::int64_t onboard = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out[i] = onboard;
    onboard += counts[i].boarding - counts[i].alighting;
  }
  return out;
}

struct ErrorSummary {
  double boardings = 0.0;
  double alightings = 0.0;
  double occupancy = 0.0;
};

struct Comparison {
  ErrorSummary mae;        // mean |candidate - reference|
  ErrorSummary bias;       // mean (candidate - reference)
  std::int64_t stops = 0;  // stops compared
  int courses = 0;
  std::vector<std::string> skipped;  // one diagnostic per skipped course
};

// Compares candidate counts with reference counts, course by course (same
// index). A course whose stop sequence differs from its reference is skipped
// with a diagnostic. Means run over all compared stops.
inline Comparison compare(std::span<const Course> references,
                          std::span<const Course> candidates) {
  Comparison out;
  ErrorSummary abs_sum, signed_sum;
  const std::size_t n = std::min(references.size(), candidates.size());
  for (std::size_t c = 0; c < n; ++c) {
    const Course& ref = references[c];
    const Course& cand = candidates[c];
    if (ref.stop_ids() != cand.stop_ids()) {
      out.skipped.push_back(ref.course_id + ": stop sequence differs from candidate " +
                            cand.course_id);
      continue;
    }
    const std::vector<StopCounts> a = ref.observed_counts();
    const std::vector<StopCounts> b = cand.observed_counts();
    const std::vector<std::int64_t> la = arrival_loads(a);
    const std::vector<std::int64_t> lb = arrival_loads(b);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double db = b[i].boarding - a[i].boarding;
      const double dz = b[i].alighting - a[i].alighting;
      const double dl = static_cast<double>(lb[i] - la[i]);
      abs_sum.boardings += std::abs(db);
      abs_sum.alightings += std::abs(dz);
      abs_sum.occupancy += std::abs(dl);
      signed_sum.boardings += db;
      signed_sum.alightings += dz;
      signed_sum.occupancy += dl;
    }
    out.stops += static_cast<std::int64_t>(a.size());
    ++out.courses;
  }
  for (std::size_t c = n; c < references.size(); ++c) {
    out.skipped.push_back(references[c].course_id + ": no candidate");
  }
  if (out.stops > 0) {
    const double d = static_cast<double>(out.stops);
    out.mae = {abs_sum.boardings / d, abs_sum.alightings / d, abs_sum.occupancy / d};
    out.bias = {signed_sum.boardings / d, signed_sum.alightings / d, signed_sum.occupancy / d};
  }
  return out;
}

inline ErrorSummary mae(std::span<const Course> references, std::span<const Course> candidates) {
  return compare(references, candidates).mae;
}

struct BiasDelta {
  ErrorSummary mean_bias;
  ErrorSummary mean_abs_delta;
};

// Positive bias means the candidate exceeds the reference.
inline BiasDelta bias_delta(std::span<const Course> references,
                            std::span<const Course> candidates) {
  const Comparison c = compare(references, candidates);
  return {c.bias, c.mae};
}

// Competition ranking per dataset (rank 1 = lowest error, ties share the
// lower rank), summed over datasets.
inline std::map<std::string, int> rank_sum(
    const std::map<std::string, std::map<std::string, double>>& table) {
  std::map<std::string, int> sums;
  std::vector<std::string> methods;
  if (!table.empty()) {
    for (const auto& [method, _] : table.begin()->second) {
      methods.push_back(method);
      sums[method] = 0;
    }
  }
  for (const auto& [dataset, row] : table) {
    if (row.size() != methods.size()) {
      throw std::invalid_argument("dataset " + dataset + " does not list every method");
    }
    for (const std::string& m : methods) {
      auto it = row.find(m);
      if (it == row.end()) {
        throw std::invalid_argument("dataset " + dataset + " misses method " + m);
      }
      int rank = 1;
      for (const auto& [other, value] : row) {
        if (value < it->second) ++rank;
      }
      sums[m] += rank;
    }
  }
  return sums;
}

enum class Method { kBaseline, kProposed, kL1, kL2, kTwoStage, kGibbs };

inline constexpr std::array<Method, 6> kAllMethods = {
    Method::kBaseline, Method::kProposed, Method::kL1,
    Method::kL2,       Method::kTwoStage, Method::kGibbs};

inline const char* to_string(Method m) {
  switch (m) {
    case Method::kBaseline: return "baseline";
    case Method::kProposed: return "proposed";
    case Method::kL1: return "l1";
    case Method::kL2: return "l2";
    case Method::kTwoStage: return "two-stage";
    case Method::kGibbs: return "gibbs";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
  for (Method m : kAllMethods) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

struct MethodOptions {
  int gibbs_iterations = 200;
  std::uint64_t seed = 0;
  const std::vector<Priors>* priors = nullptr;  // proposed method only
};

// Runs one method on one course. The baseline returns the observed counts.
inline DenoiseResult run_method(Method m, const Course& course, const DenoiseConfig& config,
                                const MethodOptions& options, std::size_t course_index = 0) {
  switch (m) {
    case Method::kBaseline: {
      DenoiseResult r;
      r.counts = course.observed_counts();
      r.occupancy = compute_occupancy(r.counts);
      r.status = DenoiseStatus::kOk;
      return r;
    }
    case Method::kProposed: {
      const Priors* p = options.priors ? find_priors(*options.priors, course) : nullptr;
      return denoise_course(course, p, config);
    }
    case Method::kL1: return denoise_l1(course, config);
    case Method::kL2: return denoise_l2(course, config);
    case Method::kTwoStage: return denoise_two_stage(course, config);
    case Method::kGibbs: {
      GibbsOptions g;
      g.seed = derive_seed(options.seed, course_index);
      g.iterations = options.gibbs_iterations;
      return denoise_gibbs(course, config, g);
    }
  }
  throw std::logic_error("unknown method");
}

struct Dataset {
  std::string name;
  std::vector<SimulatedPair> pairs;
};

struct MetricRow {
  std::string dataset;
  std::string method;
  ErrorSummary mae;
  ErrorSummary mean_bias;
  ErrorSummary mean_abs_delta;
  double mean_runtime_ms = 0.0;
  int courses = 0;
  int failures = 0;
};

struct BenchmarkReport {
  std::vector<MetricRow> rows;
  std::map<std::string, int> rank_sums;  // by occupancy MAE
  std::vector<std::string> datasets;
  std::vector<std::string> methods;

  const MetricRow* find(const std::string& dataset, const std::string& method) const {
    for (const MetricRow& r : rows) {
      if (r.dataset == dataset && r.method == method) return &r;
    }
    return nullptr;
  }
};

// Runs every method on every dataset and scores the outputs against the
// clean courses. Per-course time covers model construction and solving.
// Failed courses are counted and left out of that method's means.
inline BenchmarkReport benchmark(std::span<const Dataset> datasets,
                                 std::span<const Method> methods,
                                 const DenoiseConfig& config, std::uint64_t seed,
                                 const MethodOptions& base_options = {}) {
  BenchmarkReport report;
  for (Method m : methods) report.methods.push_back(to_string(m));
  std::map<std::string, std::map<std::string, double>> occupancy_table;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    const Dataset& ds = datasets[d];
    report.datasets.push_back(ds.name);
    for (Method m : methods) {
      MethodOptions options = base_options;
      options.seed = derive_seed(seed, d);
      MetricRow row;
      row.dataset = ds.name;
      row.method = to_string(m);
      std::vector<Course> refs, outs;
      double total_ms = 0.0;
      for (std::size_t i = 0; i < ds.pairs.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        const DenoiseResult r = run_method(m, ds.pairs[i].noisy, config, options, i);
        total_ms += std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
        if (!r.ok()) {
          ++row.failures;
          continue;
        }
        Course out = ds.pairs[i].noisy;
        for (std::size_t s = 0; s < out.stops.size(); ++s) out.stops[s].observed = r.counts[s];
        refs.push_back(ds.pairs[i].truth);
        outs.push_back(std::move(out));
      }
      const Comparison c = compare(refs, outs);
      row.mae = c.mae;
      row.mean_bias = c.bias;
      row.mean_abs_delta = c.mae;
      row.courses = c.courses;
      row.mean_runtime_ms = ds.pairs.empty() ? 0.0 : total_ms / ds.pairs.size();
      occupancy_table[ds.name][row.method] = row.mae.occupancy;
      report.rows.push_back(row);
    }
  }
  if (!methods.empty()) report.rank_sums = rank_sum(occupancy_table);
  return report;
}

// Method comparison on the simulated suite: one dataset per scenario.
inline std::vector<Dataset> suite_datasets(
    const std::map<ScenarioKind, std::vector<SimulatedPair>>& suite) {
  std::vector<Dataset> out;
  for (const auto& [kind, pairs] : suite) out.push_back({to_string(kind), pairs});
  return out;
}

namespace detail {

inline std::string fixed(double v, int digits = 2) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, digits);
  return std::string(buf, res.ptr);
}

inline std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace detail

// Text tables: occupancy MAE with the rank-sum row, boarding and alighting
// MAE, bias and absolute delta, runtime and failures.
inline std::string format_report(const BenchmarkReport& report) {
  std::ostringstream os;
  const std::size_t w = 12;
  auto header = [&](const std::string& title) {
    os << title << "\n" << std::string(12, ' ');
    for (const std::string& m : report.methods) os << detail::pad(m, w);
    os << "\n";
  };
  auto table = [&](const std::string& title, auto value) {
    header(title);
    for (const std::string& d : report.datasets) {
      os << d << std::string(d.size() < 12 ? 12 - d.size() : 1, ' ');
      for (const std::string& m : report.methods) {
        const MetricRow* r = report.find(d, m);
        os << detail::pad(r ? value(*r) : "-", w);
      }
      os << "\n";
    }
  };
  table("Occupancy MAE", [](const MetricRow& r) { return detail::fixed(r.mae.occupancy); });
  os << "Rank sum    ";
  for (const std::string& m : report.methods) {
    auto it = report.rank_sums.find(m);
    os << detail::pad(it == report.rank_sums.end() ? "-" : std::to_string(it->second), w);
  }
  os << "\n\n";
  table("Boarding MAE", [](const MetricRow& r) { return detail::fixed(r.mae.boardings); });
  os << "\n";
  table("Alighting MAE", [](const MetricRow& r) { return detail::fixed(r.mae.alightings); });
  os << "\n";
  table("Occupancy bias / abs delta", [](const MetricRow& r) {
    return detail::fixed(r.mean_bias.occupancy) + "/" + detail::fixed(r.mean_abs_delta.occupancy);
  });
  os << "\n";
  table("Runtime ms per course", [](const MetricRow& r) { return detail::fixed(r.mean_runtime_ms, 1); });
  os << "\n";
  table("Failures", [](const MetricRow& r) { return std::to_string(r.failures); });
  return os.str();
}

inline std::string format_report_csv(const BenchmarkReport& report) {
  std::ostringstream os;
  os << "dataset,method,courses,failures,mae_boardings,mae_alightings,mae_occupancy,"
        "bias_boardings,bias_alightings,bias_occupancy,abs_delta_boardings,"
        "abs_delta_alightings,abs_delta_occupancy,mean_runtime_ms\n";
  for (const MetricRow& r : report.rows) {
    os << r.dataset << ',' << r.method << ',' << r.courses << ',' << r.failures;
    for (double v : {r.mae.boardings, r.mae.alightings, r.mae.occupancy, r.mean_bias.boardings,
                     r.mean_bias.alightings, r.mean_bias.occupancy,
                     r.mean_abs_delta.boardings, r.mean_abs_delta.alightings,
                     r.mean_abs_delta.occupancy, r.mean_runtime_ms}) {
      os << ',' << detail::fixed(v, 6);
    }
    os << '\n';
  }
  os << "rank_sum";
  for (const std::string& m : report.methods) {
    auto it = report.rank_sums.find(m);
    os << ',' << m << '=' << (it == report.rank_sums.end() ? 0 : it->second);
  }
  os << '\n';
  return os.str();
}

}  // namespace apcdn
