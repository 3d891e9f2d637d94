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
#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "apcdn/core.hpp"
#include "apcdn/denoiser.hpp"
#include "apcdn/evaluator.hpp"
#include "apcdn/priors.hpp"
#include "apcdn/random.hpp"
#include "apcdn/simulator.hpp"

namespace apcdn::io {

using Json = nlohmann::ordered_json;

// Unreadable or structurally broken input; the whole batch is abandoned.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::array<std::string_view, 11> kColumns = {
    "course_id", "line_id",   "direction",  "departure_time", "stop_seq",   "stop_id",
    "board_obs", "alight_obs", "board_tick", "alight_tick",   "capacity"};

// One row of the interchange format. Text cells stay text until the course is
// assembled so that every problem can be reported per course.
struct CourseFileRecord {
  std::string course_id;
  std::string line_id;
  std::string direction;
  std::string departure_time;
  std::string stop_seq;
  std::string stop_id;
  std::string board_obs;
  std::string alight_obs;
  std::string board_tick;
  std::string alight_tick;
  std::string capacity;
  int line = 0;  // 1-based source line (CSV) or element index (JSON)
};

struct Rejection {
  std::string course_id;
  std::string reason;
};

struct LoadResult {
  std::vector<Course> courses;
  std::vector<Rejection> rejected;
};

enum class FileFormat { kCsv, kJson };

inline FileFormat format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".json" ? FileFormat::kJson : FileFormat::kCsv;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Splits one CSV record (RFC 4180 quoting; embedded newlines are not
// supported). Returns nullopt on an unterminated quote.
inline std::optional<std::vector<std::string>> split_csv(std::string_view line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  if (quoted) return std::nullopt;
  cells.push_back(std::move(cell));
  return cells;
}

inline std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

inline std::string int_cell(std::optional<int> v) { return v ? std::to_string(*v) : ""; }

inline std::string* field(CourseFileRecord& r, std::string_view column) {
  if (column == "course_id") return &r.course_id;
  if (column == "line_id") return &r.line_id;
  if (column == "direction") return &r.direction;
  if (column == "departure_time") return &r.departure_time;
  if (column == "stop_seq") return &r.stop_seq;
  if (column == "stop_id") return &r.stop_id;
  if (column == "board_obs") return &r.board_obs;
  if (column == "alight_obs") return &r.alight_obs;
  if (column == "board_tick") return &r.board_tick;
  if (column == "alight_tick") return &r.alight_tick;
  if (column == "capacity") return &r.capacity;
  return nullptr;
}

inline bool optional_column(std::string_view column) {
  return column == "board_tick" || column == "alight_tick" || column == "departure_time";
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Builds one course from its records or explains why it cannot be built.
inline std::variant<Course, std::string> assemble(std::vector<CourseFileRecord> rows) {
  const CourseFileRecord& first = rows.front();
  Course c;
  c.course_id = first.course_id;
  c.line_id = first.line_id;
  c.direction = first.direction;
  c.departure_time = first.departure_time;
  const auto cap = parse_int(first.capacity);
  if (!cap) return "line " + std::to_string(first.line) + ": bad capacity";
  c.capacity = static_cast<int>(*cap);

  std::vector<std::pair<std::int64_t, const CourseFileRecord*>> ordered;
  for (const CourseFileRecord& r : rows) {
    const std::string at = "line " + std::to_string(r.line) + ": ";
    if (r.line_id != c.line_id) return at + "inconsistent line_id";
    if (r.direction != c.direction) return at + "inconsistent direction";
    if (r.departure_time != c.departure_time) return at + "inconsistent departure_time";
    if (parse_int(r.capacity) != cap) return at + "inconsistent capacity";
    const auto seq = parse_int(r.stop_seq);
    if (!seq) return at + "bad stop_seq";
    ordered.emplace_back(*seq, &r);
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i].first == ordered[i - 1].first) return "duplicate stop_seq";
  }
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (ordered[i].first != static_cast<std::int64_t>(i) + 1) {
      return "stop_seq not contiguous from 1";
    }
  }

  int empty_obs = 0;
  for (const auto& [seq, r] : ordered) {
    empty_obs += trim(r->board_obs).empty();
    empty_obs += trim(r->alight_obs).empty();
  }
  const int cells = static_cast<int>(2 * ordered.size());
  if (empty_obs != 0 && empty_obs != cells) return "observed counts partially missing";
  c.has_apc = empty_obs == 0;

  for (const auto& [seq, r] : ordered) {
    const std::string at = "line " + std::to_string(r->line) + ": ";
    Stop s;
    s.stop_id = std::string(trim(r->stop_id));
    if (c.has_apc) {
      const auto b = parse_int(r->board_obs);
      const auto a = parse_int(r->alight_obs);
      if (!b || !a) return at + "bad observed count";
      s.observed = {static_cast<int>(*b), static_cast<int>(*a)};
    }
    for (auto [text, slot] : {std::pair{&r->board_tick, &s.ticketing.boarding},
                              std::pair{&r->alight_tick, &s.ticketing.alighting}}) {
      if (trim(*text).empty()) continue;
      const auto v = parse_int(*text);
      if (!v) return at + "bad ticketing count";
      *slot = static_cast<int>(*v);
    }
    c.stops.push_back(std::move(s));
  }
  if (auto problem = check_well_formed(c)) return *problem;
  return c;
}

inline LoadResult group_records(std::vector<CourseFileRecord> records) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<CourseFileRecord>> by_course;
  LoadResult out;
  for (CourseFileRecord& r : records) {
    if (r.course_id.empty()) {
      out.rejected.push_back({"", "line " + std::to_string(r.line) + ": empty course_id"});
      continue;
    }
    auto [it, inserted] = by_course.try_emplace(r.course_id);
    if (inserted) order.push_back(r.course_id);
    it->second.push_back(std::move(r));
  }
  for (const std::string& id : order) {
    auto built = assemble(std::move(by_course[id]));
    if (auto* c = std::get_if<Course>(&built)) {
      out.courses.push_back(std::move(*c));
    } else {
      out.rejected.push_back({id, std::get<std::string>(built)});
    }
  }
  return out;
}

inline std::string json_cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  return v.dump();
}

}  // namespace detail

inline LoadResult parse_courses_csv(std::string_view text) {
  std::vector<CourseFileRecord> records;
  std::vector<std::string> header;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (detail::trim(line).empty()) {
      if (end == text.size()) break;
      continue;
    }
    auto cells = detail::split_csv(line);
    if (!cells) throw IoError("line " + std::to_string(line_no) + ": unterminated quote");
    if (header.empty()) {
      for (auto& h : *cells) header.emplace_back(detail::trim(h));
      if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) {
        header[0].erase(0, 3);
      }
      for (std::string_view col : kColumns) {
        if (!detail::optional_column(col) &&
            std::find(header.begin(), header.end(), col) == header.end()) {
          throw IoError("missing column " + std::string(col));
        }
      }
      continue;
    }
    if (cells->size() != header.size()) {
      throw IoError("line " + std::to_string(line_no) + ": expected " +
                    std::to_string(header.size()) + " cells, got " +
                    std::to_string(cells->size()));
    }
    CourseFileRecord r;
    r.line = line_no;
    for (std::size_t k = 0; k < header.size(); ++k) {
      if (std::string* f = detail::field(r, header[k])) *f = (*cells)[k];
    }
    r.course_id = std::string(detail::trim(r.course_id));
    records.push_back(std::move(r));
    if (end == text.size()) break;
  }
  if (header.empty()) throw IoError("empty file");
  return detail::group_records(std::move(records));
}

inline LoadResult parse_courses_json(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw IoError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw IoError("expected a JSON array of records");
  std::vector<CourseFileRecord> records;
  int index = 0;
  for (const Json& item : doc) {
    ++index;
    if (!item.is_object()) throw IoError("record " + std::to_string(index) + " is not an object");
    CourseFileRecord r;
    r.line = index;
    for (std::string_view col : kColumns) {
      const auto it = item.find(std::string(col));
      if (it == item.end()) {
        if (detail::optional_column(col)) continue;
        throw IoError("record " + std::to_string(index) + ": missing " + std::string(col));
      }
      *detail::field(r, col) = detail::json_cell(*it);
    }
    records.push_back(std::move(r));
  }
  return detail::group_records(std::move(records));
}

inline LoadResult load_courses(const std::filesystem::path& path, FileFormat format) {
  const std::string text = detail::read_file(path);
  return format == FileFormat::kJson ? parse_courses_json(text) : parse_courses_csv(text);
}

inline LoadResult load_courses(const std::filesystem::path& path) {
  return load_courses(path, format_from_path(path));
}

inline std::string courses_to_csv(std::span<const Course> courses) {
  std::string out;
  for (std::size_t k = 0; k < kColumns.size(); ++k) {
    out += (k ? "," : "") + std::string(kColumns[k]);
  }
  out += '\n';
  for (const Course& c : courses) {
    for (std::size_t i = 0; i < c.stops.size(); ++i) {
      const Stop& s = c.stops[i];
      const std::string cells[] = {
          detail::csv_cell(c.course_id),
          detail::csv_cell(c.line_id),
          detail::csv_cell(c.direction),
          detail::csv_cell(c.departure_time),
          std::to_string(i + 1),
          detail::csv_cell(s.stop_id),
          c.has_apc ? std::to_string(s.observed.boarding) : "",
          c.has_apc ? std::to_string(s.observed.alighting) : "",
          detail::int_cell(s.ticketing.boarding),
          detail::int_cell(s.ticketing.alighting),
          std::to_string(c.capacity)};
      for (std::size_t k = 0; k < std::size(cells); ++k) out += (k ? "," : "") + cells[k];
      out += '\n';
    }
  }
  return out;
}

inline Json courses_to_json(std::span<const Course> courses) {
  Json arr = Json::array();
  for (const Course& c : courses) {
    for (std::size_t i = 0; i < c.stops.size(); ++i) {
      const Stop& s = c.stops[i];
      Json r = Json::object();
      r["course_id"] = c.course_id;
      r["line_id"] = c.line_id;
      r["direction"] = c.direction;
      r["departure_time"] = c.departure_time;
      r["stop_seq"] = i + 1;
      r["stop_id"] = s.stop_id;
      r["board_obs"] = c.has_apc ? Json(s.observed.boarding) : Json(nullptr);
      r["alight_obs"] = c.has_apc ? Json(s.observed.alighting) : Json(nullptr);
      r["board_tick"] = s.ticketing.boarding ? Json(*s.ticketing.boarding) : Json(nullptr);
      r["alight_tick"] = s.ticketing.alighting ? Json(*s.ticketing.alighting) : Json(nullptr);
      r["capacity"] = c.capacity;
      arr.push_back(std::move(r));
    }
  }
  return arr;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

inline void write_courses(const std::filesystem::path& path, std::span<const Course> courses,
                          FileFormat format) {
  write_text(path, format == FileFormat::kJson ? courses_to_json(courses).dump(2) + "\n"
                                               : courses_to_csv(courses));
}

inline void write_courses(const std::filesystem::path& path, std::span<const Course> courses) {
  write_courses(path, courses, format_from_path(path));
}

// Copy of `course` carrying `counts` as its observations.
inline Course with_counts(const Course& course, std::span<const StopCounts> counts) {
  Course out = course;
  out.has_apc = true;
  for (std::size_t i = 0; i < out.stops.size() && i < counts.size(); ++i) {
    out.stops[i].observed = counts[i];
  }
  return out;
}

// ---- configuration ----------------------------------------------------------

// `key = value` lines; '#' starts a comment. Keys are DenoiseConfig field
// names. Unknown keys and malformed values are errors.
inline DenoiseConfig parse_config(std::string_view text, DenoiseConfig config = {}) {
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string at = "config line " + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw IoError(at + "expected key = value");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    auto real = [&](double& slot) {
      const auto v = detail::parse_double(value);
      if (!v) throw IoError(at + "bad number for " + key);
      slot = *v;
    };
    if (key == "load_factor") real(config.load_factor);
    else if (key == "count_cap_factor") real(config.count_cap_factor);
    else if (key == "alpha_ratio") real(config.alpha_ratio);
    else if (key == "feasibility_tolerance") real(config.feasibility_tolerance);
    else if (key == "integrality_tolerance") real(config.integrality_tolerance);
    else if (key == "lex_slack") real(config.lex_slack);
    else if (key == "alpha_floor") {
      const auto v = detail::parse_int(value);
      if (!v) throw IoError(at + "bad integer for alpha_floor");
      config.alpha_floor = static_cast<int>(*v);
    } else {
      throw IoError(at + "unknown key " + key);
    }
  }
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("config: ") + e.what());
  }
  return config;
}

inline DenoiseConfig load_config(const std::filesystem::path& path) {
  return parse_config(detail::read_file(path));
}

inline Json to_json(const DenoiseConfig& c) {
  return Json{{"load_factor", c.load_factor},
              {"count_cap_factor", c.count_cap_factor},
              {"alpha_floor", c.alpha_floor},
              {"alpha_ratio", c.alpha_ratio},
              {"feasibility_tolerance", c.feasibility_tolerance},
              {"integrality_tolerance", c.integrality_tolerance},
              {"lex_slack", c.lex_slack}};
}

// ---- priors -----------------------------------------------------------------

inline Json to_json(const Priors& p) {
  Json stops = Json::array();
  for (std::size_t i = 0; i < p.stop_ids.size(); ++i) {
    stops.push_back(Json{{"stop_id", p.stop_ids[i]},
                         {"p_board", p.p_board[i]},
                         {"p_alight", p.p_alight[i]}});
  }
  return Json{{"line_id", p.line_id},
              {"direction", p.direction},
              {"r", p.r},
              {"history_size", p.history_size},
              {"skipped_courses", p.skipped_courses},
              {"stops", std::move(stops)}};
}

inline Priors priors_from_json(const Json& j) {
  Priors p;
  try {
    p.line_id = j.at("line_id").get<std::string>();
    p.direction = j.at("direction").get<std::string>();
    p.r = j.at("r").get<double>();
    p.history_size = j.value("history_size", 0);
    p.skipped_courses = j.value("skipped_courses", 0);
    for (const Json& s : j.at("stops")) {
      p.stop_ids.push_back(s.at("stop_id").get<std::string>());
      p.p_board.push_back(s.at("p_board").get<double>());
      p.p_alight.push_back(s.at("p_alight").get<double>());
    }
  } catch (const Json::exception& e) {
    throw IoError(std::string("bad priors JSON: ") + e.what());
  }
  return p;
}

// ---- results and reports ----------------------------------------------------

inline Json to_json(const Course& course, const DenoiseResult& r) {
  Json j{{"course_id", course.course_id},
         {"line_id", course.line_id},
         {"direction", course.direction},
         {"status", to_string(r.status)},
         {"quality", r.quality},
         {"stage1_value", r.stage1_value},
         {"stage2_value", r.stage2_value},
         {"stage3_value", r.stage3_value ? Json(*r.stage3_value) : Json(nullptr)},
         {"objective", r.objective ? Json(*r.objective) : Json(nullptr)},
         {"ticketing_dropped", r.ticketing_dropped},
         {"nodes", r.nodes},
         {"runtime_ms", r.runtime_ms}};
  if (!r.message.empty()) j["message"] = r.message;
  return j;
}

inline Json to_json(const Scenario& s) {
  return Json{{"kind", to_string(s.kind)},
              {"noise_ratio", s.noise_ratio},
              {"add_min", s.add_min},
              {"add_max", s.add_max},
              {"slope", s.slope},
              {"outlier_count", s.outlier_count},
              {"ticketing_from_truth", s.ticketing_from_truth}};
}

// Sidecar describing how a simulated dataset was produced.
inline Json simulation_metadata(std::uint64_t master_seed, const Scenario& scenario,
                                const std::string& truth_file, std::size_t courses) {
  return Json{{"generator", kGeneratorName},
              {"master_seed", master_seed},
              {"scenario", to_json(scenario)},
              {"truth", truth_file},
              {"courses", courses}};
}

// Pairs each truth course with the candidate of the same course_id, in truth
// order. Truth courses without a candidate are returned in `missing`.
struct Pairing {
  std::vector<SimulatedPair> pairs;
  std::vector<std::string> missing;
};

inline Pairing pair_by_course_id(std::span<const Course> truths,
                                 std::span<const Course> candidates) {
  std::map<std::string, const Course*> by_id;
  for (const Course& c : candidates) by_id.emplace(c.course_id, &c);
  Pairing out;
  for (const Course& t : truths) {
    const auto it = by_id.find(t.course_id);
    if (it == by_id.end()) {
      out.missing.push_back(t.course_id);
    } else {
      out.pairs.push_back({t, *it->second});
    }
  }
  return out;
}

inline Json to_json(const ErrorSummary& e) {
  return Json{{"boardings", e.boardings}, {"alightings", e.alightings}, {"occupancy", e.occupancy}};
}

inline Json to_json(const BenchmarkReport& report) {
  Json rows = Json::array();
  for (const MetricRow& r : report.rows) {
    rows.push_back(Json{{"dataset", r.dataset},
                        {"method", r.method},
                        {"mae", to_json(r.mae)},
                        {"mean_bias", to_json(r.mean_bias)},
                        {"mean_abs_delta", to_json(r.mean_abs_delta)},
                        {"mean_runtime_ms", r.mean_runtime_ms},
                        {"courses", r.courses},
                        {"failures", r.failures}});
  }
  Json ranks = Json::object();
  for (const std::string& m : report.methods) {
    const auto it = report.rank_sums.find(m);
    if (it != report.rank_sums.end()) ranks[m] = it->second;
  }
  return Json{{"datasets", report.datasets},
              {"methods", report.methods},
              {"rows", std::move(rows)},
              {"rank_sums", std::move(ranks)}};
}

}  // namespace apcdn::io
