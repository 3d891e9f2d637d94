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


// Command-line front end. Exit codes: 0 success, 1 some courses failed or
// were rejected, 2 fatal error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "apcdn/baselines.hpp"
#include "apcdn/denoiser.hpp"
#include "apcdn/evaluator.hpp"
#include "apcdn/io.hpp"
#include "apcdn/lp_format.hpp"
#include "apcdn/priors.hpp"
#include "apcdn/simulator.hpp"

namespace fs = std::filesystem;
using namespace apcdn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitFatal = 2;

struct Common {
  std::uint64_t seed = 0;
  std::string config_path;
  std::optional<double> load_factor;
  std::optional<double> count_cap_factor;
  std::optional<int> alpha_floor;
  std::optional<double> alpha_ratio;

  void attach(CLI::App* app) {
    app->add_option("--seed", seed, "Master random seed")->capture_default_str();
    app->add_option("--config", config_path, "key = value file overriding the defaults")
        ->check(CLI::ExistingFile);
    app->add_option("--load-factor", load_factor, "L_max as a multiple of capacity");
    app->add_option("--count-cap-factor", count_cap_factor, "Count cap as a multiple of L_max");
    app->add_option("--alpha-floor", alpha_floor, "Smallest similarity half margin");
    app->add_option("--alpha-ratio", alpha_ratio, "Half margin as a share of the count");
  }

  DenoiseConfig config() const {
    DenoiseConfig c = config_path.empty() ? DenoiseConfig{} : io::load_config(config_path);
    if (load_factor) c.load_factor = *load_factor;
    if (count_cap_factor) c.count_cap_factor = *count_cap_factor;
    if (alpha_floor) c.alpha_floor = *alpha_floor;
    if (alpha_ratio) c.alpha_ratio = *alpha_ratio;
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw io::IoError(e.what());
    }
    return c;
  }
};

void report_rejections(const std::string& file, const io::LoadResult& loaded) {
  for (const io::Rejection& r : loaded.rejected) {
    std::cerr << file << ": rejected course '" << r.course_id << "': " << r.reason << "\n";
  }
}

io::LoadResult load(const std::string& path) {
  io::LoadResult loaded = io::load_courses(path);
  report_rejections(path, loaded);
  return loaded;
}

std::vector<Priors> priors_from(const std::string& history_path, const std::string& priors_path) {
  std::vector<Priors> out;
  if (!history_path.empty()) out = compute_all_priors(load(history_path).courses);
  if (!priors_path.empty()) {
    const io::Json j = io::Json::parse(io::detail::read_file(priors_path));
    if (j.is_array()) {
      for (const io::Json& p : j) out.push_back(io::priors_from_json(p));
    } else {
      out.push_back(io::priors_from_json(j));
    }
  }
  return out;
}

std::vector<Method> parse_methods(const std::vector<std::string>& names, bool with_baseline) {
  std::vector<Method> out;
  for (const std::string& n : names) {
    if (n == "all") {
      for (Method m : kAllMethods) {
        if (m != Method::kBaseline || with_baseline) out.push_back(m);
      }
      continue;
    }
    const auto m = parse_method(n);
    if (!m) throw io::IoError("unknown method " + n);
    out.push_back(*m);
  }
  return out;
}

void write_report_files(const fs::path& dir, const BenchmarkReport& report) {
  io::write_text(dir / "report.txt", format_report(report));
  io::write_text(dir / "report.csv", format_report_csv(report));
  io::write_text(dir / "report.json", io::to_json(report).dump(2) + "\n");
}

// ---- denoise ----------------------------------------------------------------

struct DenoiseArgs {
  Common common;
  std::string in, history, priors, method = "proposed", out, report;
  int gibbs_iterations = 200;
};

int run_denoise(const DenoiseArgs& a) {
  const DenoiseConfig config = a.common.config();
  const auto method = parse_method(a.method);
  if (!method || *method == Method::kBaseline) throw io::IoError("unknown method " + a.method);
  const io::LoadResult loaded = load(a.in);
  const std::vector<Priors> priors = priors_from(a.history, a.priors);

  MethodOptions options;
  options.seed = a.common.seed;
  options.gibbs_iterations = a.gibbs_iterations;
  options.priors = &priors;

  std::vector<Course> denoised;
  io::Json rows = io::Json::array();
  int failed = 0, dropped = 0;
  for (std::size_t i = 0; i < loaded.courses.size(); ++i) {
    const Course& c = loaded.courses[i];
    const DenoiseResult r = run_method(*method, c, config, options, i);
    rows.push_back(io::to_json(c, r));
    if (!r.ok()) {
      ++failed;
      std::cerr << "course '" << c.course_id << "' failed: " << r.message << "\n";
      continue;
    }
    dropped += r.ticketing_dropped;
    denoised.push_back(io::with_counts(c, r.counts));
  }
  io::write_courses(a.out, denoised);
  if (!a.report.empty()) {
    io::Json rejected = io::Json::array();
    for (const io::Rejection& r : loaded.rejected) {
      rejected.push_back({{"course_id", r.course_id}, {"reason", r.reason}});
    }
    const io::Json report = {
        {"method", a.method},
        {"seed", a.common.seed},
        {"config", io::to_json(config)},
        {"summary",
         {{"courses", loaded.courses.size()},
          {"denoised", denoised.size()},
          {"failed", failed},
          {"ticketing_dropped", dropped},
          {"rejected", loaded.rejected.size()}}},
        {"courses", rows},
        {"rejected", rejected}};
    io::write_text(a.report, report.dump(2) + "\n");
  }
  std::cout << "denoised " << denoised.size() << " of " << loaded.courses.size()
            << " courses (" << failed << " failed, " << loaded.rejected.size()
            << " rejected)\n";
  return failed || !loaded.rejected.empty() ? kExitPartial : kExitOk;
}

// ---- priors -----------------------------------------------------------------

struct PriorsArgs {
  Common common;
  std::string in, line, direction, out;
};

int run_priors(const PriorsArgs& a) {
  const io::LoadResult loaded = load(a.in);
  io::Json out;
  if (a.line.empty() && a.direction.empty()) {
    out = io::Json::array();
    for (const Priors& p : compute_all_priors(loaded.courses)) out.push_back(io::to_json(p));
  } else {
    const auto p = compute_priors(loaded.courses, a.line, a.direction);
    if (!p) throw io::IoError("no usable history for line " + a.line + " " + a.direction);
    out = io::to_json(*p);
  }
  io::write_text(a.out, out.dump(2) + "\n");
  return loaded.rejected.empty() ? kExitOk : kExitPartial;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
  Common common;
  std::string truth, scenario = "all", out_dir;
  Scenario params;
};

int run_simulate(const SimulateArgs& a) {
  std::vector<ScenarioKind> kinds;
  if (a.scenario == "all") {
    kinds.assign(kAllScenarios.begin(), kAllScenarios.end());
  } else if (const auto k = parse_scenario(a.scenario)) {
    kinds.push_back(*k);
  } else {
    throw io::IoError("unknown scenario " + a.scenario);
  }
  const io::LoadResult loaded = load(a.truth);
  const fs::path dir(a.out_dir);
  io::write_courses(dir / "truth.csv", loaded.courses);
  for (ScenarioKind kind : kinds) {
    Scenario s = a.params;
    s.kind = kind;
    s.validate();
    std::vector<Course> noisy;
    for (std::size_t i = 0; i < loaded.courses.size(); ++i) {
      noisy.push_back(distort(loaded.courses[i], s, scenario_seed(a.common.seed, kind, i)).noisy);
    }
    const std::string name = to_string(kind);
    io::write_courses(dir / (name + ".csv"), noisy);
    io::Json meta = io::simulation_metadata(a.common.seed, s, "truth.csv", noisy.size());
    io::write_text(dir / (name + ".meta.json"), meta.dump(2) + "\n");
  }
  return loaded.rejected.empty() ? kExitOk : kExitPartial;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  Common common;
  std::string truth, out, name;
  std::vector<std::string> candidates;
};

int run_eval(const EvalArgs& a) {
  const io::LoadResult truth = load(a.truth);
  const std::string dataset = a.name.empty() ? fs::path(a.truth).stem().string() : a.name;
  BenchmarkReport report;
  report.datasets.push_back(dataset);
  std::map<std::string, std::map<std::string, double>> grid;
  bool partial = !truth.rejected.empty();
  for (const std::string& path : a.candidates) {
    const io::LoadResult cand = load(path);
    partial |= !cand.rejected.empty();
    const io::Pairing pairing = io::pair_by_course_id(truth.courses, cand.courses);
    std::vector<Course> refs, outs;
    for (const SimulatedPair& p : pairing.pairs) {
      refs.push_back(p.truth);
      outs.push_back(p.noisy);
    }
    const Comparison c = compare(refs, outs);
    MetricRow row;
    row.dataset = dataset;
    row.method = fs::path(path).stem().string();
    row.mae = c.mae;
    row.mean_bias = c.bias;
    row.mean_abs_delta = c.mae;
    row.courses = c.courses;
    row.failures = static_cast<int>(pairing.missing.size() + c.skipped.size());
    partial |= row.failures > 0;
    report.methods.push_back(row.method);
    grid[dataset][row.method] = row.mae.occupancy;
    report.rows.push_back(row);
  }
  if (!a.candidates.empty()) report.rank_sums = rank_sum(grid);
  write_report_files(a.out, report);
  std::cout << format_report(report);
  return partial ? kExitPartial : kExitOk;
}

// ---- bench ------------------------------------------------------------------

struct BenchArgs {
  Common common;
  std::string suite, out, history;
  std::vector<std::string> methods = {"all"};
  int courses = 8;
  int gibbs_iterations = 200;
};

std::vector<Dataset> load_suite(const fs::path& dir, bool& partial) {
  const fs::path truth_path = dir / "truth.csv";
  if (!fs::exists(truth_path)) throw io::IoError("suite has no truth.csv: " + dir.string());
  const io::LoadResult truth = load(truth_path.string());
  partial |= !truth.rejected.empty();
  std::vector<Dataset> out;
  for (ScenarioKind kind : kAllScenarios) {
    const fs::path p = dir / (std::string(to_string(kind)) + ".csv");
    if (!fs::exists(p)) continue;
    const io::LoadResult noisy = load(p.string());
    const io::Pairing pairing = io::pair_by_course_id(truth.courses, noisy.courses);
    partial |= !noisy.rejected.empty() || !pairing.missing.empty();
    out.push_back({to_string(kind), pairing.pairs});
  }
  if (out.empty()) throw io::IoError("suite has no scenario files: " + dir.string());
  return out;
}

int run_bench(const BenchArgs& a) {
  const DenoiseConfig config = a.common.config();
  bool partial = false;
  std::vector<Dataset> datasets;
  if (a.suite.empty()) {
    SynthOptions o;
    o.courses = a.courses;
    const auto truths = synthesize_courses(o, a.common.seed);
    datasets = suite_datasets(scenario_suite(truths, a.common.seed));
  } else {
    datasets = load_suite(a.suite, partial);
  }
  const std::vector<Priors> priors = priors_from(a.history, "");
  MethodOptions options;
  options.gibbs_iterations = a.gibbs_iterations;
  options.priors = &priors;
  const std::vector<Method> methods = parse_methods(a.methods, true);
  const BenchmarkReport report = benchmark(datasets, methods, config, a.common.seed, options);
  write_report_files(a.out, report);
  std::cout << format_report(report);
  for (const MetricRow& r : report.rows) partial |= r.failures > 0;
  return partial ? kExitPartial : kExitOk;
}

// ---- dump-model -------------------------------------------------------------

struct DumpArgs {
  Common common;
  std::string in, course_id, out, history, priors;
  int stage = 1;
  bool no_ticketing = false;
};

int run_dump(const DumpArgs& a) {
  const DenoiseConfig config = a.common.config();
  const io::LoadResult loaded = load(a.in);
  const Course* course = nullptr;
  for (const Course& c : loaded.courses) {
    if (c.course_id == a.course_id) course = &c;
  }
  if (!course) throw io::IoError("course " + a.course_id + " not found in " + a.in);
  const std::vector<Priors> priors = priors_from(a.history, a.priors);
  const Priors* p = find_priors(priors, *course);
  if (a.stage == 3 && !p) throw io::IoError("stage 3 needs priors for course " + a.course_id);

  bool with_ticketing = !a.no_ticketing;
  std::vector<double> achieved;
  if (a.stage > 1) {
    LexicographicOptions lex;
    lex.use_ticketing = with_ticketing;
    const DenoiseResult r = denoise_course(*course, p, config, lex);
    if (!r.ok()) throw io::IoError("course cannot be denoised: " + r.message);
    with_ticketing = with_ticketing && !r.ticketing_dropped;
    achieved = {r.stage1_value, r.stage2_value};
  }
  DenoiseModel model = build_denoise_model(*course, config, with_ticketing);
  if (p) add_prior_stage(model, *p);
  const milp::ProblemSpec problem = milp::stage_problem(
      model.flow.problem, model.stages, achieved, a.stage - 1, config.lex_slack);
  io::write_text(a.out, milp::to_lp_string(
                            problem, "course " + a.course_id + " stage " + std::to_string(a.stage)));
  return kExitOk;
}

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
  Common common;
  SynthOptions options;
  std::string out;
};

int run_synth(const SynthArgs& a) {
  io::write_courses(a.out, synthesize_courses(a.options, a.common.seed));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"apcdn: denoise automatic passenger counts"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "apcdn 0.1.0");

  DenoiseArgs den;
  auto* c_den = app.add_subcommand("denoise", "Denoise every course of a file");
  den.common.attach(c_den);
  c_den->add_option("--in", den.in, "Courses (CSV or JSON)")->required()->check(CLI::ExistingFile);
  c_den->add_option("--priors-history", den.history, "History used to compute priors")
      ->check(CLI::ExistingFile);
  c_den->add_option("--priors", den.priors, "Precomputed priors JSON")->check(CLI::ExistingFile);
  c_den->add_option("--method", den.method, "proposed|l1|l2|two-stage|gibbs")
      ->capture_default_str();
  c_den->add_option("--out", den.out, "Denoised courses")->required();
  c_den->add_option("--report", den.report, "Per-course results as JSON");
  c_den->add_option("--gibbs-iterations", den.gibbs_iterations)->capture_default_str();

  PriorsArgs pri;
  auto* c_pri = app.add_subcommand("priors", "Compute historical priors");
  pri.common.attach(c_pri);
  c_pri->add_option("--in", pri.in, "History courses")->required()->check(CLI::ExistingFile);
  c_pri->add_option("--line", pri.line, "Line id (omit for all lines)");
  c_pri->add_option("--direction", pri.direction, "Direction");
  c_pri->add_option("--out", pri.out, "Priors JSON")->required();

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Distort clean courses");
  sim.common.attach(c_sim);
  c_sim->add_option("--truth", sim.truth, "Clean courses")->required()->check(CLI::ExistingFile);
  c_sim->add_option("--scenario", sim.scenario, "gaussian|over|under|slope|outliers|all")
      ->capture_default_str();
  c_sim->add_option("--out-dir", sim.out_dir, "Output directory")->required();
  c_sim->add_option("--noise-ratio", sim.params.noise_ratio)->capture_default_str();
  c_sim->add_option("--add-min", sim.params.add_min)->capture_default_str();
  c_sim->add_option("--add-max", sim.params.add_max)->capture_default_str();
  c_sim->add_option("--slope", sim.params.slope)->capture_default_str();
  c_sim->add_option("--outliers", sim.params.outlier_count)->capture_default_str();
  c_sim->add_flag("--ticketing-from-truth", sim.params.ticketing_from_truth,
                  "Copy clean counts into the ticketing columns");

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("eval", "Score candidate files against the truth");
  ev.common.attach(c_ev);
  c_ev->add_option("--truth", ev.truth, "Clean courses")->required()->check(CLI::ExistingFile);
  c_ev->add_option("--candidates", ev.candidates, "Candidate files")
      ->required()
      ->check(CLI::ExistingFile);
  c_ev->add_option("--out", ev.out, "Output directory")->required();
  c_ev->add_option("--name", ev.name, "Dataset label (default: truth file stem)");

  BenchArgs be;
  auto* c_be = app.add_subcommand("bench", "Run methods on a simulated suite");
  be.common.attach(c_be);
  c_be->add_option("--suite", be.suite, "Directory written by simulate (default: synthesise)")
      ->check(CLI::ExistingDirectory);
  c_be->add_option("--methods", be.methods, "Method names or 'all'")->capture_default_str();
  c_be->add_option("--out", be.out, "Output directory")->required();
  c_be->add_option("--priors-history", be.history)->check(CLI::ExistingFile);
  c_be->add_option("--courses", be.courses, "Synthetic courses when no suite is given")
      ->capture_default_str();
  c_be->add_option("--gibbs-iterations", be.gibbs_iterations)->capture_default_str();

  DumpArgs dm;
  auto* c_dm = app.add_subcommand("dump-model", "Write one optimisation stage as an LP file");
  dm.common.attach(c_dm);
  c_dm->add_option("--in", dm.in, "Courses")->required()->check(CLI::ExistingFile);
  c_dm->add_option("--course-id", dm.course_id)->required();
  c_dm->add_option("--stage", dm.stage)->check(CLI::Range(1, 3))->capture_default_str();
  c_dm->add_option("--out", dm.out, "LP file")->required();
  c_dm->add_option("--priors-history", dm.history)->check(CLI::ExistingFile);
  c_dm->add_option("--priors", dm.priors)->check(CLI::ExistingFile);
  c_dm->add_flag("--no-ticketing", dm.no_ticketing);

  SynthArgs sy;
  auto* c_sy = app.add_subcommand("synth", "Generate clean synthetic courses");
  sy.common.attach(c_sy);
  c_sy->add_option("--lines", sy.options.lines)->capture_default_str();
  c_sy->add_option("--courses", sy.options.courses)->capture_default_str();
  c_sy->add_option("--min-stops", sy.options.min_stops)->capture_default_str();
  c_sy->add_option("--max-stops", sy.options.max_stops)->capture_default_str();
  c_sy->add_option("--capacities", sy.options.capacities)->capture_default_str();
  c_sy->add_option("--out", sy.out, "Output courses")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitFatal;
  }

  try {
    if (*c_den) return run_denoise(den);
    if (*c_pri) return run_priors(pri);
    if (*c_sim) return run_simulate(sim);
    if (*c_ev) return run_eval(ev);
    if (*c_be) return run_bench(be);
    if (*c_dm) return run_dump(dm);
    if (*c_sy) return run_synth(sy);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitFatal;
}
