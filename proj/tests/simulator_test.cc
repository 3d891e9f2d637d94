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


#include "apcdn/simulator.hpp"

#include <gtest/gtest.h>

#include "fixtures.hpp"

namespace apcdn {
namespace {

using testing::make_course;

Course sample_truth() {
  return make_course({12, 7, 9, 4, 0}, {0, 3, 10, 6, 13}, 100);
}

TEST(Random, DerivedSeedsDiffer) {
  EXPECT_NE(derive_seed(7, 1), derive_seed(7, 2));
  EXPECT_NE(derive_seed(7, 1), derive_seed(8, 1));
  EXPECT_EQ(derive_seed(7, 1), derive_seed(7, 1));
}

TEST(Random, UniformIntStaysInRange) {
  Rng rng(1);
  std::vector<int> hits(5, 0);
  for (int i = 0; i < 5000; ++i) {
    const auto v = uniform_int(rng, 1, 5);
    ASSERT_GE(v, 1);
    ASSERT_LE(v, 5);
    ++hits[v - 1];
  }
  for (int h : hits) EXPECT_NEAR(h, 1000, 150);
}

TEST(Random, NormalMoments) {
  Rng rng(2);
  double sum = 0, sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double g = standard_normal(rng);
    sum += g;
    sq += g * g;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.03);
  EXPECT_NEAR(sq / n, 1.0, 0.05);
}

TEST(Random, StreamIsPinned) {
  // Simulated datasets must not change between builds or platforms.
  Rng standard;
  standard.discard(9999);
  EXPECT_EQ(standard(), 9981545732273789042ULL);
  Rng rng(20260302);
  EXPECT_EQ(uniform_int(rng, 0, 1000), 93);
  EXPECT_EQ(uniform_int(rng, 0, 1000), 647);
  EXPECT_EQ(uniform_int(rng, 0, 1000), 60);
  EXPECT_DOUBLE_EQ(uniform01(rng), 0.26769198231811242);
  EXPECT_DOUBLE_EQ(standard_normal(rng), 0.14540926675565621);
  EXPECT_EQ(derive_seed(7, 1), 7076223819581404918ULL);
}

TEST(Distort, ZeroNoiseGaussianIsIdentity) {
  Scenario s;
  s.noise_ratio = 0.0;
  const Course truth = sample_truth();
  const SimulatedPair p = distort(truth, s, 5);
  EXPECT_EQ(p.noisy.observed_counts(), truth.observed_counts());
  EXPECT_EQ(p.truth, truth);
}

TEST(Distort, OutliersAreTwiceCapacityOrZero) {
  Scenario s;
  s.kind = ScenarioKind::kOutliers;
  s.noise_ratio = 0.0;
  const Course truth = make_course({12, 7, 9, 4, 0}, {1, 3, 10, 6, 13}, 100);
  for (int count : {1, 3}) {
    s.outlier_count = count;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const SimulatedPair p = distort(truth, s, seed);
      int changed = 0;
      const auto a = p.noisy.observed_counts();
      const auto b = truth.observed_counts();
      for (std::size_t i = 0; i < a.size(); ++i) {
        for (auto [x, t] : {std::pair{a[i].boarding, b[i].boarding},
                            std::pair{a[i].alighting, b[i].alighting}}) {
          if (x != t) {
            ++changed;
            EXPECT_TRUE(x == 200 || x == 0);
          }
        }
      }
      // A zero truth count drawn as a zero outlier looks unchanged; none here.
      EXPECT_LE(changed, count);
      EXPECT_GE(changed, count - 1);
    }
  }
}

TEST(Distort, BiasDirections) {
  const Course truth = sample_truth();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Scenario over;
    over.kind = ScenarioKind::kOverestimate;
    over.noise_ratio = 0.0;
    Scenario under = over;
    under.kind = ScenarioKind::kUnderestimate;
    const auto a = distort(truth, over, seed).noisy.observed_counts();
    const auto b = distort(truth, under, seed).noisy.observed_counts();
    const auto t = truth.observed_counts();
    for (std::size_t i = 0; i < t.size(); ++i) {
      EXPECT_GE(a[i].boarding, t[i].boarding + 1);
      EXPECT_LE(a[i].boarding, t[i].boarding + 5);
      EXPECT_LE(b[i].alighting, t[i].alighting);
      EXPECT_GE(b[i].alighting, std::max(0, t[i].alighting - 5));
    }
  }
}

TEST(Distort, SlopePullsTowardsMean) {
  Scenario s;
  s.kind = ScenarioKind::kSlope;
  s.noise_ratio = 0.0;
  // Nonzero counts 10 and 30: mean 20.
  const Course truth = make_course({10, 30, 0}, {0, 10, 30}, 100);
  const auto out = distort(truth, s, 1).noisy.observed_counts();
  EXPECT_EQ(out[0].boarding, 13);
  EXPECT_EQ(out[1].boarding, 27);
  EXPECT_EQ(out[0].alighting, 6);  // zero counts are overestimated too
  EXPECT_EQ(out[2].boarding, 6);
}

TEST(Distort, TicketingOnlyOnRequest) {
  Scenario s;
  Course truth = sample_truth();
  truth.stops[0].ticketing.boarding = 3;
  EXPECT_FALSE(distort(truth, s, 1).noisy.has_ticketing());
  s.ticketing_from_truth = true;
  const Course noisy = distort(truth, s, 1).noisy;
  for (std::size_t i = 0; i < truth.stops.size(); ++i) {
    EXPECT_EQ(noisy.stops[i].ticketing.boarding, truth.stops[i].observed.boarding);
    EXPECT_EQ(noisy.stops[i].ticketing.alighting, truth.stops[i].observed.alighting);
  }
}

TEST(Distort, GaussianNoiseScale) {
  Scenario s;
  const Course truth = make_course({100, 0}, {0, 100}, 100);
  double sq = 0;
  const int n = 2000;
  for (int seed = 0; seed < n; ++seed) {
    const int v = distort(truth, s, seed).noisy.stops[0].observed.boarding;
    sq += (v - 100.0) * (v - 100.0);
  }
  EXPECT_NEAR(std::sqrt(sq / n), 10.0, 0.6);
}

TEST(ScenarioSuite, ShapeAndDeterminism) {
  const auto truths = synthesize_courses({}, 3);
  ASSERT_EQ(truths.size(), 8u);
  const auto a = scenario_suite(truths, 7);
  const auto b = scenario_suite(truths, 7);
  ASSERT_EQ(a.size(), 5u);
  for (const auto& [kind, pairs] : a) {
    ASSERT_EQ(pairs.size(), 8u);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      EXPECT_EQ(pairs[i].noisy, b.at(kind)[i].noisy);
      EXPECT_EQ(pairs[i].truth, truths[i]);
      EXPECT_EQ(pairs[i].noisy.stop_ids(), truths[i].stop_ids());
      EXPECT_EQ(pairs[i].noisy.capacity, truths[i].capacity);
    }
  }
  EXPECT_TRUE(scenario_suite({}, 7).at(ScenarioKind::kSlope).empty());
  EXPECT_EQ(scenario_suite({}, 7).size(), 5u);
}

TEST(ScenarioSuite, ScenariosAreIndependent) {
  const auto truths = synthesize_courses({}, 4);
  Scenario one;
  Scenario three;
  three.outlier_count = 3;
  const auto a = scenario_suite(truths, 11, one);
  const auto b = scenario_suite(truths, 11, three);
  for (std::size_t i = 0; i < truths.size(); ++i) {
    EXPECT_EQ(a.at(ScenarioKind::kGaussian)[i].noisy, b.at(ScenarioKind::kGaussian)[i].noisy);
  }
  const auto c = scenario_suite(truths, 12, one);
  EXPECT_NE(a.at(ScenarioKind::kGaussian)[0].noisy, c.at(ScenarioKind::kGaussian)[0].noisy);
}

TEST(SynthesizeCourses, ValidFlows) {
  DenoiseConfig cfg;
  SynthOptions o;
  o.courses = 40;
  o.lines = 3;
  const auto truths = synthesize_courses(o, 9);
  ASSERT_EQ(truths.size(), 40u);
  for (const Course& c : truths) {
    EXPECT_FALSE(check_well_formed(c).has_value());
    EXPECT_TRUE(validate_course(c, cfg).all_ok());
    for (std::int64_t occ : compute_occupancy(c.observed_counts()).after_stop) {
      EXPECT_LE(occ, c.capacity);
    }
  }
  EXPECT_EQ(truths[0].stop_ids(), truths[3].stop_ids());
  EXPECT_EQ(synthesize_courses(o, 9), truths);
}

TEST(ParseScenario, Names) {
  for (ScenarioKind k : kAllScenarios) EXPECT_EQ(parse_scenario(to_string(k)), k);
  EXPECT_EQ(parse_scenario("overestimate"), ScenarioKind::kOverestimate);
  EXPECT_FALSE(parse_scenario("bogus"));
}

}  // namespace
}  // namespace apcdn
