/*
 * Copyright 2026 The stforge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "stforge/curriculum.hpp"
#include "stforge/rng.hpp"
#include "support/test_support.hpp"

namespace stforge::curriculum {
namespace {

ProbeStats stats(const std::string& id, std::vector<double> r) { return probe_stats(id, r); }

TEST(ProbeStats, Examples) {
  const auto a = stats("a", {1, 1, 1, 1, 1, 1, 1, 1});
  EXPECT_EQ(a.mu_hat, 1.0);
  EXPECT_EQ(a.sigma2_hat, 0.0);
  EXPECT_EQ(a.K, 8u);
  const auto b = stats("b", {0, 1, 0, 1, 0, 1, 0, 1});
  EXPECT_EQ(b.mu_hat, 0.5);
  EXPECT_EQ(b.sigma2_hat, 0.25);
  const auto c = stats("c", {0.5});
  EXPECT_EQ(c.mu_hat, 0.5);
  EXPECT_EQ(c.sigma2_hat, 0.0);
}

TEST(ProbeStats, Errors) {
  EXPECT_ERROR_KIND(stats("e", {}), "EmptyRewards");
  EXPECT_ERROR_KIND(stats("e", {0.5, 1.5}), "RewardOutOfRange");
  EXPECT_ERROR_KIND(stats("e", {std::nan("")}), "RewardOutOfRange");
}

TEST(ProbeStats, MomentsRecompute) {
  SplitMix64 rng(1);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> r(1 + rng.below(16));
    for (auto& x : r) x = rng.uniform();
    const auto s = probe_stats("x", r);
    long double m = 0;
    for (double x : r) m += x;
    m /= r.size();
    long double v = 0;
    for (double x : r) v += (x - m) * (x - m);
    v /= r.size();
    EXPECT_NEAR(s.mu_hat, static_cast<double>(m), 1e-12);
    EXPECT_NEAR(s.sigma2_hat, static_cast<double>(v), 1e-12);
    EXPECT_GE(s.sigma2_hat, 0.0);
    EXPECT_LE(s.sigma2_hat, 0.25);
  }
}

ProbeStats moments(double mu, double var) {
  ProbeStats s;
  s.query_id = "m";
  s.mu_hat = mu;
  s.sigma2_hat = var;
  return s;
}

TEST(Region, Examples) {
  EXPECT_EQ(classify_region(moments(1, 0), 0.05, 0.05), Region::Trivial);
  EXPECT_EQ(classify_region(moments(0, 0), 0.05, 0.05), Region::Noise);
  EXPECT_EQ(classify_region(moments(0.5, 0.25), 0.05, 0.05), Region::Learnable);
  EXPECT_EQ(to_string(Region::Learnable), "learnable");
}

TEST(Region, GridPartitionMatchesPredicates) {
  for (int i = 0; i <= 100; ++i) {
    for (int j = 0; j <= 50; ++j) {
      const double mu = i / 100.0;
      const double var = j / 200.0;
      const bool trivial = mu >= 0.95 && var <= 0.05;
      const bool noise = mu <= 0.05 && var <= 0.05;
      ASSERT_FALSE(trivial && noise);
      const Region expect = trivial ? Region::Trivial : noise ? Region::Noise : Region::Learnable;
      EXPECT_EQ(classify_region(moments(mu, var), 0.05, 0.05), expect) << mu << " " << var;
    }
  }
}

TEST(Learnability, ScoresAndNormalization) {
  const std::vector<ProbeStats> batch{moments(0.5, 0.25), moments(1, 0), moments(0.25, 0.1)};
  const auto r = learnability_scores(batch);
  EXPECT_EQ(r[0].raw_score, 0.125);
  EXPECT_EQ(r[1].raw_score, 0.0);
  EXPECT_EQ(r[0].normalized_score, 1.0);
  EXPECT_EQ(r[1].normalized_score, 0.0);
  EXPECT_DOUBLE_EQ(r[2].normalized_score, 0.025 / 0.125);
  EXPECT_EQ(r[1].region, Region::Trivial);
}

TEST(Learnability, IdenticalBatchIsHalf) {
  const std::vector<ProbeStats> batch(4, moments(0.4, 0.2));
  for (const auto& r : learnability_scores(batch)) EXPECT_EQ(r.normalized_score, 0.5);
  EXPECT_ERROR_KIND(learnability_scores(std::vector<ProbeStats>{}), "EmptyBatch");
}

std::vector<LearnabilityRecord> learnable(std::vector<double> raw) {
  std::vector<LearnabilityRecord> out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    LearnabilityRecord r;
    r.query_id = "q" + std::to_string(i);
    r.raw_score = raw[i];
    out.push_back(r);
  }
  return out;
}

TEST(Budget, Examples) {
  EXPECT_EQ(allocate_budget(learnable({0.1}), 8)[0].budget, 8);
  const auto four = allocate_budget(learnable({0.01, 0.2, 0.05, 0.1}), 8);
  std::vector<int> budgets;
  std::vector<std::string> ids;
  for (const auto& r : four) {
    budgets.push_back(r.budget);
    ids.push_back(r.query_id);
  }
  EXPECT_EQ(budgets, (std::vector<int>{8, 6, 4, 2}));
  EXPECT_EQ(ids, (std::vector<std::string>{"q1", "q3", "q2", "q0"}));
  auto mixed = learnable({0.0, 0.1});
  mixed[0].region = Region::Trivial;
  for (const auto& r : allocate_budget(mixed, 8)) {
    EXPECT_EQ(r.budget, r.region == Region::Trivial ? 0 : 8);
  }
  EXPECT_ERROR_KIND(allocate_budget(learnable({0.1}), 0), "InvalidConfig");
}

TEST(Budget, LawOverRandomBatches) {
  SplitMix64 rng(5);
  for (int t = 0; t < 300; ++t) {
    std::vector<double> raw(1 + rng.below(40));
    for (auto& x : raw) x = static_cast<double>(rng.below(10)) / 40.0;  // ties on purpose
    const int k_max = 1 + static_cast<int>(rng.below(12));
    const auto out = allocate_budget(learnable(raw), k_max);
    const double n = static_cast<double>(raw.size());
    ASSERT_EQ(out.front().budget, k_max);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const int expect = std::max(1, static_cast<int>(std::ceil(k_max * (n - static_cast<double>(i)) / n - 1e-12)));
      EXPECT_EQ(out[i].budget, expect);
      EXPECT_LE(out[i].budget, k_max);
      if (i > 0) {
        EXPECT_LE(out[i].budget, out[i - 1].budget);
        EXPECT_TRUE(out[i].raw_score < out[i - 1].raw_score ||
                    (out[i].raw_score == out[i - 1].raw_score && out[i - 1].query_id < out[i].query_id));
      }
    }
  }
}

Query q(std::string id, int difficulty, std::string intent = "discovery.along_route_discovery") {
  Query x;
  x.id = std::move(id);
  x.text = "t";
  x.difficulty = difficulty;
  x.annotation = AnnotationVector{std::move(intent), {}, {}, std::nullopt};
  return x;
}

TEST(Histogram, Examples) {
  EXPECT_TRUE(difficulty_histogram(std::vector<Query>{}).empty());
  std::vector<Query> five;
  for (int i = 0; i < 5; ++i) five.push_back(q("q" + std::to_string(i), 3, "X"));
  const auto h = difficulty_histogram(five);
  EXPECT_EQ(h, (DifficultyHistogram{{{"X", 3}, 5}, {{"ALL", 3}, 5}}));
  std::vector<Query> ext{q("a", -1), q("b", 0), q("c", 0)};
  const auto he = difficulty_histogram(ext);
  EXPECT_EQ(he.at({"ALL", -1}), 1u);
  EXPECT_EQ(he.at({"ALL", 0}), 2u);
  EXPECT_EQ(histogram_csv(he),
            "intent,difficulty,count\n"
            "discovery.along_route_discovery,-1,1\n"
            "discovery.along_route_discovery,0,2\n"
            "ALL,-1,1\nALL,0,2\n");
}

TEST(Histogram, MissingFields) {
  std::vector<Query> c{q("a", 1)};
  c[0].difficulty.reset();
  EXPECT_ERROR_KIND(difficulty_histogram(c), "MissingDifficulty");
  std::vector<Query> d{q("a", 1)};
  d[0].annotation.reset();
  EXPECT_ERROR_KIND(difficulty_histogram(d), "MissingAnnotation");
}

std::vector<Query> pool(std::uint64_t seed, std::size_t n) {
  SplitMix64 rng(seed);
  std::vector<Query> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(q("q" + std::to_string(10000 + i), static_cast<int>(rng.below(7)) - 1));
  return out;
}

CurriculumSchedule single(std::map<int, double> w, std::size_t batch, std::size_t batches, std::uint64_t seed = 1) {
  CurriculumSchedule s;
  s.phases.push_back({std::move(w), batch, batches, std::nullopt});
  s.rng_seed = seed;
  return s;
}

TEST(Schedule, SingleBucket) {
  const auto corpus = pool(1, 300);
  std::map<std::string, int> diff;
  for (const auto& x : corpus) diff[x.id] = *x.difficulty;
  for (const auto& b : build_schedule(corpus, single({{1, 1.0}}, 8, 100))) {
    for (const auto& id : b.ids) EXPECT_EQ(diff[id], 1);
  }
}

TEST(Schedule, TwoPhasesAndNoReplacement) {
  const auto corpus = pool(2, 500);
  std::map<std::string, int> diff;
  for (const auto& x : corpus) diff[x.id] = *x.difficulty;
  CurriculumSchedule s;
  s.phases.push_back({{{1, 1.0}, {2, 1.0}}, 16, 4, std::nullopt});
  s.phases.push_back({{{4, 1.0}, {5, 2.0}}, 16, 4, std::nullopt});
  const auto batches = build_schedule(corpus, s);
  std::set<std::pair<std::size_t, std::string>> seen;
  for (const auto& b : batches) {
    for (const auto& id : b.ids) {
      if (b.phase == 0) {
        EXPECT_LE(diff[id], 2);
        EXPECT_GE(diff[id], 1);
      } else {
        EXPECT_GE(diff[id], 4);
      }
      EXPECT_TRUE(seen.insert({b.phase, id}).second) << id;
    }
  }
  EXPECT_EQ(batches.size(), 8u);
  EXPECT_EQ(build_schedule(corpus, s), batches);
  s.rng_seed = 99;
  EXPECT_NE(build_schedule(corpus, s), batches);
}

TEST(Schedule, ZeroWeightBucketContributesNothing) {
  const auto corpus = pool(3, 200);
  std::map<std::string, int> diff;
  for (const auto& x : corpus) diff[x.id] = *x.difficulty;
  for (const auto& b : build_schedule(corpus, single({{2, 0.0}, {3, 1.0}}, 10, 50))) {
    for (const auto& id : b.ids) EXPECT_EQ(diff[id], 3);
  }
}

TEST(Schedule, ExhaustionStopsEarly) {
  std::vector<Query> c{q("a", 1), q("b", 1), q("c", 1)};
  const auto b = build_schedule(c, single({{1, 1.0}}, 2, 5));
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0].ids.size(), 2u);
  EXPECT_EQ(b[1].ids.size(), 1u);
}

TEST(Schedule, FirstDrawFollowsBucketMass) {
  // P(first id from bucket b) = w_b * n_b / sum_c w_c * n_c.
  std::vector<Query> c;
  for (int i = 0; i < 10; ++i) c.push_back(q("a" + std::to_string(i), 1));
  for (int i = 0; i < 30; ++i) c.push_back(q("b" + std::to_string(i), 2));
  const int trials = 20000;
  int from_one = 0;
  for (int t = 0; t < trials; ++t) {
    const auto b = build_schedule(c, single({{1, 3.0}, {2, 1.0}}, 1, 1, static_cast<std::uint64_t>(t)));
    from_one += b[0].ids[0][0] == 'a';
  }
  const double p = 30.0 / 60.0;
  const double sd = std::sqrt(p * (1 - p) / trials);
  EXPECT_NEAR(static_cast<double>(from_one) / trials, p, 5 * sd);
}

TEST(Schedule, Errors) {
  std::vector<Query> c{q("a", 1)};
  EXPECT_ERROR_KIND(build_schedule(c, single({{4, 1.0}}, 1, 1)), "EmptyEligibleSet");
  c[0].difficulty.reset();
  EXPECT_ERROR_KIND(build_schedule(c, single({{1, 1.0}}, 1, 1)), "MissingDifficulty");
  EXPECT_ERROR_KIND(single({{1, 0.0}}, 1, 1).validate(), "InvalidSchedule");
  EXPECT_ERROR_KIND(single({{7, 1.0}}, 1, 1).validate(), "InvalidSchedule");
  EXPECT_ERROR_KIND(single({{1, -1.0}}, 1, 1).validate(), "InvalidSchedule");
  EXPECT_ERROR_KIND(single({{1, 1.0}}, 0, 1).validate(), "InvalidSchedule");
  EXPECT_ERROR_KIND(CurriculumSchedule{}.validate(), "InvalidSchedule");
}

TEST(Schedule, JsonRoundTrip) {
  CurriculumSchedule s;
  s.phases.push_back({{{-1, 0.5}, {3, 2.0}}, 4, 2, std::nullopt});
  s.phases.push_back({{{5, 1.0}}, 8, 1, 7});
  s.rng_seed = 123;
  const auto j = schedule_to_json(s);
  const auto back = schedule_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(schedule_to_json(back).dump(), j.dump());
  EXPECT_ERROR_KIND(schedule_from_json(nlohmann::json::parse(R"({"phases":[]})")), "InvalidSchedule");
}

TEST(Schedule, TinyPresetTakesFraction) {
  const auto corpus = pool(4, 400);
  const auto s = tiny_dataset_preset(corpus.size(), 16, 3);
  const auto batches = build_schedule(corpus, s);
  std::size_t total = 0;
  for (const auto& b : batches) total += b.ids.size();
  EXPECT_EQ(total, 40u);
}

TEST(ProbeLines, ParseAndErrors) {
  const std::vector<std::string> ok{R"({"query_id":"a","rewards":[0,1],"K":2})", R"({"query_id":"b","rewards":[1,1]})"};
  const auto st = parse_probe_lines(ok);
  ASSERT_EQ(st.size(), 2u);
  EXPECT_EQ(st[0].mu_hat, 0.5);
  const std::vector<std::string> k_mismatch{R"({"query_id":"a","rewards":[0,1],"K":3})"};
  EXPECT_ERROR_KIND(parse_probe_lines(k_mismatch), "InconsistentK");
  const std::vector<std::string> k_varies{R"({"query_id":"a","rewards":[0,1]})", R"({"query_id":"b","rewards":[1]})"};
  EXPECT_ERROR_KIND(parse_probe_lines(k_varies), "InconsistentK");
  const std::vector<std::string> bad{R"({"query_id":"a","rewards":"x"})"};
  EXPECT_ERROR_KIND(parse_probe_lines(bad), "MalformedRecord");
}

}  // namespace
}  // namespace stforge::curriculum
