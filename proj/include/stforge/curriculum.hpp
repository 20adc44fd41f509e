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
#pragma once

// Difficulty stratification plus the capability-aware curriculum statistics:
// probe moments, region filtration, learnability scoring and budget allocation.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "stforge/corpus.hpp"

namespace stforge::curriculum {

struct ProbeStats {
  std::string query_id;
  std::vector<double> rewards;
  double mu_hat = 0.0;
  double sigma2_hat = 0.0;  // population variance
  std::size_t K = 0;
};

enum class Region { Trivial, Noise, Learnable };
std::string_view to_string(Region r);

struct LearnabilityRecord {
  std::string query_id;
  double raw_score = 0.0;          // sigma2_hat * mu_hat
  double normalized_score = 0.0;   // min-max over the batch
  Region region = Region::Learnable;
  int budget = 0;                  // 0 outside the Learnable region
};

struct RegionThresholds {
  double eps_mu = 0.05;
  double eps_var = 0.05;
};

inline constexpr int kDefaultKMax = 8;

/// Errors: EmptyRewards, RewardOutOfRange.
ProbeStats probe_stats(std::string query_id, std::span<const double> rewards);

Region classify_region(const ProbeStats& stats, double eps_mu, double eps_var);

/// Errors: EmptyBatch.
std::vector<LearnabilityRecord> learnability_scores(std::span<const ProbeStats> stats,
                                                    const RegionThresholds& eps = {});

/// Ranks by raw score (descending, ties by id) and gives the i-th of n
/// Learnable records max(1, ceil(k_max * (n - i) / n)) samples.
std::vector<LearnabilityRecord> allocate_budget(std::vector<LearnabilityRecord> records, int k_max);

inline constexpr std::string_view kAllIntents = "ALL";

/// (primary intent, difficulty) -> count, plus ("ALL", difficulty) rows.
using DifficultyHistogram = std::map<std::pair<std::string, int>, std::size_t>;

/// Errors: MissingDifficulty, MissingAnnotation (each lists offending ids).
DifficultyHistogram difficulty_histogram(std::span<const Query> corpus);

/// CSV with header "intent,difficulty,count"; ALL rows last.
std::string histogram_csv(const DifficultyHistogram& h);

struct SchedulePhase {
  std::map<int, double> difficulty_weights;
  std::size_t batch_size = 1;
  std::size_t num_batches = 1;
  std::optional<std::size_t> max_items;  // cap on ids drawn in this phase
};

struct CurriculumSchedule {
  std::vector<SchedulePhase> phases;
  std::uint64_t rng_seed = 0;

  /// Throws Error("InvalidSchedule").
  void validate() const;
};

CurriculumSchedule schedule_from_json(const nlohmann::json& j);
nlohmann::ordered_json schedule_to_json(const CurriculumSchedule& s);

/// Warm-up preset: a uniform random sample of `fraction` of the pool over
/// every difficulty bucket.
CurriculumSchedule tiny_dataset_preset(std::size_t pool_size, std::size_t batch_size,
                                       std::uint64_t seed, double fraction = 0.1);

struct Batch {
  std::size_t phase = 0;
  std::size_t index = 0;
  std::vector<std::string> ids;
  bool operator==(const Batch&) const = default;
};

/// Weighted sampling without replacement inside each phase; a query's weight
/// is the weight of its difficulty bucket. Errors: EmptyEligibleSet,
/// MissingDifficulty.
std::vector<Batch> build_schedule(std::span<const Query> corpus, const CurriculumSchedule& schedule);

std::string batches_jsonl(std::span<const Batch> batches);

/// Probe input lines {query_id, rewards[, K]}. Errors: MalformedRecord,
/// InconsistentK, plus probe_stats errors.
std::vector<ProbeStats> parse_probe_lines(std::span<const std::string> lines);

std::string records_jsonl(std::span<const LearnabilityRecord> records);

}  // namespace stforge::curriculum
