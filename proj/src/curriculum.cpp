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
#include "stforge/curriculum.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "stforge/error.hpp"
#include "stforge/rng.hpp"

namespace stforge::curriculum {

namespace {

constexpr std::uint64_t kScheduleStream = 0x7363686564ULL;  // "sched"

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < 20; ++i) {
    if (i > 0) out += ", ";
    out += ids[i];
  }
  if (ids.size() > 20) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

bool ranks_before(const LearnabilityRecord& a, const LearnabilityRecord& b) {
  if (a.raw_score != b.raw_score) return a.raw_score > b.raw_score;
  return a.query_id < b.query_id;
}

}  // namespace

std::string_view to_string(Region r) {
  switch (r) {
    case Region::Trivial: return "trivial";
    case Region::Noise: return "noise";
    case Region::Learnable: return "learnable";
  }
  return "learnable";
}

ProbeStats probe_stats(std::string query_id, std::span<const double> rewards) {
  if (rewards.empty()) fail("EmptyRewards", "no probe rewards for '" + query_id + "'");
  for (const double r : rewards) {
    if (!(r >= 0.0 && r <= 1.0)) {
      fail("RewardOutOfRange", "reward " + std::to_string(r) + " for '" + query_id + "' outside [0, 1]");
    }
  }
  ProbeStats s;
  s.query_id = std::move(query_id);
  s.rewards.assign(rewards.begin(), rewards.end());
  s.K = rewards.size();
  const auto k = static_cast<double>(s.K);
  double sum = 0.0;
  for (const double r : rewards) sum += r;
  s.mu_hat = sum / k;
  double ss = 0.0;
  for (const double r : rewards) ss += (r - s.mu_hat) * (r - s.mu_hat);
  s.sigma2_hat = ss / k;
  return s;
}

Region classify_region(const ProbeStats& stats, double eps_mu, double eps_var) {
  if (stats.sigma2_hat <= eps_var) {
    if (stats.mu_hat >= 1.0 - eps_mu) return Region::Trivial;
    if (stats.mu_hat <= eps_mu) return Region::Noise;
  }
  return Region::Learnable;
}

std::vector<LearnabilityRecord> learnability_scores(std::span<const ProbeStats> stats,
                                                    const RegionThresholds& eps) {
  if (stats.empty()) fail("EmptyBatch", "no probe statistics to score");
  std::vector<LearnabilityRecord> out;
  out.reserve(stats.size());
  for (const auto& s : stats) {
    LearnabilityRecord r;
    r.query_id = s.query_id;
    r.raw_score = s.sigma2_hat * s.mu_hat;
    r.region = classify_region(s, eps.eps_mu, eps.eps_var);
    out.push_back(std::move(r));
  }
  const auto [lo, hi] = std::minmax_element(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.raw_score < b.raw_score;
  });
  const double min = lo->raw_score;
  const double range = hi->raw_score - min;
  for (auto& r : out) r.normalized_score = range > 0.0 ? (r.raw_score - min) / range : 0.5;
  return out;
}

std::vector<LearnabilityRecord> allocate_budget(std::vector<LearnabilityRecord> records, int k_max) {
  if (k_max < 1) fail("InvalidConfig", "K_max must be >= 1");
  std::sort(records.begin(), records.end(), ranks_before);
  const auto n = static_cast<std::int64_t>(std::count_if(
      records.begin(), records.end(), [](const auto& r) { return r.region == Region::Learnable; }));
  std::int64_t rank = 0;
  for (auto& r : records) {
    if (r.region != Region::Learnable) {
      r.budget = 0;
      continue;
    }
    // ceil(k_max * (n - rank) / n) in exact integer arithmetic
    const std::int64_t num = static_cast<std::int64_t>(k_max) * (n - rank);
    r.budget = static_cast<int>(std::max<std::int64_t>(1, (num + n - 1) / n));
    ++rank;
  }
  return records;
}

DifficultyHistogram difficulty_histogram(std::span<const Query> corpus) {
  std::vector<std::string> no_difficulty;
  std::vector<std::string> no_annotation;
  for (const auto& q : corpus) {
    if (!q.difficulty) no_difficulty.push_back(q.id);
    if (!q.annotation) no_annotation.push_back(q.id);
  }
  if (!no_difficulty.empty()) fail("MissingDifficulty", join_ids(no_difficulty));
  if (!no_annotation.empty()) fail("MissingAnnotation", join_ids(no_annotation));
  DifficultyHistogram h;
  for (const auto& q : corpus) {
    ++h[{q.annotation->primary_intent, *q.difficulty}];
    ++h[{std::string(kAllIntents), *q.difficulty}];
  }
  return h;
}

std::string histogram_csv(const DifficultyHistogram& h) {
  std::string out = "intent,difficulty,count\n";
  std::string all_rows;
  for (const auto& [key, count] : h) {
    std::string row = key.first + "," + std::to_string(key.second) + "," + std::to_string(count) + "\n";
    (key.first == kAllIntents ? all_rows : out) += row;
  }
  return out + all_rows;
}

void CurriculumSchedule::validate() const {
  if (phases.empty()) fail("InvalidSchedule", "schedule has no phases");
  for (std::size_t p = 0; p < phases.size(); ++p) {
    const auto& ph = phases[p];
    const std::string where = "phase " + std::to_string(p);
    if (ph.batch_size < 1 || ph.num_batches < 1) fail("InvalidSchedule", where + ": batch_size and num_batches must be >= 1");
    bool any_positive = false;
    for (const auto& [score, w] : ph.difficulty_weights) {
      if (score < kMinDifficulty || score > kMaxDifficulty) {
        fail("InvalidSchedule", where + ": difficulty " + std::to_string(score) + " outside -1..5");
      }
      if (!(w >= 0.0) || !std::isfinite(w)) fail("InvalidSchedule", where + ": weights must be finite and nonnegative");
      any_positive = any_positive || w > 0.0;
    }
    if (!any_positive) fail("InvalidSchedule", where + ": needs at least one positive weight");
  }
}

CurriculumSchedule schedule_from_json(const nlohmann::json& j) {
  CurriculumSchedule s;
  try {
    s.rng_seed = j.value("rng_seed", std::uint64_t{0});
    for (const auto& pj : j.at("phases")) {
      SchedulePhase ph;
      for (const auto& [k, v] : pj.at("difficulty_weights").items()) {
        std::size_t used = 0;
        const int score = std::stoi(k, &used);
        if (used != k.size()) fail("InvalidSchedule", "difficulty key '" + k + "' is not an integer");
        ph.difficulty_weights[score] = v.get<double>();
      }
      ph.batch_size = pj.at("batch_size").get<std::size_t>();
      ph.num_batches = pj.at("num_batches").get<std::size_t>();
      if (pj.contains("max_items")) ph.max_items = pj.at("max_items").get<std::size_t>();
      s.phases.push_back(std::move(ph));
    }
  } catch (const nlohmann::json::exception& e) {
    fail("InvalidSchedule", e.what());
  } catch (const std::logic_error& e) {
    fail("InvalidSchedule", e.what());
  }
  s.validate();
  return s;
}

nlohmann::ordered_json schedule_to_json(const CurriculumSchedule& s) {
  nlohmann::ordered_json j;
  j["rng_seed"] = s.rng_seed;
  j["phases"] = nlohmann::ordered_json::array();
  for (const auto& ph : s.phases) {
    nlohmann::ordered_json pj;
    nlohmann::ordered_json w = nlohmann::ordered_json::object();
    for (const auto& [score, weight] : ph.difficulty_weights) w[std::to_string(score)] = weight;
    pj["difficulty_weights"] = w;
    pj["batch_size"] = ph.batch_size;
    pj["num_batches"] = ph.num_batches;
    if (ph.max_items) pj["max_items"] = *ph.max_items;
    j["phases"].push_back(std::move(pj));
  }
  return j;
}

CurriculumSchedule tiny_dataset_preset(std::size_t pool_size, std::size_t batch_size,
                                       std::uint64_t seed, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) fail("InvalidSchedule", "fraction must lie in (0, 1]");
  if (batch_size < 1) fail("InvalidSchedule", "batch_size must be >= 1");
  const auto target = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(pool_size))));
  SchedulePhase ph;
  for (int d = kMinDifficulty; d <= kMaxDifficulty; ++d) ph.difficulty_weights[d] = 1.0;
  ph.batch_size = batch_size;
  ph.num_batches = (target + batch_size - 1) / batch_size;
  ph.max_items = target;
  return {{ph}, seed};
}

std::vector<Batch> build_schedule(std::span<const Query> corpus, const CurriculumSchedule& schedule) {
  schedule.validate();
  constexpr std::size_t kBuckets = kMaxDifficulty - kMinDifficulty + 1;
  std::array<std::vector<std::string>, kBuckets> by_score;
  std::vector<std::string> missing;
  for (const auto& q : corpus) {
    if (!q.difficulty) {
      missing.push_back(q.id);
      continue;
    }
    by_score[static_cast<std::size_t>(*q.difficulty - kMinDifficulty)].push_back(q.id);
  }
  if (!missing.empty()) fail("MissingDifficulty", join_ids(missing));
  for (auto& ids : by_score) std::sort(ids.begin(), ids.end());

  std::vector<Batch> out;
  for (std::size_t p = 0; p < schedule.phases.size(); ++p) {
    const auto& ph = schedule.phases[p];
    std::array<std::vector<std::string>, kBuckets> pool;
    std::array<double, kBuckets> weight{};
    std::size_t eligible = 0;
    for (std::size_t b = 0; b < kBuckets; ++b) {
      const auto it = ph.difficulty_weights.find(static_cast<int>(b) + kMinDifficulty);
      weight[b] = it == ph.difficulty_weights.end() ? 0.0 : it->second;
      if (weight[b] > 0.0) {
        pool[b] = by_score[b];
        eligible += pool[b].size();
      }
    }
    if (eligible == 0) fail("EmptyEligibleSet", "phase " + std::to_string(p) + " has no eligible queries");

    SplitMix64 rng(stream_seed(schedule.rng_seed, kScheduleStream, p));
    std::size_t budget = ph.max_items.value_or(eligible);
    for (std::size_t bi = 0; bi < ph.num_batches && eligible > 0 && budget > 0; ++bi) {
      Batch batch{p, bi, {}};
      while (batch.ids.size() < ph.batch_size && eligible > 0 && budget > 0) {
        double total = 0.0;
        for (std::size_t b = 0; b < kBuckets; ++b) total += weight[b] * static_cast<double>(pool[b].size());
        const double target = rng.uniform() * total;
        double acc = 0.0;
        std::size_t pick = kBuckets;
        for (std::size_t b = 0; b < kBuckets; ++b) {
          if (pool[b].empty() || weight[b] <= 0.0) continue;
          pick = b;  // last non-empty bucket absorbs rounding at the top end
          acc += weight[b] * static_cast<double>(pool[b].size());
          if (target < acc) break;
        }
        auto& ids = pool[pick];
        const auto j = static_cast<std::size_t>(rng.below(ids.size()));
        batch.ids.push_back(std::move(ids[j]));
        ids[j] = std::move(ids.back());
        ids.pop_back();
        --eligible;
        --budget;
      }
      out.push_back(std::move(batch));
    }
  }
  return out;
}

std::string batches_jsonl(std::span<const Batch> batches) {
  std::string out;
  for (const auto& b : batches) {
    nlohmann::ordered_json j;
    j["phase"] = b.phase;
    j["batch"] = b.index;
    j["ids"] = b.ids;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<ProbeStats> parse_probe_lines(std::span<const std::string> lines) {
  std::vector<ProbeStats> out;
  std::optional<std::size_t> k;
  for (const auto& line : lines) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail("MalformedRecord", std::string("invalid probe JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("query_id") || !j["query_id"].is_string() ||
        !j.contains("rewards") || !j["rewards"].is_array()) {
      fail("MalformedRecord", "probe line needs string query_id and rewards array");
    }
    std::vector<double> rewards;
    for (const auto& r : j["rewards"]) {
      if (!r.is_number()) fail("MalformedRecord", "non-numeric reward");
      rewards.push_back(r.get<double>());
    }
    const std::string id = j["query_id"].get<std::string>();
    std::size_t line_k = rewards.size();
    if (j.contains("K")) {
      if (!j["K"].is_number_unsigned() || j["K"].get<std::size_t>() != rewards.size()) {
        fail("InconsistentK", "K field of '" + id + "' does not match its reward count");
      }
      line_k = j["K"].get<std::size_t>();
    }
    if (k && *k != line_k) {
      fail("InconsistentK", "'" + id + "' has K=" + std::to_string(line_k) + ", expected " + std::to_string(*k));
    }
    k = line_k;
    out.push_back(probe_stats(id, rewards));
  }
  return out;
}

std::string records_jsonl(std::span<const LearnabilityRecord> records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["query_id"] = r.query_id;
    j["raw_score"] = r.raw_score;
    j["normalized_score"] = r.normalized_score;
    j["region"] = std::string(to_string(r.region));
    j["budget"] = r.budget;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace stforge::curriculum
