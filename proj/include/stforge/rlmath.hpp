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

// Objective values for masked SFT and group-relative policy optimization over
// supplied per-token log-probabilities. No autodiff here.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stforge/corpus.hpp"

namespace stforge::rlmath {

struct TokenLogProbs {
  std::vector<double> logp_policy;
  std::optional<std::vector<double>> logp_old;
  std::optional<std::vector<double>> logp_ref;
  std::vector<std::uint8_t> mask;  // 1 = contributes to the loss

  std::size_t size() const noexcept { return logp_policy.size(); }
  /// Errors: ChannelLengthMismatch, InvalidLogProb, EmptyTrajectory.
  void validate() const;
};

/// Concatenates step tokens; observation steps (masked) get mask 0. A channel
/// must be present on every token or on none. Errors: ChannelLengthMismatch,
/// EmptyTrajectory.
TokenLogProbs from_trajectory(const Trajectory& t);

struct GroupMember {
  TokenLogProbs trajectory;
  double reward = 0.0;
};

struct GroupRollout {
  std::string query_id;
  std::vector<GroupMember> members;
  std::size_t G() const noexcept { return members.size(); }
};

enum class RatioMode { TokenGrpo, SequenceGspo };
std::string_view to_string(RatioMode m);
/// Errors: InvalidConfig.
RatioMode parse_ratio_mode(std::string_view s);

struct RLConfig {
  double clip_eps = 0.2;
  double kl_beta = 0.0;
  double adv_delta = 1e-8;
  RatioMode ratio_mode = RatioMode::TokenGrpo;
  bool mask_gspo = false;  // extension: restrict the sequence ratio to unmasked tokens

  /// Errors: InvalidConfig.
  void validate() const;
};

/// Order-fixed pairwise summation.
double pairwise_sum(std::span<const double> xs);

/// Mean NLL over unmasked tokens. Errors: AllMasked.
double sft_masked_loss(const TokenLogProbs& t);

/// (r_i - mean) / (std + delta), population std. Errors: GroupTooSmall.
std::vector<double> group_advantages(std::span<const double> rewards, double delta);

/// exp(logp_policy - logp_old). Errors: MissingOldPolicy.
std::vector<double> token_ratios(const TokenLogProbs& t);

/// Geometric mean of token ratios over every token, or only unmasked tokens
/// when masked_only is set. Errors: MissingOldPolicy, AllMasked.
double gspo_sequence_ratio(const TokenLogProbs& t, bool masked_only = false);

double clipped_surrogate(double ratio, double advantage, double eps);

/// True when the clipped branch is the one selected by the min.
bool clip_binds(double ratio, double advantage, double eps);

/// k3 estimator averaged over unmasked tokens. Errors: MissingRefPolicy, AllMasked.
double kl_term(const TokenLogProbs& t);

struct ObjectiveReport {
  RatioMode mode = RatioMode::TokenGrpo;
  std::size_t G = 0;
  double objective = 0.0;
  std::optional<double> mean_kl;  // absent when no reference channel
  double clip_fraction = 0.0;
  std::size_t clip_evaluations = 0;
  std::size_t clip_hits = 0;
};

/// (1/G) sum_i [surrogate_i - beta * kl_i]. Errors: GroupTooSmall,
/// MissingOldPolicy, MissingRefPolicy (when beta > 0).
ObjectiveReport grpo_objective(const GroupRollout& group, const RLConfig& cfg);

/// Mean over groups; every group must share G. Errors: InconsistentGroupSize,
/// EmptyBatch, plus grpo_objective errors.
ObjectiveReport evaluate_batch(std::span<const GroupRollout> groups, const RLConfig& cfg);

/// Groups trajectories by query_id (first-appearance order) and pairs the
/// i-th trajectory with the i-th reward of that query.
/// Errors: ChannelLengthMismatch, MissingRewards.
std::vector<GroupRollout> join_groups(std::span<const Trajectory> trajectories,
                                      std::span<const std::string> reward_lines);

nlohmann::ordered_json to_json(const ObjectiveReport& r);

}  // namespace stforge::rlmath
