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

// Rubric reward: scenario weights, three dimension ratings and the
// hallucination veto, plus a parser for evaluator XML reports.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "stforge/corpus.hpp"

namespace stforge::reward {

enum class Scenario { A_ComplexPlanning, B_InfoRetrieval, C_Consultation };

std::string_view to_string(Scenario s);
/// Accepts the full tag or its letter. Errors: UnknownScenario.
Scenario parse_scenario(std::string_view s);

/// Order: reasoning, information integration, presentation.
using Triple = std::array<double, 3>;

/// Reference weights per scenario; an override is renormalized to sum 1.
/// Errors: WeightsNotNormalized (negative, non-finite or all-zero override).
Triple scenario_weights(Scenario s, const std::optional<Triple>& override_weights = std::nullopt);

/// R = (1 - H) * sum(w_k * s_k), clamped to [0, 1].
/// Errors: RatingOutOfRange, WeightsNotNormalized.
double aggregate_reward(const Triple& weights, const Triple& ratings, bool hallucination);

struct RewardReport {
  Scenario scenario = Scenario::C_Consultation;
  Triple weights{};
  Triple ratings{};
  bool hallucination = false;
  double final = 0.0;
  std::map<std::string, std::string> rationale_fields;
};

/// Errors: MalformedReport, InconsistentReport, ValueOutOfRange.
RewardReport parse_evaluation_report(std::string_view text);

/// Taxonomy fallback from the level-1 prefix of the primary intent; an
/// external scenario always wins.
Scenario classify_scenario(const AnnotationVector& annotation,
                           const std::optional<Scenario>& external = std::nullopt);

struct ScoredRecord {
  std::string query_id;
  Scenario scenario = Scenario::C_Consultation;
  Triple weights{};
  Triple ratings{};
  bool hallucination = false;
  double R = 0.0;
};

nlohmann::ordered_json to_json(const ScoredRecord& r);

}  // namespace stforge::reward
