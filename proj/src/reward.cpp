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
#include "stforge/reward.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "stforge/error.hpp"
#include "stforge/text.hpp"

namespace stforge::reward {

namespace {

constexpr double kWeightTolerance = 1e-9;
constexpr double kReportTolerance = 1e-6;

constexpr std::array<Triple, 3> kPresets{{
    {0.6, 0.3, 0.1},
    {0.2, 0.6, 0.2},
    {0.3, 0.3, 0.4},
}};

struct Span {
  std::size_t inner_begin;
  std::size_t inner_end;
};

std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

// First <tag>...</tag> inside hay; nested elements are returned verbatim.
std::optional<std::string_view> element(std::string_view hay, std::string_view tag) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  const auto b = hay.find(open);
  if (b == std::string_view::npos) return std::nullopt;
  const auto e = hay.find(close, b + open.size());
  if (e == std::string_view::npos) return std::nullopt;
  return hay.substr(b + open.size(), e - b - open.size());
}

std::string_view required(std::string_view hay, std::string_view tag) {
  const auto v = element(hay, tag);
  if (!v) fail("MalformedReport", "missing <" + std::string(tag) + "> element");
  return *v;
}

double parse_number(std::string_view raw, std::string_view tag) {
  const auto s = text::trim_ascii(raw);
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (s.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    fail("MalformedReport", "<" + std::string(tag) + "> is not a number: '" + std::string(s) + "'");
  }
  return v;
}

bool parse_flag(std::string_view raw) {
  const auto s = text::ascii_lower(text::trim_ascii(raw));
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail("MalformedReport", "<has_hallucination> must be true or false, got '" + s + "'");
}

void check_weights(const Triple& w, double tol) {
  double sum = 0.0;
  for (const double x : w) {
    if (!std::isfinite(x) || x < 0.0) fail("WeightsNotNormalized", "weights must be finite and nonnegative");
    sum += x;
  }
  if (std::abs(sum - 1.0) > tol) fail("WeightsNotNormalized", "weights sum to " + std::to_string(sum) + ", not 1");
}

double l1(const Triple& a, const Triple& b) {
  return std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) + std::abs(a[2] - b[2]);
}

}  // namespace

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::A_ComplexPlanning: return "A_ComplexPlanning";
    case Scenario::B_InfoRetrieval: return "B_InfoRetrieval";
    case Scenario::C_Consultation: return "C_Consultation";
  }
  return "C_Consultation";
}

Scenario parse_scenario(std::string_view s) {
  if (s == "A" || s == "A_ComplexPlanning") return Scenario::A_ComplexPlanning;
  if (s == "B" || s == "B_InfoRetrieval") return Scenario::B_InfoRetrieval;
  if (s == "C" || s == "C_Consultation") return Scenario::C_Consultation;
  fail("UnknownScenario", "unknown scenario '" + std::string(s) + "'");
}

Triple scenario_weights(Scenario s, const std::optional<Triple>& override_weights) {
  if (!override_weights) return kPresets[static_cast<std::size_t>(s)];
  Triple w = *override_weights;
  double sum = 0.0;
  for (const double x : w) {
    if (!std::isfinite(x) || x < 0.0) fail("WeightsNotNormalized", "override weights must be finite and nonnegative");
    sum += x;
  }
  if (!(sum > 0.0)) fail("WeightsNotNormalized", "override weights are all zero");
  for (double& x : w) x /= sum;
  return w;
}

double aggregate_reward(const Triple& weights, const Triple& ratings, bool hallucination) {
  for (const double s : ratings) {
    if (!(s >= 0.0 && s <= 1.0)) fail("RatingOutOfRange", "rating " + std::to_string(s) + " outside [0, 1]");
  }
  check_weights(weights, kWeightTolerance);
  if (hallucination) return 0.0;
  const double r = weights[0] * ratings[0] + weights[1] * ratings[1] + weights[2] * ratings[2];
  return std::clamp(r, 0.0, 1.0);
}

RewardReport parse_evaluation_report(std::string_view text) {
  const std::size_t opens = count_occurrences(text, "<evaluation_report>");
  if (opens != 1) {
    fail("MalformedReport", opens == 0 ? "no <evaluation_report> element"
                                       : "more than one <evaluation_report> element");
  }
  const auto body = required(text, "evaluation_report");

  RewardReport r;
  const auto halluc = required(body, "hallucination_analysis");
  r.hallucination = parse_flag(required(halluc, "has_hallucination"));

  const auto weight_block = required(body, "weight_analysis");
  const auto weights = required(weight_block, "weights");
  constexpr std::array<std::string_view, 3> kWeightTags{"w_reasoning", "w_integration", "w_presentation"};
  constexpr std::array<std::string_view, 3> kDims{"reasoning", "integration", "presentation"};
  for (std::size_t k = 0; k < 3; ++k) r.weights[k] = parse_number(required(weights, kWeightTags[k]), kWeightTags[k]);
  double sum = 0.0;
  for (const double w : r.weights) {
    if (w < 0.0 || w > 1.0) fail("ValueOutOfRange", "weight " + std::to_string(w) + " outside [0, 1]");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kReportTolerance) {
    fail("InconsistentReport", "weights sum to " + std::to_string(sum));
  }
  for (double& w : r.weights) w /= sum;

  for (std::size_t k = 0; k < 3; ++k) {
    const std::string tag = "dimension_" + std::string(kDims[k]);
    const auto dim = required(body, tag);
    r.ratings[k] = parse_number(required(dim, "rating"), "rating");
    if (r.ratings[k] < 0.0 || r.ratings[k] > 1.0) {
      fail("ValueOutOfRange", tag + " rating " + std::to_string(r.ratings[k]) + " outside [0, 1]");
    }
    if (const auto why = element(dim, "rationale")) r.rationale_fields[std::string(kDims[k])] = std::string(text::trim_ascii(*why));
  }
  if (const auto d = element(halluc, "details")) r.rationale_fields["hallucination"] = std::string(text::trim_ascii(*d));
  if (const auto w = element(weight_block, "rationale")) r.rationale_fields["weights"] = std::string(text::trim_ascii(*w));

  r.final = parse_number(required(body, "final_score"), "final_score");
  if (r.final < 0.0 || r.final > 1.0) fail("ValueOutOfRange", "final_score outside [0, 1]");
  const double recomputed = aggregate_reward(r.weights, r.ratings, r.hallucination);
  if (std::abs(r.final - recomputed) > kReportTolerance) {
    fail("InconsistentReport", "final_score " + std::to_string(r.final) + " but components give " +
                                   std::to_string(recomputed));
  }

  // Scenario from the evaluator's weights: nearest reference triple in L1.
  std::size_t best = 0;
  for (std::size_t s = 1; s < kPresets.size(); ++s) {
    if (l1(r.weights, kPresets[s]) < l1(r.weights, kPresets[best])) best = s;
  }
  r.scenario = static_cast<Scenario>(best);
  return r;
}

Scenario classify_scenario(const AnnotationVector& annotation, const std::optional<Scenario>& external) {
  if (external) return *external;
  const std::string_view id = annotation.primary_intent;
  const std::string_view top = id.substr(0, id.find('.'));
  if (top == "planning_and_decision") return Scenario::A_ComplexPlanning;
  if (top == "dynamic_information" || top == "discovery") return Scenario::B_InfoRetrieval;
  return Scenario::C_Consultation;
}

nlohmann::ordered_json to_json(const ScoredRecord& r) {
  nlohmann::ordered_json j;
  j["query_id"] = r.query_id;
  j["scenario"] = std::string(to_string(r.scenario));
  j["weights"] = {{"w_reas", r.weights[0]}, {"w_info", r.weights[1]}, {"w_pres", r.weights[2]}};
  j["ratings"] = {{"s_reas", r.ratings[0]}, {"s_info", r.ratings[1]}, {"s_pres", r.ratings[2]}};
  j["H"] = r.hallucination;
  j["R"] = r.R;
  return j;
}

}  // namespace stforge::reward
