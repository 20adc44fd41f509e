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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stforge/sandbox/world.hpp"

namespace stforge::sandbox {

struct ToolOutput {
  std::string text;              // rendered summary, never empty
  nlohmann::ordered_json data;   // structured payload
};

/// Runs a tool against the world. params must already be normalized.
/// Errors: UnknownTool, UnknownLocation, NoRouteFound,
/// ForecastHorizonExceeded, InvalidDate, ValueOutOfRange.
ToolOutput run_tool(const SyntheticWorld& world, std::string_view tool, const nlohmann::json& params);

/// Every whitespace-separated token of query occurs in the POI name or
/// category (underscores read as spaces). Query must already be lowercase.
bool matches_query(const Poi& poi, std::string_view query);

enum class CentralStrategy { Balanced, MinimizeMax, MinimizeTotal };
CentralStrategy parse_strategy(std::string_view s);

/// balanced = 0.5 * max + 0.5 * mean; the others are max and sum.
double central_objective(CentralStrategy s, std::span<const double> distances_m);

inline constexpr double kMaxWalkingKm = 100.0;
inline constexpr double kMaxCyclingKm = 300.0;
inline constexpr double kMaxTransitKm = 200.0;

}  // namespace stforge::sandbox
