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

#include <string>

#include <nlohmann/json.hpp>

#include "stforge/sandbox/schema.hpp"

namespace stforge::sandbox {

struct NormalizedParams {
  nlohmann::json values;   // object of canonical typed values, sorted keys
  std::string canonical;   // compact byte rendering of values
};

/// Drops unknown keys, fills defaults, canonicalizes strings and numbers and
/// renders a compact map with byte-sorted keys. A null value counts as absent.
/// Errors: MissingRequiredParam, TypeMismatch, EnumViolation, ValueOutOfRange.
NormalizedParams normalize_params(const ToolSchema& schema, const nlohmann::json& raw);

/// Shortest round-trip decimal; integral values print without a fraction and
/// negative zero prints as 0.
std::string render_number(double v);

/// Canonical compact JSON: object keys in byte order, numbers via
/// render_number, strings with minimal escaping.
std::string canonical_json(const nlohmann::json& v);

}  // namespace stforge::sandbox
