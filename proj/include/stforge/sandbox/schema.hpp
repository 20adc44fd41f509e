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

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace stforge::sandbox {

enum class Category { MapNavigation, Travel, Weather, Information };
std::string_view to_string(Category c);

enum class ParamKind { String, Number, Integer, Boolean, Enum, List };
std::string_view to_string(ParamKind k);

struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::String;
  bool required = false;
  std::vector<std::string> enum_values;  // Enum, or List with item_kind Enum
  bool case_insensitive = false;
  std::optional<nlohmann::json> default_value;
  ParamKind item_kind = ParamKind::String;  // List only: String, Number or Enum
  std::optional<double> min;                // numeric bounds (inclusive)
  std::optional<double> max;
  std::optional<std::size_t> min_items;     // List only
  std::optional<std::size_t> max_items;
  std::string description;
};

struct ToolSchema {
  std::string name;
  Category category = Category::Information;
  std::vector<ParamSpec> params;
  std::string description;

  const ParamSpec* find(std::string_view param) const;
  nlohmann::ordered_json to_json() const;
};

class Registry {
 public:
  /// Errors: DuplicateTool, InvalidSchema.
  void add(ToolSchema schema);
  const ToolSchema* find(std::string_view name) const;
  /// Registration order.
  const std::vector<ToolSchema>& tools() const noexcept { return tools_; }

  /// The ten tools of the travel sandbox.
  static Registry standard();

 private:
  std::vector<ToolSchema> tools_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

}  // namespace stforge::sandbox
