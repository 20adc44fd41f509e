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
#include "stforge/sandbox/schema.hpp"

#include <set>

#include "stforge/error.hpp"
#include "stforge/sandbox/world.hpp"

namespace stforge::sandbox {

namespace {

template <std::size_t N>
std::vector<std::string> values_of(const std::array<std::string_view, N>& xs) {
  return {xs.begin(), xs.end()};
}

ParamSpec str(std::string name, bool required, std::string description, bool ci = true) {
  ParamSpec p;
  p.name = std::move(name);
  p.kind = ParamKind::String;
  p.required = required;
  p.case_insensitive = ci;
  p.description = std::move(description);
  return p;
}

ParamSpec enumeration(std::string name, std::vector<std::string> values, std::optional<std::string> def,
                      std::string description) {
  ParamSpec p;
  p.name = std::move(name);
  p.kind = ParamKind::Enum;
  p.enum_values = std::move(values);
  p.case_insensitive = true;
  p.required = !def.has_value();
  if (def) p.default_value = *def;
  p.description = std::move(description);
  return p;
}

ParamSpec optional_enum(std::string name, std::vector<std::string> values, std::string description) {
  auto p = enumeration(std::move(name), std::move(values), std::nullopt, std::move(description));
  p.required = false;
  return p;
}

ParamSpec integer(std::string name, std::optional<std::int64_t> def, double min, std::optional<double> max,
                  std::string description) {
  ParamSpec p;
  p.name = std::move(name);
  p.kind = ParamKind::Integer;
  p.required = false;
  if (def) p.default_value = *def;
  p.min = min;
  p.max = max;
  p.description = std::move(description);
  return p;
}

ParamSpec number(std::string name, double def, double min, double max, std::string description) {
  ParamSpec p;
  p.name = std::move(name);
  p.kind = ParamKind::Number;
  p.default_value = def;
  p.min = min;
  p.max = max;
  p.description = std::move(description);
  return p;
}

ParamSpec boolean(std::string name, bool def, std::string description) {
  ParamSpec p;
  p.name = std::move(name);
  p.kind = ParamKind::Boolean;
  p.default_value = def;
  p.description = std::move(description);
  return p;
}

ParamSpec list(std::string name, ParamKind item, bool required, std::size_t min_items, std::size_t max_items,
               std::string description) {
  ParamSpec p;
  p.name = std::move(name);
  p.kind = ParamKind::List;
  p.item_kind = item;
  p.required = required;
  p.min_items = min_items;
  p.max_items = max_items;
  p.case_insensitive = item != ParamKind::Number;
  p.description = std::move(description);
  return p;
}

const std::string kLocationHelp = "\"lat,lon\", POI id, POI name, district or city name";

}  // namespace

std::string_view to_string(Category c) {
  switch (c) {
    case Category::MapNavigation: return "MapNavigation";
    case Category::Travel: return "Travel";
    case Category::Weather: return "Weather";
    case Category::Information: return "Information";
  }
  return "Information";
}

std::string_view to_string(ParamKind k) {
  switch (k) {
    case ParamKind::String: return "string";
    case ParamKind::Number: return "number";
    case ParamKind::Integer: return "integer";
    case ParamKind::Boolean: return "boolean";
    case ParamKind::Enum: return "enum";
    case ParamKind::List: return "list";
  }
  return "string";
}

const ParamSpec* ToolSchema::find(std::string_view param) const {
  for (const auto& p : params) {
    if (p.name == param) return &p;
  }
  return nullptr;
}

nlohmann::ordered_json ToolSchema::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["category"] = std::string(to_string(category));
  j["description"] = description;
  j["params"] = nlohmann::ordered_json::array();
  for (const auto& p : params) {
    nlohmann::ordered_json pj;
    pj["name"] = p.name;
    pj["kind"] = std::string(to_string(p.kind));
    if (p.kind == ParamKind::List) pj["item_kind"] = std::string(to_string(p.item_kind));
    pj["required"] = p.required;
    pj["case_insensitive"] = p.case_insensitive;
    if (!p.enum_values.empty()) pj["enum_values"] = p.enum_values;
    if (p.default_value) pj["default"] = *p.default_value;
    if (p.min) pj["min"] = *p.min;
    if (p.max) pj["max"] = *p.max;
    if (p.min_items) pj["min_items"] = *p.min_items;
    if (p.max_items) pj["max_items"] = *p.max_items;
    pj["description"] = p.description;
    j["params"].push_back(std::move(pj));
  }
  return j;
}

void Registry::add(ToolSchema schema) {
  if (index_.contains(schema.name)) fail("DuplicateTool", "tool '" + schema.name + "' registered twice");
  std::set<std::string> names;
  for (const auto& p : schema.params) {
    if (!names.insert(p.name).second) fail("InvalidSchema", schema.name + ": duplicate param '" + p.name + "'");
    const bool enum_items = p.kind == ParamKind::Enum || (p.kind == ParamKind::List && p.item_kind == ParamKind::Enum);
    if (enum_items && p.enum_values.empty()) fail("InvalidSchema", schema.name + "." + p.name + ": empty enum");
    if (p.required && p.default_value) fail("InvalidSchema", schema.name + "." + p.name + ": required with default");
  }
  index_.emplace(schema.name, tools_.size());
  tools_.push_back(std::move(schema));
}

const ToolSchema* Registry::find(std::string_view name) const {
  const auto it = index_.find(name);
  return it == index_.end() ? nullptr : &tools_[it->second];
}

Registry Registry::standard() {
  const auto categories = values_of(kPoiCategories);
  const auto modes = values_of(kTransportModes);
  Registry r;

  auto top_k = [](std::int64_t def, double max) {
    return integer("top_k", def, 1, max, "maximum number of results");
  };

  auto center = list("center", ParamKind::Number, false, 2, 2, "[lat, lon] search center");
  r.add({"map_search_places",
         Category::MapNavigation,
         {str("query", true, "keyword matched against POI names and categories"),
          str("region", false, "district name filter"),
          optional_enum("category", categories, "POI category filter"),
          center,
          number("radius", 3000, 1, 50000, "search radius in meters around center"),
          enumeration("sort_by", {"distance", "rating", "price"}, "distance",
                      "result order; distance falls back to rating without a center"),
          top_k(10, 50),
          boolean("open_now", false, "only POIs open at the world clock")},
         "Searches points of interest by keyword, category, region and radius."});

  auto intermediates = list("intermediates", ParamKind::String, false, 0, 10, "waypoints visited in order");
  intermediates.default_value = nlohmann::json::array();
  auto mode_list = list("modes", ParamKind::Enum, false, 1, modes.size(), "transport modes");
  mode_list.enum_values = modes;
  mode_list.default_value = nlohmann::json::array({"driving"});
  r.add({"map_compute_routes",
         Category::MapNavigation,
         {str("origin", true, kLocationHelp), str("destination", true, kLocationHelp), intermediates, mode_list,
          boolean("avoid_tolls", false, "skip toll roads on driving routes")},
         "Plans routes for up to six transport modes with distance, duration, tolls and traffic lights."});

  r.add({"map_search_along_route",
         Category::MapNavigation,
         {str("origin", true, kLocationHelp), str("destination", true, kLocationHelp),
          str("query", true, "keyword matched against POI names and categories"),
          optional_enum("category", categories, "POI category filter"),
          enumeration("mode", modes, "driving", "transport mode of the base route"),
          number("corridor_width", 1000, 1, 20000, "buffer around the route in meters"), top_k(10, 50)},
         "Finds POIs inside a buffer zone along a planned route."});

  r.add({"map_search_central_places",
         Category::MapNavigation,
         {list("origins", ParamKind::String, true, 1, 10, "starting points of every party"),
          str("query", false, "keyword matched against POI names and categories"),
          optional_enum("category", categories, "POI category filter"),
          enumeration("strategy", {"balanced", "minimize_max", "minimize_total"}, "balanced",
                      "centrality objective"),
          top_k(5, 50)},
         "Ranks meeting places by centrality with respect to several origins."});

  r.add({"map_search_ranking_list",
         Category::MapNavigation,
         {enumeration("category", categories, std::nullopt, "POI category"),
          str("region", false, "district name filter"), top_k(10, 50)},
         "Curated ranking list of top-rated POIs of a category."});

  r.add({"travel_search_flights",
         Category::Travel,
         {str("origin", true, "departure city"), str("destination", true, "arrival city"),
          str("date", true, "first travel date, YYYY-MM-DD", false),
          integer("days", 1, 1, 7, "number of consecutive days to compare")},
         "Flight availability and fares over one or more days."});

  r.add({"travel_search_trains",
         Category::Travel,
         {str("origin", true, "departure city"), str("destination", true, "arrival city"),
          str("date", true, "travel date, YYYY-MM-DD", false),
          enumeration("train_type", {"any", "high_speed", "regular"}, "any", "train class filter")},
         "Train and high-speed rail schedules."});

  r.add({"weather_current_conditions",
         Category::Weather,
         {str("location", true, kLocationHelp)},
         "Current weather conditions including air quality."});

  r.add({"weather_forecast_days",
         Category::Weather,
         {str("location", true, kLocationHelp),
          integer("days", 3, 1, std::nullopt, "forecast length in days, at most 5")},
         "Daily forecast for up to 5 days."});

  r.add({"web_search",
         Category::Information,
         {str("query", true, "search keywords"), top_k(5, 20)},
         "Open-domain web search over the sandbox document set."});
  return r;
}

}  // namespace stforge::sandbox
