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
#include "stforge/sandbox/tools.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>

#include "stforge/error.hpp"
#include "stforge/rng.hpp"
#include "stforge/sandbox/normalize.hpp"
#include "stforge/text.hpp"

namespace stforge::sandbox {

namespace {

using Json = nlohmann::json;
using OJson = nlohmann::ordered_json;

std::string str(const Json& p, const char* key) {
  const auto it = p.find(key);
  return it == p.end() ? std::string() : it->get<std::string>();
}

std::int64_t integer(const Json& p, const char* key) { return p.at(key).get<std::int64_t>(); }

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

long meters(double m) { return std::lround(m); }

OJson poi_json(const Poi& p) {
  return {{"id", p.id},         {"name", p.name},         {"category", p.category},
          {"lat", p.pos.lat},   {"lon", p.pos.lon},       {"rating", p.rating},
          {"price", p.price},   {"open_hours", p.open_hours()}, {"region", p.region}};
}

std::string fmt_rating(double r) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f", r);
  return buf;
}

std::string poi_line(std::size_t rank, const Poi& p, const std::string& extra) {
  return std::to_string(rank) + ". " + p.name + " [" + p.id + "] " + p.category + ", rating " + fmt_rating(p.rating) +
         ", avg price " + std::to_string(p.price) + ", open " + p.open_hours() + extra;
}

std::string km_text(double m) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f km", m / 1000.0);
  return buf;
}

std::string duration_text(long seconds) {
  const long minutes = (seconds + 30) / 60;
  return minutes >= 60 ? std::to_string(minutes / 60) + " h " + std::to_string(minutes % 60) + " min"
                       : std::to_string(minutes) + " min";
}

LatLon center_param(const Json& c) {
  const LatLon p{c.at(0).get<double>(), c.at(1).get<double>()};
  if (p.lat < -90.0 || p.lat > 90.0 || p.lon < -180.0 || p.lon > 180.0) {
    fail("ValueOutOfRange", "center must be [lat, lon] within [-90, 90] x [-180, 180]");
  }
  return p;
}

std::vector<const Poi*> filter_pois(const SyntheticWorld& w, const Json& p) {
  const std::string query = str(p, "query");
  const std::string category = str(p, "category");
  const std::string region = str(p, "region");
  std::vector<const Poi*> out;
  for (const auto& poi : w.pois()) {
    if (!category.empty() && poi.category != category) continue;
    if (!region.empty() && poi.region != region) continue;
    if (!matches_query(poi, query)) continue;
    out.push_back(&poi);
  }
  return out;
}

struct Polyline {
  std::vector<LatLon> points;
  std::vector<double> cumulative_m;  // distance from the start to each point
  double length_m() const { return cumulative_m.back(); }
};

Polyline build_polyline(const SyntheticWorld& w, const Json& p) {
  Polyline line;
  line.points.push_back(w.resolve(str(p, "origin")));
  if (const auto it = p.find("intermediates"); it != p.end()) {
    for (const auto& s : *it) line.points.push_back(w.resolve(s.get<std::string>()));
  }
  line.points.push_back(w.resolve(str(p, "destination")));
  line.cumulative_m.push_back(0.0);
  for (std::size_t i = 1; i < line.points.size(); ++i) {
    line.cumulative_m.push_back(line.cumulative_m.back() + haversine_m(line.points[i - 1], line.points[i]));
  }
  return line;
}

std::uint64_t route_key(const Polyline& line, std::string_view mode) {
  std::string key(mode);
  for (const auto& pt : line.points) key += "|" + render_number(pt.lat) + "," + render_number(pt.lon);
  return fnv1a64(key);
}

// Empty when the mode can cover the distance, otherwise the reason it cannot.
std::string infeasible(std::string_view mode, double distance_m) {
  const double km = distance_m / 1000.0;
  if (mode == "walking" && km > kMaxWalkingKm) return "walking routes are limited to 100 km";
  if (mode == "cycling" && km > kMaxCyclingKm) return "cycling routes are limited to 300 km";
  if (mode == "transit" && km > kMaxTransitKm) return "transit covers at most 200 km";
  return {};
}

OJson point_json(LatLon p) { return {{"lat", p.lat}, {"lon", p.lon}}; }

ToolOutput search_places(const SyntheticWorld& w, const Json& p) {
  auto pois = filter_pois(w, p);
  const bool has_center = p.contains("center");
  const LatLon center = has_center ? center_param(p.at("center")) : LatLon{};
  const double radius = p.at("radius").get<double>();
  const bool open_now = p.at("open_now").get<bool>();
  std::map<const Poi*, double> dist;
  std::erase_if(pois, [&](const Poi* poi) {
    if (open_now && !poi->open_at(SyntheticWorld::kNowMinute)) return true;
    if (!has_center) return false;
    const double d = haversine_m(center, poi->pos);
    dist[poi] = d;
    return d > radius;
  });
  const std::string sort_by = str(p, "sort_by");
  std::sort(pois.begin(), pois.end(), [&](const Poi* a, const Poi* b) {
    if (sort_by == "price" && a->price != b->price) return a->price < b->price;
    if (sort_by == "distance" && has_center && dist[a] != dist[b]) return dist[a] < dist[b];
    if ((sort_by == "rating" || (sort_by == "distance" && !has_center)) && a->rating != b->rating) {
      return a->rating > b->rating;
    }
    return a->id < b->id;
  });
  const auto k = static_cast<std::size_t>(integer(p, "top_k"));
  OJson results = OJson::array();
  std::string text = "Found " + std::to_string(pois.size()) + " places matching \"" + str(p, "query") + "\"";
  text += pois.empty() ? "." : ":";
  for (std::size_t i = 0; i < pois.size() && i < k; ++i) {
    auto item = poi_json(*pois[i]);
    std::string extra;
    if (has_center) {
      item["distance_m"] = meters(dist[pois[i]]);
      extra = ", " + std::to_string(meters(dist[pois[i]])) + " m away";
    }
    results.push_back(std::move(item));
    text += "\n" + poi_line(i + 1, *pois[i], extra);
  }
  return {text, {{"total", pois.size()}, {"results", results}}};
}

ToolOutput compute_routes(const SyntheticWorld& w, const Json& p) {
  const auto line = build_polyline(w, p);
  const bool avoid_tolls = p.at("avoid_tolls").get<bool>();
  const double d = line.length_m();
  OJson routes = OJson::array();
  OJson unavailable = OJson::array();
  std::set<std::string> seen;
  std::string text = "Route " + str(p, "origin") + " -> " + str(p, "destination") + ", " + km_text(d) + ":";
  for (const auto& m : p.at("modes")) {
    const auto mode = m.get<std::string>();
    if (!seen.insert(mode).second) continue;
    if (const auto why = infeasible(mode, d); !why.empty()) {
      unavailable.push_back({{"mode", mode}, {"reason", why}});
      text += "\n- " + mode + ": unavailable (" + why + ")";
      continue;
    }
    double seconds = d / (SyntheticWorld::speed_kmh(mode) / 3.6);
    OJson r = {{"mode", mode}, {"distance_m", meters(d)}};
    std::string extra;
    if (mode == "driving") {
      if (avoid_tolls) seconds *= 1.15;
      const auto key = route_key(line, mode);
      const int toll = avoid_tolls ? 0 : w.toll(d, key);
      const int lights = w.traffic_lights(d, key);
      r["duration_s"] = std::lround(seconds);
      r["toll"] = toll;
      r["traffic_lights"] = lights;
      extra = ", toll " + std::to_string(toll) + ", " + std::to_string(lights) + " traffic lights";
    } else {
      r["duration_s"] = std::lround(seconds);
    }
    text += "\n- " + mode + ": " + duration_text(std::lround(seconds)) + extra;
    routes.push_back(std::move(r));
  }
  if (routes.empty()) fail("NoRouteFound", "no requested mode can cover " + km_text(d));
  OJson waypoints = OJson::array();
  for (const auto& pt : line.points) waypoints.push_back(point_json(pt));
  return {text, {{"distance_m", meters(d)}, {"waypoints", waypoints}, {"routes", routes}, {"unavailable", unavailable}}};
}

ToolOutput search_along_route(const SyntheticWorld& w, const Json& p) {
  const auto line = build_polyline(w, p);
  const auto mode = str(p, "mode");
  if (const auto why = infeasible(mode, line.length_m()); !why.empty()) fail("NoRouteFound", why);
  const double width = p.at("corridor_width").get<double>();
  struct Hit {
    const Poi* poi;
    double off_m;
    double along_m;
  };
  std::vector<Hit> hits;
  for (const Poi* poi : filter_pois(w, p)) {
    double best = INFINITY;
    double along = 0.0;
    for (std::size_t s = 0; s + 1 < line.points.size(); ++s) {
      const auto sd = point_segment_distance(poi->pos, line.points[s], line.points[s + 1]);
      if (sd.meters < best) {
        best = sd.meters;
        along = line.cumulative_m[s] + sd.t * (line.cumulative_m[s + 1] - line.cumulative_m[s]);
      }
    }
    if (best <= width) hits.push_back({poi, best, along});
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return a.along_m != b.along_m ? a.along_m < b.along_m : a.poi->id < b.poi->id;
  });
  const auto k = static_cast<std::size_t>(integer(p, "top_k"));
  OJson results = OJson::array();
  std::string text = std::to_string(hits.size()) + " places matching \"" + str(p, "query") + "\" within " +
                     std::to_string(meters(width)) + " m of the " + mode + " route (" + km_text(line.length_m()) + ")";
  text += hits.empty() ? "." : ":";
  for (std::size_t i = 0; i < hits.size() && i < k; ++i) {
    auto item = poi_json(*hits[i].poi);
    item["offset_m"] = meters(hits[i].off_m);
    item["along_route_m"] = meters(hits[i].along_m);
    results.push_back(std::move(item));
    text += "\n" + poi_line(i + 1, *hits[i].poi,
                            ", " + std::to_string(meters(hits[i].off_m)) + " m off route at " + km_text(hits[i].along_m));
  }
  return {text, {{"route_distance_m", meters(line.length_m())}, {"total", hits.size()}, {"results", results}}};
}

ToolOutput search_central_places(const SyntheticWorld& w, const Json& p) {
  std::vector<LatLon> origins;
  for (const auto& o : p.at("origins")) origins.push_back(w.resolve(o.get<std::string>()));
  const auto strategy = parse_strategy(str(p, "strategy"));
  struct Scored {
    const Poi* poi;
    double objective;
    std::vector<double> distances;
  };
  std::vector<Scored> scored;
  for (const Poi* poi : filter_pois(w, p)) {
    Scored s{poi, 0.0, {}};
    for (const auto& o : origins) s.distances.push_back(haversine_m(o, poi->pos));
    s.objective = central_objective(strategy, s.distances);
    scored.push_back(std::move(s));
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    return a.objective != b.objective ? a.objective < b.objective : a.poi->id < b.poi->id;
  });
  const auto k = static_cast<std::size_t>(integer(p, "top_k"));
  OJson results = OJson::array();
  std::string text = "Best meeting places for " + std::to_string(origins.size()) + " origins (" + str(p, "strategy") + ")";
  text += scored.empty() ? ": none found." : ":";
  for (std::size_t i = 0; i < scored.size() && i < k; ++i) {
    auto item = poi_json(*scored[i].poi);
    item["objective_m"] = scored[i].objective;
    OJson ds = OJson::array();
    for (const double d : scored[i].distances) ds.push_back(meters(d));
    item["distances_m"] = ds;
    results.push_back(std::move(item));
    text += "\n" + poi_line(i + 1, *scored[i].poi, ", score " + km_text(scored[i].objective));
  }
  return {text, {{"total", scored.size()}, {"results", results}}};
}

ToolOutput ranking_list(const SyntheticWorld& w, const Json& p) {
  auto pois = filter_pois(w, p);
  std::sort(pois.begin(), pois.end(), [](const Poi* a, const Poi* b) {
    return a->rating != b->rating ? a->rating > b->rating : a->id < b->id;
  });
  const auto k = static_cast<std::size_t>(integer(p, "top_k"));
  std::string text = "Top " + str(p, "category") + " list";
  if (const auto r = str(p, "region"); !r.empty()) text += " in " + r;
  text += pois.empty() ? ": no entries." : ":";
  OJson results = OJson::array();
  for (std::size_t i = 0; i < pois.size() && i < k; ++i) {
    auto item = poi_json(*pois[i]);
    item["rank"] = i + 1;
    results.push_back(std::move(item));
    text += "\n" + poi_line(i + 1, *pois[i], "");
  }
  return {text, {{"total", pois.size()}, {"results", results}}};
}

ToolOutput flights(const SyntheticWorld& w, const Json& p) {
  const auto origin = str(p, "origin");
  const auto destination = str(p, "destination");
  const auto first = parse_date(str(p, "date"));
  OJson days = OJson::array();
  std::string text = "Flights " + origin + " -> " + destination + ":";
  for (std::int64_t d = 0; d < integer(p, "days"); ++d) {
    const auto date = format_date(first + d);
    const auto fs = w.flights(origin, destination, date);
    OJson list = OJson::array();
    int cheapest = fs.front().price;
    for (const auto& f : fs) {
      list.push_back({{"number", f.number}, {"depart", f.depart}, {"duration_min", f.duration_min}, {"price", f.price}});
      cheapest = std::min(cheapest, f.price);
    }
    days.push_back({{"date", date}, {"cheapest", cheapest}, {"flights", list}});
    text += "\n" + date + ": " + std::to_string(fs.size()) + " flights, from " + std::to_string(cheapest);
  }
  return {text, {{"origin", origin}, {"destination", destination}, {"days", days}}};
}

ToolOutput trains(const SyntheticWorld& w, const Json& p) {
  const auto origin = str(p, "origin");
  const auto destination = str(p, "destination");
  const auto date = str(p, "date");
  const auto type = str(p, "train_type");
  OJson list = OJson::array();
  std::string text = "Trains " + origin + " -> " + destination + " on " + date + ":";
  for (const auto& t : w.trains(origin, destination, date)) {
    if (type != "any" && t.type != type) continue;
    list.push_back({{"number", t.number}, {"type", t.type}, {"depart", t.depart}, {"duration_min", t.duration_min},
                    {"price", t.price}});
    text += "\n" + t.number + " " + t.depart + ", " + duration_text(60L * t.duration_min) + ", " + std::to_string(t.price);
  }
  if (list.empty()) text += " no matching trains.";
  return {text, {{"origin", origin}, {"destination", destination}, {"date", date}, {"trains", list}}};
}

std::string aqi_level(int aqi) {
  if (aqi <= 50) return "good";
  if (aqi <= 100) return "moderate";
  if (aqi <= 150) return "unhealthy for sensitive groups";
  return "unhealthy";
}

OJson weather_json(const WeatherDay& d) {
  return {{"date", d.date},         {"condition", d.condition}, {"temp_high_c", d.temp_high_c},
          {"temp_low_c", d.temp_low_c}, {"humidity", d.humidity}, {"wind_kph", d.wind_kph},
          {"aqi", d.aqi},           {"aqi_level", aqi_level(d.aqi)}};
}

ToolOutput weather_now(const SyntheticWorld& w, const Json& p) {
  const auto location = str(p, "location");
  const auto d = w.weather(location, w.resolve(location), 0);
  const int temp = (d.temp_high_c + d.temp_low_c) / 2;
  OJson data = {{"location", location},     {"date", d.date},         {"time", "14:00"},
                {"condition", d.condition}, {"temperature_c", temp},  {"humidity", d.humidity},
                {"wind_kph", d.wind_kph},   {"aqi", d.aqi},           {"aqi_level", aqi_level(d.aqi)}};
  std::string text = "Weather in " + location + " now: " + d.condition + ", " + std::to_string(temp) + " C, humidity " +
                     std::to_string(d.humidity) + "%, wind " + std::to_string(d.wind_kph) + " km/h, AQI " +
                     std::to_string(d.aqi) + " (" + aqi_level(d.aqi) + ").";
  return {text, data};
}

ToolOutput weather_forecast(const SyntheticWorld& w, const Json& p) {
  const auto location = str(p, "location");
  const auto days = integer(p, "days");
  if (days > 5) fail("ForecastHorizonExceeded", "forecasts cover at most 5 days, requested " + std::to_string(days));
  const auto pos = w.resolve(location);
  OJson list = OJson::array();
  std::string text = std::to_string(days) + "-day forecast for " + location + ":";
  for (int d = 0; d < days; ++d) {
    const auto day = w.weather(location, pos, d);
    list.push_back(weather_json(day));
    text += "\n" + day.date + ": " + day.condition + ", " + std::to_string(day.temp_low_c) + "-" +
            std::to_string(day.temp_high_c) + " C";
  }
  return {text, {{"location", location}, {"days", list}}};
}

ToolOutput web_search(const SyntheticWorld& w, const Json& p) {
  const auto query = str(p, "query");
  const auto tokens = words(query);
  struct Hit {
    const Document* doc;
    std::size_t score;
  };
  std::vector<Hit> hits;
  for (const auto& d : w.documents()) {
    const auto hay = text::ascii_lower(d.title + " " + d.snippet);
    std::size_t score = 0;
    for (const auto& t : tokens) score += hay.find(t) != std::string::npos ? 1 : 0;
    if (score > 0) hits.push_back({&d, score});
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return a.score != b.score ? a.score > b.score : a.doc->id < b.doc->id;
  });
  const auto k = static_cast<std::size_t>(integer(p, "top_k"));
  OJson results = OJson::array();
  std::string text = "Web results for \"" + query + "\"";
  text += hits.empty() ? ": no results." : ":";
  for (std::size_t i = 0; i < hits.size() && i < k; ++i) {
    const auto& d = *hits[i].doc;
    results.push_back({{"id", d.id}, {"title", d.title}, {"url", d.url}, {"snippet", d.snippet}, {"score", hits[i].score}});
    text += "\n" + std::to_string(i + 1) + ". " + d.title + " - " + d.snippet;
  }
  return {text, {{"total", hits.size()}, {"results", results}}};
}

using Runner = ToolOutput (*)(const SyntheticWorld&, const Json&);

const std::map<std::string, Runner, std::less<>>& runners() {
  static const std::map<std::string, Runner, std::less<>> table{
      {"map_search_places", search_places},
      {"map_compute_routes", compute_routes},
      {"map_search_along_route", search_along_route},
      {"map_search_central_places", search_central_places},
      {"map_search_ranking_list", ranking_list},
      {"travel_search_flights", flights},
      {"travel_search_trains", trains},
      {"weather_current_conditions", weather_now},
      {"weather_forecast_days", weather_forecast},
      {"web_search", web_search},
  };
  return table;
}

}  // namespace

bool matches_query(const Poi& poi, std::string_view query) {
  std::string category = poi.category;
  std::replace(category.begin(), category.end(), '_', ' ');
  const std::string hay = text::ascii_lower(poi.name) + " " + category;
  for (const auto& t : words(query)) {
    if (hay.find(t) == std::string::npos) return false;
  }
  return true;
}

CentralStrategy parse_strategy(std::string_view s) {
  if (s == "balanced") return CentralStrategy::Balanced;
  if (s == "minimize_max") return CentralStrategy::MinimizeMax;
  if (s == "minimize_total") return CentralStrategy::MinimizeTotal;
  fail("EnumViolation", "unknown strategy '" + std::string(s) + "'");
}

double central_objective(CentralStrategy s, std::span<const double> distances_m) {
  double max = 0.0;
  double sum = 0.0;
  for (const double d : distances_m) {
    max = std::max(max, d);
    sum += d;
  }
  switch (s) {
    case CentralStrategy::MinimizeMax: return max;
    case CentralStrategy::MinimizeTotal: return sum;
    case CentralStrategy::Balanced: break;
  }
  return 0.5 * max + 0.5 * (sum / static_cast<double>(distances_m.size()));
}

ToolOutput run_tool(const SyntheticWorld& world, std::string_view tool, const nlohmann::json& params) {
  const auto& table = runners();
  const auto it = table.find(tool);
  if (it == table.end()) fail("UnknownTool", "no tool named '" + std::string(tool) + "'");
  return it->second(world, params);
}

}  // namespace stforge::sandbox
