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
#include "stforge/sandbox/world.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "stforge/error.hpp"
#include "stforge/rng.hpp"
#include "stforge/text.hpp"

namespace stforge::sandbox {

namespace {

enum : std::uint64_t { kPoiStream = 1, kFlightStream, kTrainStream, kWeatherStream, kTollStream, kLightStream };

constexpr double kDegToRad = std::numbers::pi / 180.0;

constexpr std::array<std::string_view, 16> kSyllables{"lan", "hai", "xin", "jin", "bao", "long", "feng", "yun",
                                                      "ming", "tai", "an", "hua", "qing", "shan", "yue", "mei"};

struct CategoryProfile {
  std::string_view label;
  int price_lo;
  int price_hi;
  bool always_open;
};

constexpr std::array<CategoryProfile, kPoiCategories.size()> kProfiles{{
    {"Gas Station", 0, 0, true},
    {"Restaurant", 40, 260, false},
    {"Hotel", 180, 1200, true},
    {"Cafe", 20, 60, false},
    {"Parking", 5, 20, true},
    {"Museum", 0, 80, false},
    {"Park", 0, 30, false},
    {"Shopping Mall", 50, 500, false},
    {"Hospital", 0, 0, true},
    {"Supermarket", 30, 150, false},
    {"Charging Station", 0, 0, true},
    {"Scenic Spot", 0, 150, false},
}};

constexpr std::array<std::string_view, 6> kConditions{"sunny", "partly cloudy", "cloudy", "light rain", "showers",
                                                      "thunderstorms"};

struct CityRow {
  std::string_view name;
  double lat;
  double lon;
};

constexpr std::array<CityRow, 10> kCities{{
    {"haikou", 20.0440, 110.1999},
    {"sanya", 18.2528, 109.5119},
    {"guangzhou", 23.1291, 113.2644},
    {"shenzhen", 22.5431, 114.0579},
    {"beijing", 39.9042, 116.4074},
    {"shanghai", 31.2304, 121.4737},
    {"chengdu", 30.5728, 104.0668},
    {"hangzhou", 30.2741, 120.1551},
    {"wuhan", 30.5928, 114.3055},
    {"xian", 34.3416, 108.9398},
}};

struct TopicRow {
  std::string_view title;
  std::string_view snippet;
};

constexpr std::array<TopicRow, 12> kTopics{{
    {"Speed limits on urban roads", "Urban roads without center lines are limited to 30 km/h; expressways allow up to 120 km/h."},
    {"Tail number driving restrictions", "Some cities restrict driving on weekdays by the last digit of the license plate."},
    {"Electric vehicle charging tips", "Fast charging stations bring most electric cars to 80 percent in about 40 minutes."},
    {"Toll road fees explained", "Expressway tolls are charged by distance and vehicle class; holidays may waive fees for small cars."},
    {"Typhoon season travel advice", "Typhoon season runs from June to October; check forecasts and ferry notices before travel."},
    {"Island ferry schedules", "Ferries cross the strait several times a day; vehicles must check in an hour before departure."},
    {"High-speed rail ticket rules", "Train tickets open for sale 15 days in advance and can be changed once free of charge."},
    {"Airport transfer options", "Airport shuttles, taxis and metro lines connect terminals with the city center."},
    {"Choosing a family hotel", "Look for hotels with parking, breakfast and rooms that sleep four when traveling with children."},
    {"Night markets and local food", "Night markets open after sunset and offer seafood, coconut dishes and tropical fruit."},
    {"Parking regulations", "Roadside parking is metered during the day; illegal parking may be towed."},
    {"Car navigation voice settings", "Navigation voice packs and map display modes can be changed in the app settings."},
}};

std::string two_digits(int v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", v);
  return buf;
}

std::string clock(int minute) { return two_digits(minute / 60) + ":" + two_digits(minute % 60); }

std::string title_case(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::optional<LatLon> parse_coordinates(std::string_view s) {
  const auto comma = s.find(',');
  if (comma == std::string_view::npos) return std::nullopt;
  const auto parse = [](std::string_view part) -> std::optional<double> {
    part = text::trim_ascii(part);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size()) return std::nullopt;
    return v;
  };
  const auto lat = parse(s.substr(0, comma));
  const auto lon = parse(s.substr(comma + 1));
  if (!lat || !lon) return std::nullopt;
  if (!(*lat >= -90.0 && *lat <= 90.0 && *lon >= -180.0 && *lon <= 180.0)) return std::nullopt;
  return LatLon{*lat, *lon};
}

const CityRow* find_city(std::string_view name) {
  const std::string lower = text::ascii_lower(text::trim_ascii(name));
  for (const auto& c : kCities) {
    if (c.name == lower) return &c;
  }
  return nullptr;
}

std::pair<const CityRow*, const CityRow*> city_pair(std::string_view origin, std::string_view destination) {
  const auto* a = find_city(origin);
  const auto* b = find_city(destination);
  if (!a) fail("UnknownLocation", "no service at '" + std::string(origin) + "'");
  if (!b) fail("UnknownLocation", "no service at '" + std::string(destination) + "'");
  if (a == b) fail("NoRouteFound", "origin and destination are the same city");
  return {a, b};
}

std::uint64_t table_key(std::string_view a, std::string_view b, std::string_view date) {
  return fnv1a64(std::string(a) + '\x1f' + std::string(b) + '\x1f' + std::string(date));
}

}  // namespace

double haversine_m(LatLon a, LatLon b) {
  const double dlat = (b.lat - a.lat) * kDegToRad;
  const double dlon = (b.lon - a.lon) * kDegToRad;
  const double s = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(a.lat * kDegToRad) * std::cos(b.lat * kDegToRad) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * 1000.0 * std::asin(std::min(1.0, std::sqrt(s)));
}

SegmentDistance point_segment_distance(LatLon p, LatLon a, LatLon b) {
  const double r = kEarthRadiusKm * 1000.0;
  const double k = std::cos(a.lat * kDegToRad);
  const double bx = r * (b.lon - a.lon) * kDegToRad * k;
  const double by = r * (b.lat - a.lat) * kDegToRad;
  const double px = r * (p.lon - a.lon) * kDegToRad * k;
  const double py = r * (p.lat - a.lat) * kDegToRad;
  const double len2 = bx * bx + by * by;
  const double t = len2 > 0.0 ? std::clamp((px * bx + py * by) / len2, 0.0, 1.0) : 0.0;
  return {std::hypot(px - t * bx, py - t * by), t};
}

bool BBox::contains(LatLon p) const noexcept {
  return p.lat >= min_lat && p.lat <= max_lat && p.lon >= min_lon && p.lon <= max_lon;
}

void BBox::validate() const {
  const bool finite = std::isfinite(min_lat) && std::isfinite(max_lat) && std::isfinite(min_lon) && std::isfinite(max_lon);
  if (!finite || !(min_lat < max_lat) || !(min_lon < max_lon) || min_lat < -90.0 || max_lat > 90.0 ||
      min_lon < -180.0 || max_lon > 180.0) {
    fail("InvalidBBox", "bounding box must satisfy -90 <= min_lat < max_lat <= 90 and -180 <= min_lon < max_lon <= 180");
  }
}

std::string Poi::open_hours() const { return clock(open_minute) + "-" + clock(close_minute); }

bool Poi::open_at(int minute) const noexcept { return minute >= open_minute && minute < close_minute; }

LatLon Region::center() const noexcept {
  return {(box.min_lat + box.max_lat) / 2.0, (box.min_lon + box.max_lon) / 2.0};
}

double SyntheticWorld::speed_kmh(std::string_view mode) {
  if (mode == "driving") return 40.0;
  if (mode == "walking") return 5.0;
  if (mode == "cycling") return 15.0;
  if (mode == "transit") return 25.0;
  if (mode == "motorcycle") return 35.0;
  if (mode == "truck") return 30.0;
  fail("EnumViolation", "unknown transport mode '" + std::string(mode) + "'");
}

SyntheticWorld SyntheticWorld::generate(std::uint64_t seed, std::size_t n_pois, const BBox& bbox) {
  bbox.validate();
  SyntheticWorld w;
  w.seed_ = seed;
  w.bbox_ = bbox;

  constexpr int kGrid = 4;
  const double dlat = (bbox.max_lat - bbox.min_lat) / kGrid;
  const double dlon = (bbox.max_lon - bbox.min_lon) / kGrid;
  for (int row = 0; row < kGrid; ++row) {
    for (int col = 0; col < kGrid; ++col) {
      Region r;
      r.name = std::string("district ") + static_cast<char>('a' + row) + std::to_string(col + 1);
      r.box = {bbox.min_lat + row * dlat, bbox.min_lon + col * dlon,
               row + 1 == kGrid ? bbox.max_lat : bbox.min_lat + (row + 1) * dlat,
               col + 1 == kGrid ? bbox.max_lon : bbox.min_lon + (col + 1) * dlon};
      w.regions_.push_back(std::move(r));
    }
  }
  for (const auto& c : kCities) w.cities_.push_back({std::string(c.name), {c.lat, c.lon}});

  w.pois_.reserve(n_pois);
  for (std::size_t i = 0; i < n_pois; ++i) {
    SplitMix64 rng(stream_seed(seed, kPoiStream, i));
    Poi p;
    char id[24];
    std::snprintf(id, sizeof id, "poi_%05zu", i);
    p.id = id;
    const auto cat = rng.below(kPoiCategories.size());
    const auto& prof = kProfiles[cat];
    p.category = std::string(kPoiCategories[cat]);
    const std::string brand = std::string(kSyllables[rng.below(kSyllables.size())]) +
                              std::string(kSyllables[rng.below(kSyllables.size())]);
    p.name = title_case(brand) + " " + std::string(prof.label);
    p.pos = {rng.uniform(bbox.min_lat, bbox.max_lat), rng.uniform(bbox.min_lon, bbox.max_lon)};
    p.rating = static_cast<double>(25 + rng.below(26)) / 10.0;
    p.price = prof.price_lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(prof.price_hi - prof.price_lo + 1)));
    if (prof.always_open || rng.below(8) == 0) {
      p.open_minute = 0;
      p.close_minute = 24 * 60;
    } else {
      p.open_minute = 6 * 60 + 30 * static_cast<int>(rng.below(11));
      p.close_minute = 17 * 60 + 30 * static_cast<int>(rng.below(15));
    }
    p.region = w.region_at(p.pos)->name;
    w.pois_.push_back(std::move(p));
  }

  for (std::size_t t = 0; t < kTopics.size(); ++t) {
    w.documents_.push_back({"doc_" + two_digits(static_cast<int>(t)), std::string(kTopics[t].title),
                            "https://sandbox.invalid/docs/" + std::to_string(t), std::string(kTopics[t].snippet)});
  }
  for (std::size_t r = 0; r < w.regions_.size(); ++r) {
    const auto& region = w.regions_[r];
    std::vector<const Poi*> local;
    for (const auto& p : w.pois_) {
      if (p.region == region.name) local.push_back(&p);
    }
    std::sort(local.begin(), local.end(), [](const Poi* a, const Poi* b) {
      return a->rating != b->rating ? a->rating > b->rating : a->id < b->id;
    });
    std::string snippet = "Highlights in " + region.name + ":";
    if (local.empty()) snippet += " no listed places yet.";
    for (std::size_t k = 0; k < local.size() && k < 3; ++k) {
      snippet += (k == 0 ? " " : ", ") + local[k]->name + " (" + local[k]->category + ")";
    }
    w.documents_.push_back({"doc_r" + two_digits(static_cast<int>(r)), "Travel guide: " + region.name,
                            "https://sandbox.invalid/guides/" + std::to_string(r), snippet});
  }

  // Later insertions do not overwrite: regions, then cities, then POI names by id.
  for (const auto& r : w.regions_) w.places_.emplace(r.name, r.center());
  for (const auto& c : w.cities_) w.places_.emplace(c.name, c.pos);
  for (const auto& p : w.pois_) w.places_.emplace(text::ascii_lower(p.name), p.pos);
  return w;
}

const Poi* SyntheticWorld::find_poi(std::string_view id) const {
  constexpr std::string_view kPrefix = "poi_";
  if (!id.starts_with(kPrefix)) return nullptr;
  std::size_t idx = 0;
  const auto digits = id.substr(kPrefix.size());
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
  if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size() || idx >= pois_.size()) {
    return nullptr;
  }
  return pois_[idx].id == id ? &pois_[idx] : nullptr;
}

const Region* SyntheticWorld::region_at(LatLon p) const {
  if (!bbox_.contains(p)) return nullptr;
  for (const auto& r : regions_) {
    if (r.box.contains(p)) return &r;
  }
  return nullptr;
}

LatLon SyntheticWorld::resolve(std::string_view location) const {
  const auto trimmed = text::trim_ascii(location);
  if (const auto* p = find_poi(trimmed)) return p->pos;
  if (const auto c = parse_coordinates(trimmed)) return *c;
  const auto it = places_.find(text::ascii_lower(trimmed));
  if (it != places_.end()) return it->second;
  fail("UnknownLocation", "cannot resolve location '" + std::string(location) + "'");
}

std::vector<Flight> SyntheticWorld::flights(std::string_view origin, std::string_view destination,
                                            std::string_view date) const {
  parse_date(date);
  const auto [a, b] = city_pair(origin, destination);
  const double km = haversine_m({a->lat, a->lon}, {b->lat, b->lon}) / 1000.0;
  static constexpr std::array<std::string_view, 5> kAirlines{"CA", "MU", "CZ", "HU", "3U"};
  SplitMix64 rng(stream_seed(seed_, kFlightStream, table_key(a->name, b->name, date)));
  const auto n = 2 + rng.below(5);
  std::vector<Flight> out;
  for (std::uint64_t i = 0; i < n; ++i) {
    Flight f;
    f.number = std::string(kAirlines[rng.below(kAirlines.size())]) + std::to_string(1000 + rng.below(9000));
    f.date = std::string(date);
    f.depart = clock(6 * 60 + 15 * static_cast<int>(rng.below(64)));
    f.duration_min = static_cast<int>(std::lround(km / 750.0 * 60.0)) + 30;
    f.price = static_cast<int>(std::lround(km * 0.75 * (0.6 + 0.8 * rng.uniform()))) + 50;
    out.push_back(std::move(f));
  }
  std::sort(out.begin(), out.end(), [](const Flight& x, const Flight& y) {
    return x.depart != y.depart ? x.depart < y.depart : x.number < y.number;
  });
  return out;
}

std::vector<Train> SyntheticWorld::trains(std::string_view origin, std::string_view destination,
                                          std::string_view date) const {
  parse_date(date);
  const auto [a, b] = city_pair(origin, destination);
  const double km = haversine_m({a->lat, a->lon}, {b->lat, b->lon}) / 1000.0;
  if (km > 2500.0) fail("NoRouteFound", "no rail service between " + std::string(a->name) + " and " + std::string(b->name));
  SplitMix64 rng(stream_seed(seed_, kTrainStream, table_key(a->name, b->name, date)));
  const auto n = 3 + rng.below(6);
  std::vector<Train> out;
  for (std::uint64_t i = 0; i < n; ++i) {
    Train t;
    const bool fast = rng.below(3) != 0;
    t.type = fast ? "high_speed" : "regular";
    t.number = (fast ? std::string(rng.below(2) == 0 ? "G" : "D") : std::string(rng.below(2) == 0 ? "K" : "Z")) +
               std::to_string(1 + rng.below(9999));
    t.depart = clock(6 * 60 + 10 * static_cast<int>(rng.below(96)));
    // rail track is longer than the great circle
    const double track_km = km * 1.25;
    t.duration_min = static_cast<int>(std::lround(track_km / (fast ? 250.0 : 100.0) * 60.0)) + 10;
    t.price = static_cast<int>(std::lround(track_km * (fast ? 0.46 : 0.18))) + 10;
    out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end(), [](const Train& x, const Train& y) {
    return x.depart != y.depart ? x.depart < y.depart : x.number < y.number;
  });
  return out;
}

WeatherDay SyntheticWorld::weather(std::string_view location_key, LatLon pos, int day_offset) const {
  const std::int64_t day = parse_date(kToday) + day_offset;
  SplitMix64 rng(stream_seed(seed_, kWeatherStream, table_key(location_key, "", format_date(day))));
  WeatherDay d;
  d.date = format_date(day);
  d.condition = std::string(kConditions[rng.below(kConditions.size())]);
  const int base = 34 - static_cast<int>(std::lround(std::max(0.0, std::abs(pos.lat) - 18.0) * 0.6));
  d.temp_high_c = base + static_cast<int>(rng.below(5)) - 2;
  d.temp_low_c = d.temp_high_c - 5 - static_cast<int>(rng.below(6));
  d.humidity = 40 + static_cast<int>(rng.below(56));
  d.wind_kph = 2 + static_cast<int>(rng.below(30));
  d.aqi = 15 + static_cast<int>(rng.below(170));
  return d;
}

int SyntheticWorld::toll(double distance_m, std::uint64_t route_key) const {
  SplitMix64 rng(stream_seed(seed_, kTollStream, route_key));
  const double km = distance_m / 1000.0;
  const double jitter = rng.uniform(-0.1, 0.1);
  return static_cast<int>(std::lround(std::max(0.0, (km - 5.0) * 0.5 * (1.0 + jitter))));
}

int SyntheticWorld::traffic_lights(double distance_m, std::uint64_t route_key) const {
  SplitMix64 rng(stream_seed(seed_, kLightStream, route_key));
  return static_cast<int>(std::floor(distance_m / 1000.0 * 0.8)) + static_cast<int>(rng.below(3));
}

nlohmann::ordered_json SyntheticWorld::snapshot() const {
  nlohmann::ordered_json j;
  j["seed"] = seed_;
  j["bbox"] = {{"min_lat", bbox_.min_lat}, {"min_lon", bbox_.min_lon}, {"max_lat", bbox_.max_lat},
               {"max_lon", bbox_.max_lon}};
  j["today"] = std::string(kToday);
  j["now"] = clock(kNowMinute);
  nlohmann::ordered_json speeds = nlohmann::ordered_json::object();
  for (const auto m : kTransportModes) speeds[std::string(m)] = speed_kmh(m);
  j["route_speeds_kmh"] = speeds;
  j["regions"] = nlohmann::ordered_json::array();
  for (const auto& r : regions_) {
    j["regions"].push_back({{"name", r.name},
                            {"bbox", {r.box.min_lat, r.box.min_lon, r.box.max_lat, r.box.max_lon}}});
  }
  j["cities"] = nlohmann::ordered_json::array();
  for (const auto& c : cities_) j["cities"].push_back({{"name", c.name}, {"lat", c.pos.lat}, {"lon", c.pos.lon}});
  j["pois"] = nlohmann::ordered_json::array();
  for (const auto& p : pois_) {
    j["pois"].push_back({{"id", p.id},
                         {"name", p.name},
                         {"category", p.category},
                         {"lat", p.pos.lat},
                         {"lon", p.pos.lon},
                         {"rating", p.rating},
                         {"price", p.price},
                         {"open_hours", p.open_hours()},
                         {"region", p.region}});
  }
  j["documents"] = nlohmann::ordered_json::array();
  for (const auto& d : documents_) {
    j["documents"].push_back({{"id", d.id}, {"title", d.title}, {"url", d.url}, {"snippet", d.snippet}});
  }
  return j;
}

std::int64_t parse_date(std::string_view date) {
  const auto bad = [&] { fail("InvalidDate", "expected YYYY-MM-DD, got '" + std::string(date) + "'"); };
  if (date.size() != 10 || date[4] != '-' || date[7] != '-') bad();
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  const auto num = [&](std::size_t pos, std::size_t len, auto& out) {
    const auto [ptr, ec] = std::from_chars(date.data() + pos, date.data() + pos + len, out);
    if (ec != std::errc{} || ptr != date.data() + pos + len) bad();
  };
  num(0, 4, y);
  num(5, 2, m);
  num(8, 2, d);
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) bad();
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

std::string format_date(std::int64_t days) {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace stforge::sandbox
