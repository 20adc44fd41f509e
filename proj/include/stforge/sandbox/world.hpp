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

// Seeded synthetic stand-in for map, travel and weather services. Every value
// is a pure function of the seed and the generation parameters.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace stforge::sandbox {

inline constexpr double kEarthRadiusKm = 6371.0088;

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

/// Great-circle distance in meters.
double haversine_m(LatLon a, LatLon b);

/// Distance in meters from p to segment ab on a local equirectangular plane
/// centred at a; also returns the clamped position along the segment.
struct SegmentDistance {
  double meters = 0.0;
  double t = 0.0;
};
SegmentDistance point_segment_distance(LatLon p, LatLon a, LatLon b);

struct BBox {
  double min_lat = 19.80;
  double min_lon = 110.10;
  double max_lat = 20.20;
  double max_lon = 110.60;

  bool contains(LatLon p) const noexcept;
  /// Errors: InvalidBBox.
  void validate() const;
};

inline constexpr std::array<std::string_view, 12> kPoiCategories{
    "gas_station", "restaurant", "hotel",    "cafe",        "parking",          "museum",
    "park",        "shopping_mall", "hospital", "supermarket", "charging_station", "scenic_spot"};

inline constexpr std::array<std::string_view, 6> kTransportModes{"driving", "walking",    "cycling",
                                                                 "transit", "motorcycle", "truck"};

struct Poi {
  std::string id;
  std::string name;
  std::string category;
  LatLon pos;
  double rating = 0.0;  // 0..5, one decimal
  int price = 0;        // average spend, currency units
  int open_minute = 0;  // minutes after midnight
  int close_minute = 0; // may be 1440
  std::string region;

  std::string open_hours() const;
  bool open_at(int minute) const noexcept;
};

struct Region {
  std::string name;
  BBox box;
  LatLon center() const noexcept;
};

struct City {
  std::string name;
  LatLon pos;
};

struct Flight {
  std::string number;
  std::string date;
  std::string depart;  // HH:MM
  int duration_min = 0;
  int price = 0;
};

struct Train {
  std::string number;
  std::string type;  // high_speed | regular
  std::string depart;
  int duration_min = 0;
  int price = 0;
};

struct WeatherDay {
  std::string date;
  std::string condition;
  int temp_high_c = 0;
  int temp_low_c = 0;
  int humidity = 0;
  int wind_kph = 0;
  int aqi = 0;
};

struct Document {
  std::string id;
  std::string title;
  std::string url;
  std::string snippet;
};

class SyntheticWorld {
 public:
  /// Errors: InvalidBBox.
  static SyntheticWorld generate(std::uint64_t seed, std::size_t n_pois, const BBox& bbox = {});

  std::uint64_t seed() const noexcept { return seed_; }
  const BBox& bbox() const noexcept { return bbox_; }
  const std::vector<Poi>& pois() const noexcept { return pois_; }
  const std::vector<Region>& regions() const noexcept { return regions_; }
  const std::vector<City>& cities() const noexcept { return cities_; }
  const std::vector<Document>& documents() const noexcept { return documents_; }

  /// World clock used by open_now and the forecast horizon.
  static constexpr std::string_view kToday = "2025-06-01";
  static constexpr int kNowMinute = 14 * 60;

  static double speed_kmh(std::string_view mode);

  const Poi* find_poi(std::string_view id) const;
  /// Region containing p, or nullptr outside the bounding box.
  const Region* region_at(LatLon p) const;

  /// "lat,lon", POI id, POI name, region name or city name (names compared
  /// case-insensitively). Errors: UnknownLocation.
  LatLon resolve(std::string_view location) const;

  /// Errors: InvalidDate, UnknownLocation, NoRouteFound.
  std::vector<Flight> flights(std::string_view origin, std::string_view destination, std::string_view date) const;
  std::vector<Train> trains(std::string_view origin, std::string_view destination, std::string_view date) const;
  WeatherDay weather(std::string_view location_key, LatLon pos, int day_offset) const;

  /// Toll (currency units) and traffic-light count for a driving route.
  int toll(double distance_m, std::uint64_t route_key) const;
  int traffic_lights(double distance_m, std::uint64_t route_key) const;

  nlohmann::ordered_json snapshot() const;

 private:
  std::uint64_t seed_ = 0;
  BBox bbox_;
  std::vector<Poi> pois_;
  std::vector<Region> regions_;
  std::vector<City> cities_;
  std::vector<Document> documents_;
  std::unordered_map<std::string, LatLon> places_;  // lowercase name -> position
};

/// Days since 1970-01-01 for a YYYY-MM-DD string. Errors: InvalidDate.
std::int64_t parse_date(std::string_view date);
std::string format_date(std::int64_t days);

}  // namespace stforge::sandbox
