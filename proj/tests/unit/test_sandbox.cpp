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
#include <algorithm>
#include <cmath>
#include <latch>
#include <map>
#include <set>
#include <thread>

#include <gtest/gtest.h>

#include "stforge/rng.hpp"
#include "stforge/sandbox/lru.hpp"
#include "stforge/sandbox/normalize.hpp"
#include "stforge/sandbox/sandbox.hpp"
#include "stforge/sandbox/schema.hpp"
#include "stforge/sandbox/tools.hpp"
#include "stforge/sandbox/world.hpp"
#include "support/test_support.hpp"

namespace stforge::sandbox {
namespace {

using nlohmann::json;

TEST(Registry, TenToolsInFourCategories) {
  const auto reg = Registry::standard();
  ASSERT_EQ(reg.tools().size(), 10u);
  std::map<Category, int> per;
  std::set<std::string> names;
  for (const auto& t : reg.tools()) {
    ++per[t.category];
    names.insert(t.name);
  }
  EXPECT_EQ(names.size(), 10u);
  EXPECT_EQ(per[Category::MapNavigation], 5);
  EXPECT_EQ(per[Category::Travel], 2);
  EXPECT_EQ(per[Category::Weather], 2);
  EXPECT_EQ(per[Category::Information], 1);
  const auto* modes = reg.find("map_compute_routes")->find("modes");
  ASSERT_NE(modes, nullptr);
  EXPECT_EQ(modes->enum_values.size(), 6u);
}

TEST(Registry, DuplicateAndInvalid) {
  ParamSpec q;
  q.name = "q";
  q.required = true;
  ParamSpec e;
  e.name = "e";
  e.kind = ParamKind::Enum;
  Registry r;
  r.add({"t", Category::Information, {q}, "d"});
  EXPECT_ERROR_KIND(r.add({"t", Category::Information, {}, "d"}), "DuplicateTool");
  EXPECT_ERROR_KIND(r.add({"u", Category::Information, {e}, "d"}), "InvalidSchema");
}

const ToolSchema& schema(const std::string& name) {
  static const Registry reg = Registry::standard();
  return *reg.find(name);
}

TEST(Normalize, EquivalentSpellingsGiveIdenticalBytes) {
  const auto& s = schema("map_search_places");
  const auto a = normalize_params(s, json::parse(R"({"query":" Gas  Station ","region":"海口市"})"));
  const auto b = normalize_params(s, json::parse(R"({"region":"海口市","query":"gas station"})"));
  EXPECT_EQ(a.canonical, b.canonical);
  const auto c = normalize_params(s, json::parse(R"({"query":"x","radius":1.0})"));
  const auto d = normalize_params(s, json::parse(R"({"radius":1,"query":"x","unknown":[1,2]})"));
  EXPECT_EQ(c.canonical, d.canonical);
  EXPECT_NE(c.canonical.find("\"radius\":1,"), std::string::npos) << c.canonical;
}

TEST(Normalize, DefaultsAndSortedKeys) {
  const auto n = normalize_params(schema("web_search"), json::parse(R"({"query":"Visa"})"));
  EXPECT_EQ(n.canonical, R"({"query":"visa","top_k":5})");
  const auto f = normalize_params(schema("weather_forecast_days"), json::parse(R"({"location":"Haikou"})"));
  EXPECT_EQ(f.values.at("days"), 3);
}

TEST(Normalize, Errors) {
  EXPECT_ERROR_KIND(normalize_params(schema("map_search_places"), json::parse(R"({"radius":5})")),
                    "MissingRequiredParam");
  EXPECT_ERROR_KIND(normalize_params(schema("map_search_places"), json::parse(R"({"query":"  "})")),
                    "MissingRequiredParam");
  EXPECT_ERROR_KIND(normalize_params(schema("map_search_places"), json::parse(R"({"query":"x","radius":"far"})")),
                    "TypeMismatch");
  EXPECT_ERROR_KIND(normalize_params(schema("map_search_places"), json::parse(R"({"query":"x","top_k":2.5})")),
                    "TypeMismatch");
  EXPECT_ERROR_KIND(normalize_params(schema("map_search_places"), json::parse(R"({"query":"x","sort_by":"fame"})")),
                    "EnumViolation");
  EXPECT_ERROR_KIND(normalize_params(schema("map_compute_routes"),
                                     json::parse(R"({"origin":"a","destination":"b","modes":["teleport"]})")),
                    "EnumViolation");
  EXPECT_ERROR_KIND(normalize_params(schema("map_search_places"), json::parse(R"({"query":"x","top_k":0})")),
                    "ValueOutOfRange");
}

TEST(Normalize, Idempotent) {
  SplitMix64 rng(3);
  const char* raws[] = {
      R"({"query":" Hot   POT ","center":[20.0,110.30],"radius":2500.0,"sort_by":"Rating","top_k":3,"open_now":true})",
      R"({"origin":" Haikou ","destination":"SANYA","modes":["Walking","driving"],"intermediates":["district a1"]})",
      R"({"origins":["district a1","district b2"],"strategy":"MINIMIZE_MAX","top_k":2})",
      R"({"location":"sanya","days":5.0})",
  };
  const char* tools[] = {"map_search_places", "map_compute_routes", "map_search_central_places",
                         "weather_forecast_days"};
  for (int i = 0; i < 4; ++i) {
    const auto once = normalize_params(schema(tools[i]), json::parse(raws[i]));
    const auto twice = normalize_params(schema(tools[i]), json::parse(once.canonical));
    EXPECT_EQ(once.canonical, twice.canonical) << tools[i];
  }
}

TEST(Normalize, RenderNumber) {
  EXPECT_EQ(render_number(1.0), "1");
  EXPECT_EQ(render_number(-0.0), "0");
  EXPECT_EQ(render_number(0.1), "0.1");
  EXPECT_EQ(render_number(1e21), "1e+21");
  EXPECT_EQ(render_number(110.35), "110.35");
  EXPECT_EQ(canonical_json(json::parse(R"({"b":[1.50,"é"],"a":{"z":null,"y":true}})")),
            R"({"a":{"y":true,"z":null},"b":[1.5,"é"]})");
}

TEST(Lru, Semantics) {
  LruCache<std::string, int> c(2);
  c.put("a", 1);
  c.put("b", 2);
  EXPECT_EQ(c.get("a"), 1);
  c.put("c", 3);
  EXPECT_FALSE(c.contains("b"));
  EXPECT_TRUE(c.contains("a"));
  EXPECT_TRUE(c.contains("c"));
  c.put("c", 4);
  EXPECT_EQ(c.size(), 2u);
  EXPECT_EQ(c.get("c"), 4);
}

// Reference model: recency stamps in an ordered map, evict the oldest.
TEST(Lru, MatchesReferenceModel) {
  SplitMix64 rng(99);
  for (std::size_t cap : {1u, 3u, 16u}) {
    LruCache<int, int> lru(cap);
    std::map<int, std::pair<std::uint64_t, int>> ref;  // key -> (stamp, value)
    std::uint64_t clock = 0;
    for (int op = 0; op < 10000; ++op) {
      const int key = static_cast<int>(rng.below(24));
      if (rng.below(2) == 0) {
        const auto got = lru.get(key);
        const auto it = ref.find(key);
        ASSERT_EQ(got.has_value(), it != ref.end()) << "op " << op;
        if (got) {
          ASSERT_EQ(*got, it->second.second);
          it->second.first = ++clock;
        }
      } else {
        const int value = static_cast<int>(rng.below(1000));
        lru.put(key, value);
        if (!ref.count(key) && ref.size() == cap) {
          auto oldest = std::min_element(ref.begin(), ref.end(), [](const auto& a, const auto& b) {
            return a.second.first < b.second.first;
          });
          ref.erase(oldest);
        }
        ref[key] = {++clock, value};
      }
      ASSERT_EQ(lru.size(), ref.size());
      ASSERT_LE(lru.size(), cap);
    }
  }
}

TEST(CacheKey, PureAndSensitive) {
  const auto a = make_cache_key("web_search", R"({"query":"x","top_k":5})");
  EXPECT_EQ(a, make_cache_key("web_search", R"({"query":"x","top_k":5})"));
  EXPECT_NE(a, make_cache_key("web_searc", R"(h{"query":"x","top_k":5})"));
  EXPECT_EQ(make_cache_key("", "").hex(), "6e340b9cffb37a989ca544e6bb780a2c78901d3fb33738768511a30617afa01d");
}

TEST(World, GenerationDeterministic) {
  const auto empty = SyntheticWorld::generate(7, 0);
  EXPECT_TRUE(empty.pois().empty());
  EXPECT_FALSE(empty.cities().empty());
  EXPECT_EQ(empty.regions().size(), 16u);
  const auto a = SyntheticWorld::generate(7, 100);
  const auto b = SyntheticWorld::generate(7, 100);
  EXPECT_EQ(a.snapshot().dump(), b.snapshot().dump());
  const auto c = SyntheticWorld::generate(8, 100);
  std::vector<std::string> na;
  std::vector<std::string> nc;
  for (const auto& p : a.pois()) na.push_back(p.name);
  for (const auto& p : c.pois()) nc.push_back(p.name);
  EXPECT_NE(na, nc);
  for (const auto& p : a.pois()) EXPECT_TRUE(a.bbox().contains(p.pos)) << p.id;
  EXPECT_ERROR_KIND(SyntheticWorld::generate(1, 10, BBox{20, 110, 19, 111}), "InvalidBBox");
}

TEST(World, ResolveAndDates) {
  const auto w = SyntheticWorld::generate(7, 20);
  const auto& p = w.pois()[3];
  EXPECT_EQ(w.resolve(p.id).lat, p.pos.lat);
  EXPECT_EQ(w.resolve("19.95,110.2").lon, 110.2);
  EXPECT_NO_THROW(w.resolve("Haikou"));
  EXPECT_NO_THROW(w.resolve("District A1"));
  EXPECT_ERROR_KIND(w.resolve("atlantis"), "UnknownLocation");
  EXPECT_EQ(format_date(parse_date("2024-02-29")), "2024-02-29");
  EXPECT_EQ(parse_date("1970-01-02"), 1);
  EXPECT_ERROR_KIND(parse_date("2023-02-29"), "InvalidDate");
  EXPECT_ERROR_KIND(parse_date("2023-2-1"), "InvalidDate");
}

TEST(Geometry, HaversineKnownValues) {
  EXPECT_EQ(haversine_m({20, 110}, {20, 110}), 0.0);
  // One degree of latitude on the mean sphere.
  EXPECT_NEAR(haversine_m({0, 0}, {1, 0}), kEarthRadiusKm * 1000.0 * M_PI / 180.0, 1e-6);
  EXPECT_NEAR(haversine_m({0, 0}, {0, 180}), kEarthRadiusKm * 1000.0 * M_PI, 1e-6);
  const auto sd = point_segment_distance({20.0, 110.05}, {20.0, 110.0}, {20.0, 110.1});
  EXPECT_NEAR(sd.meters, 0.0, 1e-6);
  EXPECT_NEAR(sd.t, 0.5, 1e-12);
  const auto end = point_segment_distance({20.0, 110.2}, {20.0, 110.0}, {20.0, 110.1});
  EXPECT_EQ(end.t, 1.0);
  EXPECT_NEAR(end.meters, haversine_m({20.0, 110.2}, {20.0, 110.1}), 1.0);
}

Sandbox make_sandbox(std::uint64_t seed, std::size_t pois, std::size_t cap = kDefaultCacheCapacity) {
  return Sandbox(SyntheticWorld::generate(seed, pois), Registry::standard(), cap);
}

TEST(Dispatch, CacheHitReplaysPayload) {
  auto sb = make_sandbox(7, 200);
  const auto q = json::parse(R"({"query":"restaurant","center":[20.0,110.35],"radius":8000})");
  const auto a = sb.dispatch("map_search_places", q);
  const auto b = sb.dispatch("map_search_places", json::parse(R"({"radius":8000.0,"query":" Restaurant","center":[20,110.35]})"));
  EXPECT_FALSE(a.cache_hit);
  EXPECT_TRUE(b.cache_hit);
  EXPECT_EQ(a.data.dump(), b.data.dump());
  EXPECT_EQ(a.text, b.text);
  EXPECT_FALSE(a.text.empty());
  const auto st = sb.stats();
  EXPECT_EQ(st.executions, 1u);
  EXPECT_EQ(st.cache_hits, 1u);
  EXPECT_EQ(st.cache_misses, 1u);
  // Shadow execution agrees with the cached payload.
  const auto norm = normalize_params(schema("map_search_places"), q);
  EXPECT_EQ(sb.execute_uncached("map_search_places", norm.values).data.dump(), b.data.dump());
}

TEST(Dispatch, Errors) {
  auto sb = make_sandbox(7, 50);
  EXPECT_THROW(sb.dispatch("teleport", json::object()), InvalidParams);
  EXPECT_ERROR_KIND(sb.dispatch("teleport", json::object()), "UnknownTool");
  EXPECT_ERROR_KIND(sb.dispatch("weather_forecast_days", json::parse(R"({"location":"haikou","days":6})")),
                    "ForecastHorizonExceeded");
  EXPECT_NO_THROW(sb.dispatch("weather_forecast_days", json::parse(R"({"location":"haikou","days":5})")));
  try {
    sb.dispatch("map_compute_routes", json::parse(R"({"origin":"haikou","destination":"sanya","modes":["hover"]})"));
    FAIL();
  } catch (const InvalidParams& e) {
    EXPECT_EQ(e.kind(), "EnumViolation");
  }
  EXPECT_ERROR_KIND(sb.dispatch("map_compute_routes",
                                json::parse(R"({"origin":"haikou","destination":"beijing","modes":["walking"]})")),
                    "NoRouteFound");
  EXPECT_ERROR_KIND(sb.dispatch("travel_search_flights",
                                json::parse(R"({"origin":"haikou","destination":"haikou","date":"2025-06-02"})")),
                    "NoRouteFound");
  EXPECT_ERROR_KIND(sb.dispatch("travel_search_trains",
                                json::parse(R"({"origin":"haikou","destination":"sanya","date":"2025-13-02"})")),
                    "InvalidDate");
  // Failures are not cached.
  EXPECT_EQ(sb.stats().cache_size, 1u);
}

TEST(Dispatch, EveryToolProducesText) {
  auto sb = make_sandbox(11, 300);
  const std::vector<std::pair<std::string, std::string>> calls{
      {"map_search_places", R"({"query":"hotel"})"},
      {"map_compute_routes", R"({"origin":"district a1","destination":"district d4","modes":["driving","walking","transit"]})"},
      {"map_search_along_route", R"({"origin":"district a1","destination":"district d4","query":"cafe"})"},
      {"map_search_central_places", R"({"origins":["district a1","district c3"],"category":"cafe"})"},
      {"map_search_ranking_list", R"({"category":"restaurant","top_k":3})"},
      {"travel_search_flights", R"({"origin":"haikou","destination":"beijing","date":"2025-06-03","days":2})"},
      {"travel_search_trains", R"({"origin":"haikou","destination":"sanya","date":"2025-06-03"})"},
      {"weather_current_conditions", R"({"location":"haikou"})"},
      {"weather_forecast_days", R"({"location":"district b2","days":4})"},
      {"web_search", R"({"query":"ferry schedules"})"},
  };
  for (const auto& [tool, args] : calls) {
    const auto r = sb.dispatch(tool, json::parse(args));
    EXPECT_FALSE(r.text.empty()) << tool;
    EXPECT_TRUE(r.data.is_object()) << tool;
  }
  const auto routes = sb.dispatch(calls[1].first, json::parse(calls[1].second)).data;
  EXPECT_TRUE(routes.at("routes").at(0).contains("toll"));
  EXPECT_TRUE(routes.at("routes").at(0).contains("traffic_lights"));
  const auto ranking = sb.dispatch(calls[4].first, json::parse(calls[4].second)).data.at("results");
  for (std::size_t i = 1; i < ranking.size(); ++i) {
    EXPECT_GE(ranking[i - 1].at("rating").get<double>(), ranking[i].at("rating").get<double>());
  }
}

TEST(Dispatch, SingleFlightCoalescesIdenticalCalls) {
  auto sb = make_sandbox(5, 2000);
  const auto args = json::parse(R"({"origins":["district a1","district d4","district b3"],"top_k":10})");
  std::latch start(64);
  std::vector<std::thread> threads;
  std::vector<std::string> payloads(64);
  std::atomic<int> hits{0};
  for (int i = 0; i < 64; ++i) {
    threads.emplace_back([&, i] {
      start.arrive_and_wait();
      const auto r = sb.dispatch("map_search_central_places", args);
      payloads[static_cast<std::size_t>(i)] = r.data.dump();
      hits += r.cache_hit ? 1 : 0;
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(sb.stats().executions, 1u);
  EXPECT_GE(hits.load(), 63);
  for (const auto& p : payloads) EXPECT_EQ(p, payloads[0]);
}

TEST(Dispatch, EvictionRespectsCapacity) {
  auto sb = make_sandbox(5, 50, 4);
  for (int d = 1; d <= 5; ++d) {
    sb.dispatch("weather_forecast_days", json{{"location", "haikou"}, {"days", d}});
  }
  EXPECT_EQ(sb.stats().cache_size, 4u);
  EXPECT_FALSE(sb.dispatch("weather_forecast_days", json{{"location", "haikou"}, {"days", 1}}).cache_hit);
  EXPECT_TRUE(sb.dispatch("weather_forecast_days", json{{"location", "haikou"}, {"days", 5}}).cache_hit);
}

// Geometry invariants checked against brute force over the whole world.
class GeometryWorlds : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(GeometryWorlds, Invariants) {
  const std::uint64_t seed = GetParam();
  auto sb = make_sandbox(seed, 200);
  const auto& w = sb.world();
  SplitMix64 rng(seed);
  const auto random_point = [&] {
    return LatLon{rng.uniform(w.bbox().min_lat, w.bbox().max_lat), rng.uniform(w.bbox().min_lon, w.bbox().max_lon)};
  };
  const auto loc = [](LatLon p) { return render_number(p.lat) + "," + render_number(p.lon); };
  std::string category(kPoiCategories[rng.below(kPoiCategories.size())]);
  std::replace(category.begin(), category.end(), '_', ' ');

  // radius containment, and completeness against brute force
  const LatLon c = random_point();
  const double radius = 1000.0 + rng.uniform() * 9000.0;
  const auto places = sb.dispatch("map_search_places", json{{"query", category}, {"center", {c.lat, c.lon}},
                                                            {"radius", radius}, {"top_k", 50}})
                          .data;
  std::size_t expect_total = 0;
  for (const auto& p : w.pois()) {
    if (matches_query(p, category) && haversine_m(c, p.pos) <= radius) ++expect_total;
  }
  EXPECT_EQ(places.at("total").get<std::size_t>(), expect_total);
  for (const auto& r : places.at("results")) {
    const auto* p = w.find_poi(r.at("id").get<std::string>());
    ASSERT_NE(p, nullptr);
    EXPECT_LE(haversine_m(c, p->pos), radius);
  }

  // corridor containment
  const LatLon o = random_point();
  const LatLon d = random_point();
  const double width = 500.0 + rng.uniform() * 3000.0;
  const auto along = sb.dispatch("map_search_along_route", json{{"origin", loc(o)}, {"destination", loc(d)},
                                                                {"query", category}, {"corridor_width", width},
                                                                {"top_k", 50}})
                         .data;
  const LatLon o2 = w.resolve(loc(o));
  const LatLon d2 = w.resolve(loc(d));
  std::size_t within = 0;
  for (const auto& p : w.pois()) {
    if (matches_query(p, category) && point_segment_distance(p.pos, o2, d2).meters <= width) ++within;
  }
  EXPECT_EQ(along.at("total").get<std::size_t>(), within);
  for (const auto& r : along.at("results")) {
    const auto* p = w.find_poi(r.at("id").get<std::string>());
    EXPECT_LE(point_segment_distance(p->pos, o2, d2).meters, width);
  }

  // central-place optimality per strategy
  std::vector<LatLon> origins;
  json origin_names = json::array();
  for (std::uint64_t k = 2 + rng.below(3); k > 0; --k) {
    origins.push_back(random_point());
    origin_names.push_back(loc(origins.back()));
  }
  for (const char* strategy : {"balanced", "minimize_max", "minimize_total"}) {
    const auto res = sb.dispatch("map_search_central_places",
                                 json{{"origins", origin_names}, {"strategy", strategy}, {"top_k", 1}})
                         .data.at("results");
    ASSERT_EQ(res.size(), 1u);
    const auto s = parse_strategy(strategy);
    double best = INFINITY;
    std::string best_id;
    for (const auto& p : w.pois()) {
      std::vector<double> ds;
      for (const auto& og : origins) ds.push_back(haversine_m(w.resolve(loc(og)), p.pos));
      const double v = central_objective(s, ds);
      if (v < best) {
        best = v;
        best_id = p.id;
      }
    }
    EXPECT_EQ(res[0].at("id").get<std::string>(), best_id) << strategy;
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, GeometryWorlds, ::testing::Range<std::uint64_t>(1, 11));

TEST(Central, CoincidentOriginsMinimizeMaxIsNearestPoi) {
  auto sb = make_sandbox(21, 150);
  const auto& w = sb.world();
  const std::string here = "20.01,110.33";
  const auto res = sb.dispatch("map_search_central_places",
                               json{{"origins", {here, here}}, {"strategy", "minimize_max"}, {"top_k", 1}})
                       .data.at("results");
  const LatLon p = w.resolve(here);
  const auto nearest = std::min_element(w.pois().begin(), w.pois().end(), [&](const Poi& a, const Poi& b) {
    const double da = haversine_m(p, a.pos);
    const double db = haversine_m(p, b.pos);
    return da != db ? da < db : a.id < b.id;
  });
  EXPECT_EQ(res.at(0).at("id").get<std::string>(), nearest->id);
}

TEST(Central, Objectives) {
  const std::vector<double> d{1000, 3000};
  EXPECT_EQ(central_objective(CentralStrategy::MinimizeMax, d), 3000);
  EXPECT_EQ(central_objective(CentralStrategy::MinimizeTotal, d), 4000);
  EXPECT_EQ(central_objective(CentralStrategy::Balanced, d), 2500);
}

}  // namespace
}  // namespace stforge::sandbox
