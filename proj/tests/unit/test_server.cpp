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
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "stforge/sandbox/server.hpp"

namespace stforge::sandbox {
namespace {

using nlohmann::json;

class Rpc : public ::testing::Test {
 protected:
  Rpc() : sb_(SyntheticWorld::generate(3, 300)) {}

  json call(const std::string& body) {
    const auto out = handle_rpc(sb_, body);
    EXPECT_TRUE(out.has_value()) << body;
    return out ? json::parse(*out) : json();
  }

  static int code(const json& reply) { return reply.at("error").at("code").get<int>(); }

  Sandbox sb_;
};

TEST_F(Rpc, ParseError) {
  const auto r = call("{\"jsonrpc\": \"2.0\", ");
  EXPECT_EQ(code(r), rpc::kParseError);
  EXPECT_TRUE(r.at("id").is_null());
}

TEST_F(Rpc, InvalidRequest) {
  EXPECT_EQ(code(call(R"({"jsonrpc":"1.0","method":"tools/list","id":1})")), rpc::kInvalidRequest);
  EXPECT_EQ(code(call(R"({"jsonrpc":"2.0","method":7,"id":1})")), rpc::kInvalidRequest);
  EXPECT_EQ(code(call(R"({"jsonrpc":"2.0","method":"tools/list","params":3,"id":1})")), rpc::kInvalidRequest);
  EXPECT_EQ(code(call("[]")), rpc::kInvalidRequest);
  EXPECT_EQ(code(call("42")), rpc::kInvalidRequest);
}

TEST_F(Rpc, MethodNotFound) {
  const auto r = call(R"({"jsonrpc":"2.0","method":"tools/delete","id":"a"})");
  EXPECT_EQ(code(r), rpc::kMethodNotFound);
  EXPECT_EQ(r.at("id"), "a");
}

TEST_F(Rpc, InvalidParamsCarryErrorName) {
  const auto missing = call(R"({"jsonrpc":"2.0","method":"tools/call","id":2,
                                "params":{"name":"map_search_places","arguments":{"radius":10}}})");
  EXPECT_EQ(code(missing), rpc::kInvalidParams);
  EXPECT_EQ(missing.at("error").at("data").at("error"), "MissingRequiredParam");
  const auto unknown = call(R"({"jsonrpc":"2.0","method":"tools/call","id":3,"params":{"name":"teleport"}})");
  EXPECT_EQ(code(unknown), rpc::kInvalidParams);
  EXPECT_EQ(unknown.at("error").at("data").at("error"), "UnknownTool");
  const auto shape = call(R"({"jsonrpc":"2.0","method":"tools/call","id":4,"params":{"arguments":{}}})");
  EXPECT_EQ(code(shape), rpc::kInvalidParams);
}

TEST_F(Rpc, ToolErrors) {
  const auto r = call(R"({"jsonrpc":"2.0","method":"tools/call","id":5,
                          "params":{"name":"weather_forecast_days","arguments":{"location":"haikou","days":6}}})");
  EXPECT_EQ(code(r), rpc::kToolError);
  EXPECT_EQ(r.at("error").at("data").at("error"), "ForecastHorizonExceeded");
}

TEST_F(Rpc, CallReportsCacheHits) {
  const std::string body = R"({"jsonrpc":"2.0","method":"tools/call","id":6,
      "params":{"name":"web_search","arguments":{"query":"night market"}}})";
  const auto a = call(body);
  const auto b = call(body);
  EXPECT_EQ(a.at("id"), 6);
  EXPECT_FALSE(a.at("result").at("cache_hit").get<bool>());
  EXPECT_TRUE(b.at("result").at("cache_hit").get<bool>());
  EXPECT_EQ(a.at("result").at("data"), b.at("result").at("data"));
  EXPECT_EQ(a.at("result").at("text"), b.at("result").at("text"));
  const auto stats = call(R"({"jsonrpc":"2.0","method":"sandbox/stats","id":7})").at("result");
  EXPECT_EQ(stats.at("executions"), 1);
  EXPECT_EQ(stats.at("cache_hits"), 1);
  EXPECT_EQ(stats.at("cache_misses"), 1);
  EXPECT_EQ(stats.at("cache_size"), 1);
}

TEST_F(Rpc, ToolsList) {
  const auto tools = call(R"({"jsonrpc":"2.0","method":"tools/list","id":null})").at("result").at("tools");
  ASSERT_EQ(tools.size(), 10u);
  EXPECT_EQ(tools[0].at("name"), "map_search_places");
}

TEST_F(Rpc, NotificationsAndBatches) {
  EXPECT_FALSE(handle_rpc(sb_, R"({"jsonrpc":"2.0","method":"tools/list"})").has_value());
  EXPECT_FALSE(handle_rpc(sb_, R"([{"jsonrpc":"2.0","method":"sandbox/stats"}])").has_value());
  const auto batch = call(R"([{"jsonrpc":"2.0","method":"tools/list","id":1},
                              {"jsonrpc":"2.0","method":"sandbox/stats"},
                              {"jsonrpc":"2.0","method":"nope","id":2},
                              5])");
  ASSERT_EQ(batch.size(), 3u);
  EXPECT_EQ(batch[0].at("id"), 1);
  EXPECT_EQ(code(batch[1]), rpc::kMethodNotFound);
  EXPECT_EQ(code(batch[2]), rpc::kInvalidRequest);
}

TEST(LiveServer, ServesOverHttp) {
  Sandbox sb(SyntheticWorld::generate(4, 200));
  Server server(sb, 4);
  const int port = server.bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  std::thread t([&] { server.run(); });
  httplib::Client client("127.0.0.1", port);
  client.set_keep_alive(true);
  client.set_tcp_nodelay(true);
  const std::string body = R"({"jsonrpc":"2.0","method":"tools/call","id":1,
      "params":{"name":"map_search_ranking_list","arguments":{"category":"hotel"}}})";
  for (int i = 0; i < 3; ++i) {
    const auto res = client.Post("/rpc", body, "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(json::parse(res->body).at("result").at("cache_hit").get<bool>(), i > 0);
  }
  const auto note = client.Post("/rpc", R"({"jsonrpc":"2.0","method":"tools/list"})", "application/json");
  ASSERT_TRUE(note);
  EXPECT_EQ(note->status, 204);
  server.stop();
  t.join();
  EXPECT_EQ(sb.stats().executions, 1u);
}

}  // namespace
}  // namespace stforge::sandbox
