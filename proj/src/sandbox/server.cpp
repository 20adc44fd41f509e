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
#include "stforge/sandbox/server.hpp"

#include <httplib.h>

#include "stforge/error.hpp"

namespace stforge::sandbox {

namespace {

using Json = nlohmann::json;
using OJson = nlohmann::ordered_json;

// Ids are scalars; copy them across the two json flavours by value.
OJson to_ojson(const Json& id) {
  if (id.is_string()) return id.get<std::string>();
  if (id.is_number_unsigned()) return id.get<std::uint64_t>();
  if (id.is_number_integer()) return id.get<std::int64_t>();
  if (id.is_number_float()) return id.get<double>();
  return nullptr;
}

OJson error_response(const Json& id, int code, const std::string& message, const std::optional<std::string>& kind = {}) {
  OJson err = {{"code", code}, {"message", message}};
  if (kind) err["data"] = {{"error", *kind}};
  return {{"jsonrpc", "2.0"}, {"error", err}, {"id", to_ojson(id)}};
}

OJson result_response(const Json& id, OJson result) {
  return {{"jsonrpc", "2.0"}, {"result", std::move(result)}, {"id", to_ojson(id)}};
}

bool valid_id(const Json& id) { return id.is_string() || id.is_number() || id.is_null(); }

// Returns nullopt for notifications.
std::optional<OJson> handle_one(Sandbox& sb, const Json& req) {
  if (!req.is_object()) return error_response(nullptr, rpc::kInvalidRequest, "Invalid Request");
  const bool notification = !req.contains("id");
  const Json id = notification ? Json(nullptr) : req["id"];
  if (!valid_id(id) || !req.contains("jsonrpc") || req["jsonrpc"] != "2.0" || !req.contains("method") ||
      !req["method"].is_string() ||
      (req.contains("params") && !req["params"].is_object() && !req["params"].is_array())) {
    return error_response(valid_id(id) ? id : Json(nullptr), rpc::kInvalidRequest, "Invalid Request");
  }
  const auto& method = req["method"].get_ref<const std::string&>();
  const Json params = req.contains("params") ? req["params"] : Json::object();

  OJson reply;
  if (method == "tools/list") {
    OJson tools = OJson::array();
    for (const auto& t : sb.registry().tools()) tools.push_back(t.to_json());
    reply = result_response(id, {{"tools", tools}});
  } else if (method == "tools/call") {
    if (!params.is_object() || !params.contains("name") || !params["name"].is_string() ||
        (params.contains("arguments") && !params["arguments"].is_object() && !params["arguments"].is_null())) {
      reply = error_response(id, rpc::kInvalidParams, "tools/call needs a string name and an arguments object",
                             "InvalidParams");
    } else {
      const Json args = params.contains("arguments") ? params["arguments"] : Json::object();
      try {
        const auto r = sb.dispatch(params["name"].get<std::string>(), args);
        reply = result_response(id, {{"tool", r.tool},
                                     {"text", r.text},
                                     {"data", r.data},
                                     {"cache_hit", r.cache_hit},
                                     {"latency_ms", r.latency_ms}});
      } catch (const InvalidParams& e) {
        reply = error_response(id, rpc::kInvalidParams, e.detail(), e.kind());
      } catch (const Error& e) {
        reply = error_response(id, rpc::kToolError, e.detail(), e.kind());
      } catch (const std::exception& e) {
        reply = error_response(id, rpc::kToolError, e.what(), "InternalError");
      }
    }
  } else if (method == "sandbox/stats") {
    const auto s = sb.stats();
    reply = result_response(id, {{"executions", s.executions},
                                 {"cache_hits", s.cache_hits},
                                 {"cache_misses", s.cache_misses},
                                 {"cache_size", s.cache_size}});
  } else {
    reply = error_response(id, rpc::kMethodNotFound, "Method not found: " + method);
  }
  if (notification) return std::nullopt;
  return reply;
}

}  // namespace

std::optional<std::string> handle_rpc(Sandbox& sandbox, std::string_view body) {
  Json req;
  try {
    req = Json::parse(body);
  } catch (const Json::exception&) {
    return error_response(nullptr, rpc::kParseError, "Parse error").dump();
  }
  if (req.is_array()) {
    if (req.empty()) return error_response(nullptr, rpc::kInvalidRequest, "Invalid Request").dump();
    OJson out = OJson::array();
    for (const auto& r : req) {
      if (auto reply = handle_one(sandbox, r)) out.push_back(std::move(*reply));
    }
    if (out.empty()) return std::nullopt;
    return out.dump();
  }
  auto reply = handle_one(sandbox, req);
  if (!reply) return std::nullopt;
  return reply->dump();
}

struct Server::Impl {
  Sandbox& sandbox;
  httplib::Server http;
};

Server::Server(Sandbox& sandbox, std::size_t worker_threads) : impl_(new Impl{sandbox, {}}) {
  impl_->http.new_task_queue = [worker_threads] { return new httplib::ThreadPool(worker_threads); };
  impl_->http.set_keep_alive_max_count(1000000);
  impl_->http.set_tcp_nodelay(true);
  impl_->http.Post("/rpc", [this](const httplib::Request& req, httplib::Response& res) {
    if (auto body = handle_rpc(impl_->sandbox, req.body)) {
      res.set_content(*body, "application/json");
    } else {
      res.status = 204;
    }
  });
}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->http.bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind " + host + ":0");
    return bound;
  }
  if (!impl_->http.bind_to_port(host, port)) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void Server::run() { impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_) impl_->http.stop();
}

}  // namespace stforge::sandbox
