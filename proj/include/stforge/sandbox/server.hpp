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

// JSON-RPC 2.0 over HTTP POST /rpc with tools/list, tools/call and
// sandbox/stats.

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "stforge/sandbox/sandbox.hpp"

namespace stforge::sandbox {

namespace rpc {
inline constexpr int kParseError = -32700;
inline constexpr int kInvalidRequest = -32600;
inline constexpr int kMethodNotFound = -32601;
inline constexpr int kInvalidParams = -32602;
inline constexpr int kToolError = -32000;
}  // namespace rpc

/// Handles one HTTP body (single request or batch). Returns nullopt when
/// every request was a notification.
std::optional<std::string> handle_rpc(Sandbox& sandbox, std::string_view body);

class Server {
 public:
  explicit Server(Sandbox& sandbox, std::size_t worker_threads = 64);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds host:port (port 0 picks a free port) and returns the bound port.
  /// Errors: IoError.
  int bind(const std::string& host, int port);
  /// Serves until stop(); in-flight requests finish before it returns.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace stforge::sandbox
