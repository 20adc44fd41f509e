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

// Tool dispatch: normalization, a shared LRU response cache keyed by a
// SHA-256 digest, single-flight coalescing of identical misses, and an
// execution counter.

#include <array>
#include <atomic>
#include <cstdint>
#include <future>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "stforge/error.hpp"
#include "stforge/sandbox/lru.hpp"
#include "stforge/sandbox/normalize.hpp"
#include "stforge/sandbox/schema.hpp"
#include "stforge/sandbox/tools.hpp"
#include "stforge/sandbox/world.hpp"

namespace stforge::sandbox {

/// Raised by dispatch when the arguments fail normalization (or name no
/// tool); keeps the underlying error kind. The wire layer maps it to -32602.
class InvalidParams : public Error {
 public:
  InvalidParams(const std::string& kind, const std::string& detail) : Error(kind, detail) {}
};

struct CacheKey {
  std::array<std::uint8_t, 32> digest{};
  bool operator==(const CacheKey&) const = default;
  std::string hex() const;
};

struct CacheKeyHash {
  std::size_t operator()(const CacheKey& k) const noexcept;
};

/// SHA-256(tool ‖ 0x00 ‖ canonical).
CacheKey make_cache_key(std::string_view tool, std::string_view canonical);

struct ToolResponse {
  std::string tool;
  std::string text;
  nlohmann::ordered_json data;
  bool cache_hit = false;
  std::int64_t latency_ms = 0;
};

struct SandboxStats {
  std::uint64_t executions = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
  std::size_t cache_size = 0;
};

inline constexpr std::size_t kDefaultCacheCapacity = 65536;

class Sandbox {
 public:
  Sandbox(SyntheticWorld world, Registry registry = Registry::standard(),
          std::size_t cache_capacity = kDefaultCacheCapacity);

  /// Thread-safe. Throws InvalidParams for UnknownTool and normalization
  /// errors, plain Error for tool execution failures.
  ToolResponse dispatch(std::string_view tool, const nlohmann::json& params);

  /// Fresh execution that bypasses and does not touch the cache or counters.
  ToolOutput execute_uncached(std::string_view tool, const nlohmann::json& params) const;

  SandboxStats stats() const;
  const Registry& registry() const noexcept { return registry_; }
  const SyntheticWorld& world() const noexcept { return world_; }

 private:
  using Result = std::shared_ptr<const ToolOutput>;

  const SyntheticWorld world_;
  const Registry registry_;
  mutable std::mutex mu_;
  LruCache<CacheKey, Result, CacheKeyHash> cache_;
  std::unordered_map<CacheKey, std::shared_future<Result>, CacheKeyHash> inflight_;
  std::atomic<std::uint64_t> executions_{0};
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
};

}  // namespace stforge::sandbox
