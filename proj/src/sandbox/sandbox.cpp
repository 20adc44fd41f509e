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
#include "stforge/sandbox/sandbox.hpp"

#include <chrono>
#include <cstring>

#include <openssl/evp.h>

#include "stforge/error.hpp"

namespace stforge::sandbox {

std::string CacheKey::hex() const {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (const auto b : digest) {
    out += kHex[b >> 4];
    out += kHex[b & 0xf];
  }
  return out;
}

std::size_t CacheKeyHash::operator()(const CacheKey& k) const noexcept {
  std::size_t h = 0;
  std::memcpy(&h, k.digest.data(), sizeof h);
  return h;
}

CacheKey make_cache_key(std::string_view tool, std::string_view canonical) {
  CacheKey key;
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  const unsigned char sep = 0x00;
  const bool ok = ctx != nullptr && EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, tool.data(), tool.size()) == 1 && EVP_DigestUpdate(ctx, &sep, 1) == 1 &&
                  EVP_DigestUpdate(ctx, canonical.data(), canonical.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, key.digest.data(), &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok || len != key.digest.size()) fail("DigestError", "SHA-256 computation failed");
  return key;
}

Sandbox::Sandbox(SyntheticWorld world, Registry registry, std::size_t cache_capacity)
    : world_(std::move(world)), registry_(std::move(registry)), cache_(cache_capacity) {}

ToolOutput Sandbox::execute_uncached(std::string_view tool, const nlohmann::json& params) const {
  const auto* schema = registry_.find(tool);
  if (!schema) fail("UnknownTool", "no tool named '" + std::string(tool) + "'");
  return run_tool(world_, tool, normalize_params(*schema, params).values);
}

ToolResponse Sandbox::dispatch(std::string_view tool, const nlohmann::json& params) {
  const auto start = std::chrono::steady_clock::now();
  const auto* schema = registry_.find(tool);
  if (!schema) throw InvalidParams("UnknownTool", "no tool named '" + std::string(tool) + "'");
  NormalizedParams norm;
  try {
    norm = normalize_params(*schema, params);
  } catch (const Error& e) {
    throw InvalidParams(e.kind(), e.detail());
  }
  const auto key = make_cache_key(tool, norm.canonical);

  ToolResponse resp;
  resp.tool = std::string(tool);
  Result result;
  std::promise<Result> promise;
  bool leader = false;
  std::shared_future<Result> waiting;
  {
    std::lock_guard lock(mu_);
    if (auto hit = cache_.get(key)) {
      result = std::move(*hit);
    } else if (const auto it = inflight_.find(key); it != inflight_.end()) {
      waiting = it->second;
    } else {
      leader = true;
      inflight_.emplace(key, promise.get_future().share());
    }
  }

  if (result) {
    hits_.fetch_add(1, std::memory_order_relaxed);
    resp.cache_hit = true;
  } else if (!leader) {
    // Coalesced onto an in-flight execution; a failed leader rethrows here.
    result = waiting.get();
    hits_.fetch_add(1, std::memory_order_relaxed);
    resp.cache_hit = true;
  } else {
    misses_.fetch_add(1, std::memory_order_relaxed);
    try {
      executions_.fetch_add(1, std::memory_order_relaxed);
      result = std::make_shared<const ToolOutput>(run_tool(world_, tool, norm.values));
    } catch (...) {
      {
        std::lock_guard lock(mu_);
        inflight_.erase(key);
      }
      promise.set_exception(std::current_exception());
      throw;
    }
    {
      std::lock_guard lock(mu_);
      cache_.put(key, result);
      inflight_.erase(key);
    }
    promise.set_value(result);
  }

  resp.text = result->text;
  resp.data = result->data;
  resp.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  return resp;
}

SandboxStats Sandbox::stats() const {
  SandboxStats s;
  s.executions = executions_.load();
  s.cache_hits = hits_.load();
  s.cache_misses = misses_.load();
  std::lock_guard lock(mu_);
  s.cache_size = cache_.size();
  return s;
}

}  // namespace stforge::sandbox
