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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stforge {

/// Dense row-major float32 embeddings with a parallel id list.
struct EmbeddingMatrix {
  std::uint32_t dim = 0;
  std::vector<float> rows;
  std::vector<std::string> ids;

  std::size_t count() const noexcept { return ids.size(); }
  std::span<const float> row(std::size_t i) const noexcept {
    return {rows.data() + i * dim, dim};
  }

  /// Throws Error("InvalidEmbedding") on shape mismatch, non-finite entries
  /// or duplicate ids.
  void validate() const;

  /// Copy of the given rows, in the given order.
  EmbeddingMatrix select(std::span<const std::size_t> indices) const;
};

// Sidecar layout (little-endian): "STFE", u16 version = 1, u32 dim, u64 count,
// count*dim float32 row-major, then count '\n'-terminated UTF-8 ids.
inline constexpr std::uint16_t kEmbeddingFormatVersion = 1;

std::string encode_embeddings(const EmbeddingMatrix& m);
/// Throws Error("MalformedEmbeddingFile").
EmbeddingMatrix decode_embeddings(std::string_view bytes);

EmbeddingMatrix read_embeddings(const std::filesystem::path& path);
void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m);

}  // namespace stforge
