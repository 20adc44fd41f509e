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
#include "stforge/embedding_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "stforge/corpus.hpp"
#include "stforge/error.hpp"

namespace stforge {

namespace {

template <typename T>
void put_le(std::string& out, T v) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(u & 0xffu));
    u = static_cast<U>(u >> 8);
  }
}

template <typename T>
T get_le(std::string_view bytes, std::size_t& pos) {
  if (bytes.size() - pos < sizeof(T)) fail("MalformedEmbeddingFile", "truncated header or payload");
  std::make_unsigned_t<T> u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    u |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
  }
  pos += sizeof(T);
  return static_cast<T>(u);
}

}  // namespace

void EmbeddingMatrix::validate() const {
  if (dim == 0) fail("InvalidEmbedding", "dim must be >= 1");
  if (rows.size() != static_cast<std::size_t>(dim) * ids.size()) {
    fail("InvalidEmbedding", "row data does not match dim x count");
  }
  for (const float v : rows) {
    if (!std::isfinite(v)) fail("InvalidEmbedding", "non-finite entry");
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) fail("InvalidEmbedding", "duplicate id '" + id + "'");
  }
}

EmbeddingMatrix EmbeddingMatrix::select(std::span<const std::size_t> indices) const {
  EmbeddingMatrix out;
  out.dim = dim;
  out.rows.reserve(indices.size() * dim);
  out.ids.reserve(indices.size());
  for (const std::size_t i : indices) {
    const auto r = row(i);
    out.rows.insert(out.rows.end(), r.begin(), r.end());
    out.ids.push_back(ids[i]);
  }
  return out;
}

std::string encode_embeddings(const EmbeddingMatrix& m) {
  std::string out = "STFE";
  put_le<std::uint16_t>(out, kEmbeddingFormatVersion);
  put_le<std::uint32_t>(out, m.dim);
  put_le<std::uint64_t>(out, m.count());
  out.reserve(out.size() + m.rows.size() * 4);
  for (const float v : m.rows) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  for (const auto& id : m.ids) {
    if (id.find('\n') != std::string::npos) fail("InvalidEmbedding", "id contains a newline");
    out += id;
    out += '\n';
  }
  return out;
}

EmbeddingMatrix decode_embeddings(std::string_view bytes) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != "STFE") fail("MalformedEmbeddingFile", "bad magic");
  std::size_t pos = 4;
  const auto version = get_le<std::uint16_t>(bytes, pos);
  if (version != kEmbeddingFormatVersion) {
    fail("MalformedEmbeddingFile", "unsupported version " + std::to_string(version));
  }
  EmbeddingMatrix m;
  m.dim = get_le<std::uint32_t>(bytes, pos);
  const auto count = get_le<std::uint64_t>(bytes, pos);
  if (m.dim == 0 && count > 0) fail("MalformedEmbeddingFile", "dim is zero");
  if (m.dim != 0 && count > (bytes.size() - pos) / 4 / m.dim) {
    fail("MalformedEmbeddingFile", "count exceeds payload size");
  }
  const std::size_t n = static_cast<std::size_t>(count) * m.dim;
  m.rows.resize(n);
  for (std::size_t i = 0; i < n; ++i) m.rows[i] = std::bit_cast<float>(get_le<std::uint32_t>(bytes, pos));
  m.ids.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) fail("MalformedEmbeddingFile", "missing id terminator");
    m.ids.emplace_back(bytes.substr(pos, nl - pos));
    pos = nl + 1;
  }
  if (pos != bytes.size()) fail("MalformedEmbeddingFile", "trailing bytes after ids");
  m.validate();
  return m;
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return decode_embeddings(ss.str());
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m) {
  write_text(path, encode_embeddings(m));
}

}  // namespace stforge
