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
#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "stforge/embedding_io.hpp"
#include "stforge/rng.hpp"
#include "support/test_support.hpp"

namespace stforge {
namespace {

EmbeddingMatrix random_matrix(std::uint64_t seed, std::size_t n, std::uint32_t dim) {
  SplitMix64 rng(seed);
  EmbeddingMatrix m;
  m.dim = dim;
  for (std::size_t i = 0; i < n; ++i) {
    m.ids.push_back("id" + std::to_string(i));
    for (std::uint32_t j = 0; j < dim; ++j) m.rows.push_back(static_cast<float>(rng.uniform(-1, 1)));
  }
  return m;
}

TEST(EmbeddingIo, EncodeDecodeRoundTrip) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = random_matrix(seed, seed * 3, 1 + static_cast<std::uint32_t>(seed % 7));
    const std::string bytes = encode_embeddings(m);
    const auto back = decode_embeddings(bytes);
    EXPECT_EQ(back.dim, m.dim);
    EXPECT_EQ(back.ids, m.ids);
    EXPECT_EQ(back.rows, m.rows);
    EXPECT_EQ(encode_embeddings(back), bytes);
  }
}

TEST(EmbeddingIo, HeaderLayout) {
  EmbeddingMatrix m;
  m.dim = 2;
  m.rows = {1.0f, -2.0f};
  m.ids = {"a"};
  const std::string b = encode_embeddings(m);
  ASSERT_EQ(b.size(), 4u + 2 + 4 + 8 + 8 + 2);
  EXPECT_EQ(b.substr(0, 4), "STFE");
  EXPECT_EQ(static_cast<unsigned char>(b[4]), 1);
  EXPECT_EQ(static_cast<unsigned char>(b[5]), 0);
  EXPECT_EQ(static_cast<unsigned char>(b[6]), 2);
  EXPECT_EQ(static_cast<unsigned char>(b[10]), 1);
  EXPECT_EQ(b.substr(b.size() - 2), "a\n");
}

TEST(EmbeddingIo, FileRoundTrip) {
  testing::TempDir tmp;
  const auto m = random_matrix(9, 50, 16);
  write_embeddings(tmp / "e.stfe", m);
  const auto back = read_embeddings(tmp / "e.stfe");
  EXPECT_EQ(back.rows, m.rows);
  EXPECT_EQ(back.ids, m.ids);
}

TEST(EmbeddingIo, MalformedFiles) {
  const std::string good = encode_embeddings(random_matrix(1, 3, 4));
  EXPECT_ERROR_KIND(decode_embeddings("XXXX"), "MalformedEmbeddingFile");
  EXPECT_ERROR_KIND(decode_embeddings(good.substr(0, good.size() - 1)), "MalformedEmbeddingFile");
  EXPECT_ERROR_KIND(decode_embeddings(good + "x"), "MalformedEmbeddingFile");
  EXPECT_ERROR_KIND(decode_embeddings(good.substr(0, 10)), "MalformedEmbeddingFile");
  std::string bad_version = good;
  bad_version[4] = 9;
  EXPECT_ERROR_KIND(decode_embeddings(bad_version), "MalformedEmbeddingFile");
}

TEST(EmbeddingIo, ValidateRejectsBadMatrices) {
  auto m = random_matrix(2, 3, 4);
  m.rows[5] = std::numeric_limits<float>::quiet_NaN();
  EXPECT_ERROR_KIND(m.validate(), "InvalidEmbedding");
  auto d = random_matrix(2, 3, 4);
  d.ids[2] = d.ids[0];
  EXPECT_ERROR_KIND(d.validate(), "InvalidEmbedding");
  auto s = random_matrix(2, 3, 4);
  s.rows.pop_back();
  EXPECT_ERROR_KIND(s.validate(), "InvalidEmbedding");
}

TEST(EmbeddingIo, SelectKeepsOrder) {
  const auto m = random_matrix(3, 5, 2);
  const std::vector<std::size_t> idx{4, 1};
  const auto s = m.select(idx);
  ASSERT_EQ(s.ids, (std::vector<std::string>{"id4", "id1"}));
  EXPECT_EQ(s.rows[0], m.rows[8]);
  EXPECT_EQ(s.rows[3], m.rows[3]);
}

TEST(EmbeddingIo, MissingFileIsIoError) {
  EXPECT_THROW(read_embeddings("/nonexistent/x.stfe"), IoError);
}

}  // namespace
}  // namespace stforge
