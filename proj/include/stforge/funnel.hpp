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

// Three-stage redundancy funnel: lexical MinHash/LSH dedup over the whole
// corpus, semantic threshold pruning inside <primary, secondary> intent
// buckets, then global K-Center-Greedy selection.

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stforge/corpus.hpp"
#include "stforge/embedding_io.hpp"

namespace stforge::funnel {

struct FunnelConfig {
  int shingle_k = 3;
  std::size_t num_hashes = 256;
  std::size_t lsh_bands = 32;
  std::size_t lsh_rows = 8;
  double jaccard_threshold = 0.85;
  double semantic_distance_threshold = 0.15;  // cosine distance
  std::size_t kcenter_target = 200000;
  std::uint64_t rng_seed = 0;

  // Buckets larger than this use the approximate cosine index instead of an
  // exhaustive scan.
  std::size_t exhaustive_limit = 10000;
  std::size_t ann_tables = 16;
  std::size_t ann_bits = 8;

  /// Throws Error("InvalidConfig").
  void validate() const;
};

struct MinHashSignature {
  std::vector<std::uint64_t> values;
  std::uint64_t seed = 0;
  int shingle_k = 0;
  bool operator==(const MinHashSignature&) const = default;
};

/// k-grams of Unicode scalars over text::normalize(text).
std::set<std::string> shingle(std::string_view text, int k);

MinHashSignature minhash_signature(const std::set<std::string>& shingles, const FunnelConfig& cfg);

/// Fraction of equal coordinates. Throws Error("SignatureMismatch").
double jaccard_estimate(const MinHashSignature& a, const MinHashSignature& b);

enum class Stage { Lexical, Semantic, Geometric };
std::string_view to_string(Stage s);

struct DropEntry {
  std::string survivor;  // the id that survived this stage and absorbed the drops
  Stage stage = Stage::Lexical;
  std::vector<std::string> dropped;  // sorted
  bool operator==(const DropEntry&) const = default;
};

struct StageCounts {
  std::size_t input = 0;
  std::size_t after_lexical = 0;
  std::size_t after_semantic = 0;
  std::size_t after_geometric = 0;
  bool operator==(const StageCounts&) const = default;
};

struct CuratedSet {
  std::vector<std::string> surviving_ids;  // ascending
  std::vector<DropEntry> drop_log;         // ordered by (stage, survivor)
  StageCounts stage_counts;
  bool operator==(const CuratedSet&) const = default;
};

/// Stage 1. Within each duplicate class the lexicographically smallest id
/// survives. Throws Error("DuplicateId").
CuratedSet lexical_dedup(std::span<const Query> corpus, const FunnelConfig& cfg);

struct SemanticOptions {
  std::size_t exhaustive_limit = 10000;
  std::size_t ann_tables = 16;
  std::size_t ann_bits = 8;
  std::uint64_t seed = 0;
};

struct SemanticResult {
  std::vector<std::size_t> survivors;                       // row indices, ascending-id order
  std::vector<std::pair<std::size_t, std::size_t>> drops;   // (dropped row, retaining row)
};

/// Greedy scan in ascending id order; a row survives iff its cosine distance
/// to every earlier survivor exceeds threshold. Throws Error("ZeroVector").
SemanticResult semantic_dedup_detailed(const EmbeddingMatrix& bucket, double threshold,
                                       const SemanticOptions& opts = {});
std::vector<std::size_t> semantic_dedup(const EmbeddingMatrix& bucket, double threshold,
                                        const SemanticOptions& opts = {});

/// Ordered selection starting at seed_index. Throws Error("KOutOfRange").
std::vector<std::size_t> kcenter_greedy(const EmbeddingMatrix& points, std::size_t k,
                                        std::size_t seed_index);

/// Composes the three stages. Throws Error("MissingEmbedding") when a
/// lexical survivor has no embedding row.
CuratedSet run_funnel(std::span<const Query> corpus, const EmbeddingMatrix& embeddings,
                      const FunnelConfig& cfg);

/// One JSON object per (stage, survivor): {"survivor","dropped","stage"}.
std::string drop_log_jsonl(const CuratedSet& set);

/// Bucket key for the semantic stage: primary intent plus ordered secondaries.
std::string bucket_key(const Query& q);

}  // namespace stforge::funnel
