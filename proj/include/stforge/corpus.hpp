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

// Canonical data model shared by every stage: taxonomy, annotated queries and
// tool-integrated trajectories, plus their line-oriented JSON file formats.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace stforge {

inline constexpr std::string_view kOtherOrUnclear = "other_or_unclear";

struct TaxonomyNode {
  std::string id;  // dot path; empty for the root
  std::string label;
  int level = 0;   // 0 for the root, 1..3 below it
  bool is_other = false;
  bool placeholder = false;  // reconstructed name, not attested in source material
  std::vector<TaxonomyNode> children;

  bool is_leaf() const noexcept { return children.empty(); }
};

/// A validated, immutable intent taxonomy with id lookup. Copies share the
/// underlying tree.
class Taxonomy {
 public:
  static Taxonomy from_json(const nlohmann::ordered_json& doc);

  const TaxonomyNode& root() const noexcept { return *root_; }
  const TaxonomyNode* find(std::string_view id) const;
  /// Id of the parent node; nullopt for the root or unknown ids.
  std::optional<std::string> parent_of(std::string_view id) const;
  bool is_leaf(std::string_view id) const;

  /// Non-Other nodes at a given level (1..3).
  std::size_t count_level(int level) const;
  /// Non-Other leaves.
  std::size_t count_leaves() const;
  std::vector<std::string> leaf_ids(bool include_other) const;
  /// Every non-leaf node id, root ("") included, in pre-order.
  std::vector<std::string> internal_ids() const;

  nlohmann::ordered_json to_json() const;

 private:
  std::shared_ptr<const TaxonomyNode> root_;
  std::unordered_map<std::string, const TaxonomyNode*> by_id_;
  std::unordered_map<std::string, std::string> parent_;
};

/// Throws IoError or Error("MalformedTaxonomy").
Taxonomy load_taxonomy(const std::filesystem::path& path);
std::string serialize_taxonomy(const Taxonomy& tax);

struct TemporalDetails {
  std::optional<std::string> departure;
  std::optional<std::string> arrival;
  bool operator==(const TemporalDetails&) const = default;
};

struct AnnotationVector {
  std::string primary_intent;
  std::vector<std::string> secondary_intents;  // ordered by importance, <= 3
  std::vector<std::string> constraints;
  std::optional<TemporalDetails> temporal_details;
  bool operator==(const AnnotationVector&) const = default;
};

inline constexpr std::size_t kMaxSecondaryIntents = 3;

/// Checks ids against the taxonomy; returns the vector unchanged.
/// Errors: UnknownIntentId, TooManySecondary, DuplicateIntent.
const AnnotationVector& validate_annotation(const AnnotationVector& av, const Taxonomy& tax);

inline constexpr int kMinDifficulty = -1;
inline constexpr int kMaxDifficulty = 5;

struct Query {
  std::string id;
  std::string text;
  std::optional<AnnotationVector> annotation;
  std::optional<int> difficulty;
  std::optional<nlohmann::ordered_json> user_profile;  // opaque object
};

enum class StepKind { AssistantText, ToolCall, ToolObservation };

std::string_view to_string(StepKind kind);

struct TokenRecord {
  double logp_policy = 0.0;
  std::optional<double> logp_old;
  std::optional<double> logp_ref;
};

struct Step {
  StepKind kind = StepKind::AssistantText;
  std::string text;
  std::optional<std::vector<TokenRecord>> tokens;
  bool masked = false;

  std::size_t token_count() const noexcept { return tokens ? tokens->size() : 0; }
};

struct Trajectory {
  std::string query_id;
  std::vector<Step> steps;
  std::int64_t token_count = 0;
};

// Line formats. parse_* throw Error("MalformedRecord") with the offending field;
// serialize_* produce a single line without the trailing newline.
Query parse_query(std::string_view line);
std::string serialize_query(const Query& q);
Trajectory parse_trajectory(std::string_view line);
std::string serialize_trajectory(const Trajectory& t);

AnnotationVector annotation_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json annotation_to_json(const AnnotationVector& av);

std::vector<Query> read_corpus(const std::filesystem::path& path);
void write_corpus(const std::filesystem::path& path, std::span<const Query> queries);
std::vector<Trajectory> read_trajectories(const std::filesystem::path& path);
void write_trajectories(const std::filesystem::path& path, std::span<const Trajectory> ts);

/// Reads non-empty lines; throws IoError when the file cannot be opened.
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view contents);

struct OtherBucket {
  std::size_t count = 0;
  std::vector<std::string> sample_ids;
};

struct OtherBucketReport {
  // Keyed by non-leaf node id (root is ""), every internal node present.
  std::map<std::string, OtherBucket> buckets;
  std::size_t other_total = 0;
  std::size_t unannotated = 0;
};

/// Counts primary intents that land in an Other child, grouped by the parent
/// node. At most max_samples ids are kept per bucket, in corpus order.
OtherBucketReport other_bucket_report(std::span<const Query> corpus, const Taxonomy& tax,
                                      std::size_t max_samples = 5);

}  // namespace stforge
