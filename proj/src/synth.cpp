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
#include "stforge/synth.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <numeric>

#include "stforge/error.hpp"

namespace stforge::synth {

namespace {

enum : std::uint64_t { kText = 1, kVariant, kEmbed, kAssign, kShuffle };

constexpr std::array<std::string_view, 24> kTravelWords{
    "gas",   "station", "hotel",  "route", "near",   "airport", "train",  "ticket",
    "cheap", "open",    "now",    "best",  "coffee", "parking", "museum", "weather",
    "drive", "walk",    "subway", "park",  "beach",  "tomorrow", "food",  "mall"};

std::string pseudo_word(SplitMix64& rng) {
  static constexpr std::string_view kLetters = "abcdefghijklmnopqrstuvwxyz";
  const auto len = 3 + rng.below(6);
  std::string w;
  for (std::uint64_t i = 0; i < len; ++i) w += kLetters[rng.below(kLetters.size())];
  return w;
}

std::vector<float> random_direction(SplitMix64& rng, std::uint32_t dim) {
  std::vector<float> v(dim);
  for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  return v;
}

std::string make_id(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "q%07zu", i);
  return buf;
}

}  // namespace

std::string random_text(SplitMix64& rng, std::size_t mean_chars) {
  const std::size_t target = mean_chars / 2 + rng.below(mean_chars + 1);
  std::string out;
  while (out.size() < target) {
    if (!out.empty()) out += ' ';
    // one word in three comes from a small domain vocabulary
    out += rng.below(3) == 0 ? std::string(kTravelWords[rng.below(kTravelWords.size())]) : pseudo_word(rng);
  }
  return out;
}

std::string surface_variant(SplitMix64& rng, const std::string& text) {
  std::string out;
  for (const char c : text) {
    if (c == ' ' && rng.below(4) == 0) {
      out += "  ";
    } else if (c >= 'a' && c <= 'z' && rng.below(5) == 0) {
      out += static_cast<char>(c - 'a' + 'A');
    } else {
      out += c;
    }
  }
  if (rng.below(2) == 0) out += '?';
  if (rng.below(3) == 0) out = " " + out + " ";
  return out;
}

SyntheticCorpus make_corpus(const Taxonomy& tax, const CorpusSpec& spec) {
  if (spec.lexical_clusters > spec.base_queries || spec.semantic_clusters > spec.base_queries) {
    fail("InvalidConfig", "more planted clusters than base queries");
  }
  if (spec.dim == 0 || spec.mean_chars < 4) fail("InvalidConfig", "dim must be positive and mean_chars >= 4");
  const auto leaves = tax.leaf_ids(false);
  if (spec.intents == 0 || spec.intents > leaves.size()) {
    fail("InvalidConfig", "intent count must lie in 1.." + std::to_string(leaves.size()));
  }
  SplitMix64 assign(stream_seed(spec.seed, kAssign, 0));
  std::vector<std::string> intents;
  {
    std::vector<std::size_t> idx(leaves.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < spec.intents; ++i) {
      std::swap(idx[i], idx[i + assign.below(idx.size() - i)]);
      intents.push_back(leaves[idx[i]]);
    }
  }

  SyntheticCorpus out;
  struct Row {
    Query q;
    std::vector<float> emb;
  };
  std::vector<Row> rows;
  const std::size_t total = spec.base_queries + spec.lexical_clusters * spec.lexical_copies +
                            spec.semantic_clusters * spec.semantic_copies;
  rows.reserve(total);

  for (std::size_t i = 0; i < spec.base_queries; ++i) {
    SplitMix64 trng(stream_seed(spec.seed, kText, i));
    SplitMix64 erng(stream_seed(spec.seed, kEmbed, i));
    Query q;
    q.id = make_id(i);
    q.text = random_text(trng, spec.mean_chars);
    q.annotation = AnnotationVector{intents[assign.below(intents.size())], {}, {}, std::nullopt};
    q.difficulty = static_cast<int>(assign.below(kMaxDifficulty - kMinDifficulty + 1)) + kMinDifficulty;
    rows.push_back({std::move(q), random_direction(erng, spec.dim)});
  }

  std::size_t next_id = spec.base_queries;
  const auto add_copies = [&](std::size_t clusters, std::size_t copies, bool lexical, auto& sink) {
    for (std::size_t c = 0; c < clusters; ++c) {
      // lexical clusters take originals from the front, semantic from the back
      const std::size_t src = lexical ? c : spec.base_queries - 1 - c;
      std::vector<std::string> cluster{rows[src].q.id};
      for (std::size_t k = 0; k < copies; ++k) {
        const std::size_t id = next_id++;
        SplitMix64 vrng(stream_seed(spec.seed, kVariant, id));
        Row r{rows[src].q, rows[src].emb};
        r.q.id = make_id(id);
        if (lexical) {
          r.q.text = surface_variant(vrng, rows[src].q.text);
        } else {
          r.q.text = random_text(vrng, spec.mean_chars);
        }
        const double noise = lexical ? 0.05 : 0.3;
        for (auto& x : r.emb) x += static_cast<float>(vrng.uniform(-noise, noise));
        cluster.push_back(r.q.id);
        rows.push_back(std::move(r));
      }
      sink.push_back(std::move(cluster));
    }
  };
  add_copies(spec.lexical_clusters, spec.lexical_copies, true, out.lexical);
  add_copies(spec.semantic_clusters, spec.semantic_copies, false, out.semantic);

  out.embeddings.dim = spec.dim;
  out.embeddings.rows.reserve(rows.size() * spec.dim);
  for (const auto& r : rows) {
    out.embeddings.ids.push_back(r.q.id);
    out.embeddings.rows.insert(out.embeddings.rows.end(), r.emb.begin(), r.emb.end());
  }

  SplitMix64 shuffle(stream_seed(spec.seed, kShuffle, 0));
  for (std::size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[shuffle.below(i)]);
  out.queries.reserve(rows.size());
  for (auto& r : rows) out.queries.push_back(std::move(r.q));
  return out;
}

}  // namespace stforge::synth
