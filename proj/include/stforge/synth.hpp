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

// Seeded synthetic corpora with planted lexical and semantic duplicate
// clusters. Used by the test suite, the benchmark and the fixture generator.

#include <cstdint>
#include <string>
#include <vector>

#include "stforge/corpus.hpp"
#include "stforge/embedding_io.hpp"
#include "stforge/rng.hpp"

namespace stforge::synth {

struct CorpusSpec {
  std::size_t base_queries = 1000;    // mutually distinct originals
  std::size_t lexical_clusters = 50;  // originals that get surface-level copies
  std::size_t lexical_copies = 2;     // copies per such original
  std::size_t semantic_clusters = 50; // originals that get paraphrases
  std::size_t semantic_copies = 1;
  std::size_t mean_chars = 40;
  std::uint32_t dim = 32;
  std::size_t intents = 6;            // distinct primary intents drawn from the taxonomy
  std::uint64_t seed = 0;
};

struct SyntheticCorpus {
  std::vector<Query> queries;  // shuffled
  EmbeddingMatrix embeddings;  // same id set as queries, ascending id order
  // Each planted cluster lists its original first.
  std::vector<std::vector<std::string>> lexical;
  std::vector<std::vector<std::string>> semantic;
};

/// Random text of roughly mean_chars characters built from pseudo-words.
std::string random_text(SplitMix64& rng, std::size_t mean_chars);

/// Surface variant: case flips, doubled spaces, trailing punctuation. Its
/// normalized shingle set stays within a couple of shingles of the source.
std::string surface_variant(SplitMix64& rng, const std::string& text);

/// Errors: InvalidConfig when the cluster counts exceed base_queries or the
/// taxonomy has fewer leaves than requested intents.
SyntheticCorpus make_corpus(const Taxonomy& tax, const CorpusSpec& spec);

}  // namespace stforge::synth
