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
#include "stforge/funnel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "stforge/error.hpp"
#include "stforge/parallel.hpp"
#include "stforge/funnel_kernels.hpp"
#include "stforge/rng.hpp"
#include "stforge/text.hpp"

namespace stforge::funnel {

namespace {

constexpr std::uint64_t kAnnStream = 0x616e6e6c7368ULL;  // "annlsh"

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent_[a] = b;
  }

 private:
  std::vector<std::size_t> parent_;
};

std::vector<std::uint64_t> shingle_hashes(std::string_view normalized, int k) {
  const auto sc = text::scalars(normalized);
  const auto uk = static_cast<std::size_t>(k);
  std::vector<std::uint64_t> out;
  if (sc.size() < uk) return out;
  out.reserve(sc.size() - uk + 1);
  for (std::size_t i = 0; i + uk <= sc.size(); ++i) {
    const char* begin = sc[i].data();
    const char* end = sc[i + uk - 1].data() + sc[i + uk - 1].size();
    out.push_back(fnv1a64(std::string_view(begin, static_cast<std::size_t>(end - begin))));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::uint64_t band_key(const std::uint64_t* values, std::size_t rows, std::size_t band) {
  std::uint64_t h = mix64(band + 1);
  for (std::size_t r = 0; r < rows; ++r) h = mix64(h ^ values[r]);
  return h;
}

void sort_drop_log(std::vector<DropEntry>& log) {
  for (auto& e : log) std::sort(e.dropped.begin(), e.dropped.end());
  std::sort(log.begin(), log.end(), [](const DropEntry& a, const DropEntry& b) {
    if (a.stage != b.stage) return a.stage < b.stage;
    return a.survivor < b.survivor;
  });
}

// Unit-normalizes rows; throws ZeroVector.
std::vector<double> unit_rows(const EmbeddingMatrix& m) {
  std::vector<double> out(m.rows.size());
  for (std::size_t i = 0; i < m.count(); ++i) {
    double norm2 = 0.0;
    for (std::size_t d = 0; d < m.dim; ++d) {
      const double v = m.rows[i * m.dim + d];
      norm2 += v * v;
    }
    if (norm2 == 0.0) fail("ZeroVector", "embedding row '" + m.ids[i] + "' has zero norm");
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t d = 0; d < m.dim; ++d) out[i * m.dim + d] = m.rows[i * m.dim + d] * inv;
  }
  return out;
}

// Random-hyperplane LSH over survivors; candidates are verified exactly.
kernels::ScanResult approximate_scan(const std::vector<double>& rows, std::size_t dim,
                                     std::span<const std::size_t> order, double threshold,
                                     const SemanticOptions& opts) {
  const std::size_t planes = opts.ann_tables * opts.ann_bits;
  std::vector<double> normals(planes * dim);
  SplitMix64 rng(stream_seed(opts.seed, kAnnStream, dim));
  for (double& v : normals) v = rng.uniform() + rng.uniform() + rng.uniform() + rng.uniform() - 2.0;

  std::vector<std::unordered_map<std::uint32_t, std::vector<std::size_t>>> tables(opts.ann_tables);
  std::vector<std::uint32_t> keys(opts.ann_tables);
  std::vector<std::size_t> candidates;
  kernels::ScanResult res;
  for (const std::size_t r : order) {
    const double* row = rows.data() + r * dim;
    for (std::size_t t = 0; t < opts.ann_tables; ++t) {
      std::uint32_t key = 0;
      for (std::size_t b = 0; b < opts.ann_bits; ++b) {
        const double* n = normals.data() + (t * opts.ann_bits + b) * dim;
        if (kernels::dot(row, n, dim) >= 0.0) key |= 1u << b;
      }
      keys[t] = key;
    }
    candidates.clear();
    for (std::size_t t = 0; t < opts.ann_tables; ++t) {
      const auto it = tables[t].find(keys[t]);
      if (it != tables[t].end()) candidates.insert(candidates.end(), it->second.begin(), it->second.end());
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    double best = -2.0;
    std::size_t arg = 0;
    for (const std::size_t pos : candidates) {
      const double d = kernels::dot(row, rows.data() + res.survivors[pos] * dim, dim);
      if (d > best) {
        best = d;
        arg = pos;
      }
    }
    if (!candidates.empty() && 1.0 - best <= threshold) {
      res.drops.emplace_back(r, res.survivors[arg]);
      continue;
    }
    const std::size_t pos = res.survivors.size();
    res.survivors.push_back(r);
    for (std::size_t t = 0; t < opts.ann_tables; ++t) tables[t][keys[t]].push_back(pos);
  }
  return res;
}

}  // namespace

void FunnelConfig::validate() const {
  if (shingle_k < 1) fail("InvalidConfig", "shingle_k must be >= 1");
  if (num_hashes < 1) fail("InvalidConfig", "num_hashes must be >= 1");
  if (lsh_bands * lsh_rows != num_hashes) fail("InvalidConfig", "lsh_bands x lsh_rows must equal num_hashes");
  if (!(jaccard_threshold > 0.0 && jaccard_threshold <= 1.0)) {
    fail("InvalidConfig", "jaccard_threshold must lie in (0, 1]");
  }
  if (!(semantic_distance_threshold >= 0.0) || !std::isfinite(semantic_distance_threshold)) {
    fail("InvalidConfig", "semantic_distance_threshold must be a nonnegative real");
  }
  if (kcenter_target < 1) fail("InvalidConfig", "kcenter_target must be >= 1");
  if (ann_tables < 1 || ann_bits < 1 || ann_bits > 32) fail("InvalidConfig", "ann_tables >= 1, ann_bits in 1..32");
}

std::set<std::string> shingle(std::string_view text, int k) {
  if (k < 1) fail("InvalidConfig", "shingle k must be >= 1");
  const std::string norm = text::normalize(text);
  const auto sc = text::scalars(norm);
  const auto uk = static_cast<std::size_t>(k);
  std::set<std::string> out;
  for (std::size_t i = 0; i + uk <= sc.size(); ++i) {
    const char* begin = sc[i].data();
    const char* end = sc[i + uk - 1].data() + sc[i + uk - 1].size();
    out.emplace(begin, end);
  }
  return out;
}

MinHashSignature minhash_signature(const std::set<std::string>& shingles, const FunnelConfig& cfg) {
  if (cfg.num_hashes < 1) fail("InvalidConfig", "num_hashes must be >= 1");
  std::vector<std::uint64_t> hashes;
  hashes.reserve(shingles.size());
  for (const auto& s : shingles) hashes.push_back(fnv1a64(s));
  const auto family = kernels::hash_family(cfg.rng_seed, cfg.num_hashes);
  MinHashSignature sig;
  sig.values.resize(cfg.num_hashes);
  sig.seed = cfg.rng_seed;
  sig.shingle_k = cfg.shingle_k;
  kernels::minhash(hashes, family, sig.values);
  return sig;
}

double jaccard_estimate(const MinHashSignature& a, const MinHashSignature& b) {
  if (a.values.size() != b.values.size() || a.seed != b.seed || a.shingle_k != b.shingle_k) {
    fail("SignatureMismatch", "signatures differ in length, seed or shingle size");
  }
  if (a.values.empty()) fail("SignatureMismatch", "empty signatures");
  std::size_t eq = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) eq += a.values[i] == b.values[i];
  return static_cast<double>(eq) / static_cast<double>(a.values.size());
}

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Lexical: return "lexical";
    case Stage::Semantic: return "semantic";
    case Stage::Geometric: return "geometric";
  }
  return "lexical";
}

CuratedSet lexical_dedup(std::span<const Query> corpus, const FunnelConfig& cfg) {
  cfg.validate();
  const std::size_t n = corpus.size();
  {
    std::vector<std::string_view> ids;
    ids.reserve(n);
    for (const auto& q : corpus) ids.push_back(q.id);
    std::sort(ids.begin(), ids.end());
    const auto dup = std::adjacent_find(ids.begin(), ids.end());
    if (dup != ids.end()) fail("DuplicateId", "query id '" + std::string(*dup) + "' appears twice");
  }

  std::vector<std::string> normalized(n);
  std::vector<std::vector<std::uint64_t>> hashes(n);
  const auto sn = static_cast<std::int64_t>(n);
  FirstError err;
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t i = 0; i < sn; ++i) {
    const auto u = static_cast<std::size_t>(i);
    try {
      normalized[u] = text::normalize(corpus[u].text);
      hashes[u] = shingle_hashes(normalized[u], cfg.shingle_k);
    } catch (...) {
      err.capture(i);
    }
  }
  err.rethrow();

  const auto family = kernels::hash_family(cfg.rng_seed, cfg.num_hashes);
  const std::vector<std::uint64_t> sigs = kernels::minhash_batch(hashes, family);
  const std::size_t h = cfg.num_hashes;
  const auto sig = [&](std::size_t i) { return sigs.data() + i * h; };

  UnionFind uf(n);

  // Texts shorter than k have no shingles; they merge only on equal normalized text.
  std::vector<std::size_t> with_shingles;
  std::vector<std::size_t> without;
  for (std::size_t i = 0; i < n; ++i) (hashes[i].empty() ? without : with_shingles).push_back(i);
  std::sort(without.begin(), without.end(),
            [&](std::size_t a, std::size_t b) { return normalized[a] < normalized[b]; });
  for (std::size_t i = 1; i < without.size(); ++i) {
    if (normalized[without[i]] == normalized[without[i - 1]]) uf.unite(without[i], without[i - 1]);
  }

  // Identical signatures are duplicates outright; LSH runs on one representative each.
  std::sort(with_shingles.begin(), with_shingles.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(sig(a), sig(a) + h, sig(b), sig(b) + h) ||
           (std::equal(sig(a), sig(a) + h, sig(b)) && a < b);
  });
  std::vector<std::size_t> reps;
  for (std::size_t i = 0; i < with_shingles.size(); ++i) {
    if (i > 0 && std::equal(sig(with_shingles[i]), sig(with_shingles[i]) + h, sig(with_shingles[i - 1]))) {
      uf.unite(with_shingles[i], with_shingles[i - 1]);
    } else {
      reps.push_back(with_shingles[i]);
    }
  }

  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> band_pairs(cfg.lsh_bands);
  const auto bands = static_cast<std::int64_t>(cfg.lsh_bands);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t b = 0; b < bands; ++b) {
    const auto ub = static_cast<std::size_t>(b);
    std::vector<std::pair<std::uint64_t, std::size_t>> keyed(reps.size());
    for (std::size_t r = 0; r < reps.size(); ++r) {
      keyed[r] = {band_key(sig(reps[r]) + ub * cfg.lsh_rows, cfg.lsh_rows, ub), reps[r]};
    }
    std::sort(keyed.begin(), keyed.end());
    auto& out = band_pairs[ub];
    for (std::size_t lo = 0; lo < keyed.size();) {
      std::size_t hi = lo + 1;
      while (hi < keyed.size() && keyed[hi].first == keyed[lo].first) ++hi;
      for (std::size_t x = lo; x < hi; ++x) {
        for (std::size_t y = x + 1; y < hi; ++y) out.emplace_back(keyed[x].second, keyed[y].second);
      }
      lo = hi;
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  for (auto& bp : band_pairs) {
    candidates.insert(candidates.end(), bp.begin(), bp.end());
    bp = {};
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<char> verified(candidates.size(), 0);
  const auto nc = static_cast<std::int64_t>(candidates.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < nc; ++c) {
    const auto [a, b] = candidates[static_cast<std::size_t>(c)];
    std::size_t eq = 0;
    for (std::size_t j = 0; j < h; ++j) eq += sig(a)[j] == sig(b)[j];
    verified[static_cast<std::size_t>(c)] =
        static_cast<double>(eq) / static_cast<double>(h) >= cfg.jaccard_threshold;
  }
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (verified[c]) uf.unite(candidates[c].first, candidates[c].second);
  }

  std::map<std::size_t, std::vector<std::size_t>> classes;
  for (std::size_t i = 0; i < n; ++i) classes[uf.find(i)].push_back(i);

  CuratedSet out;
  for (auto& [root, members] : classes) {
    std::sort(members.begin(), members.end(),
              [&](std::size_t a, std::size_t b) { return corpus[a].id < corpus[b].id; });
    out.surviving_ids.push_back(corpus[members.front()].id);
    if (members.size() > 1) {
      DropEntry e{corpus[members.front()].id, Stage::Lexical, {}};
      for (std::size_t m = 1; m < members.size(); ++m) e.dropped.push_back(corpus[members[m]].id);
      out.drop_log.push_back(std::move(e));
    }
  }
  std::sort(out.surviving_ids.begin(), out.surviving_ids.end());
  sort_drop_log(out.drop_log);
  out.stage_counts = {n, out.surviving_ids.size(), out.surviving_ids.size(), out.surviving_ids.size()};
  return out;
}

SemanticResult semantic_dedup_detailed(const EmbeddingMatrix& bucket, double threshold,
                                       const SemanticOptions& opts) {
  bucket.validate();
  const std::vector<double> rows = unit_rows(bucket);
  std::vector<std::size_t> order(bucket.count());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return bucket.ids[a] < bucket.ids[b]; });
  const kernels::ScanResult scan =
      bucket.count() <= opts.exhaustive_limit
          ? kernels::semantic_scan(rows, bucket.dim, order, threshold)
          : approximate_scan(rows, bucket.dim, order, threshold, opts);
  return {scan.survivors, scan.drops};
}

std::vector<std::size_t> semantic_dedup(const EmbeddingMatrix& bucket, double threshold,
                                        const SemanticOptions& opts) {
  return semantic_dedup_detailed(bucket, threshold, opts).survivors;
}

std::vector<std::size_t> kcenter_greedy(const EmbeddingMatrix& points, std::size_t k,
                                        std::size_t seed_index) {
  points.validate();
  if (k < 1 || k > points.count()) {
    fail("KOutOfRange", "k = " + std::to_string(k) + " outside [1, " + std::to_string(points.count()) + "]");
  }
  if (seed_index >= points.count()) {
    fail("KOutOfRange", "seed index " + std::to_string(seed_index) + " out of range");
  }
  return kernels::kcenter(points.rows, points.dim, k, seed_index);
}

std::string bucket_key(const Query& q) {
  if (!q.annotation) return {};
  std::string key = q.annotation->primary_intent;
  key += '|';
  for (std::size_t i = 0; i < q.annotation->secondary_intents.size(); ++i) {
    if (i > 0) key += ',';
    key += q.annotation->secondary_intents[i];
  }
  return key;
}

CuratedSet run_funnel(std::span<const Query> corpus, const EmbeddingMatrix& embeddings,
                      const FunnelConfig& cfg) {
  cfg.validate();
  embeddings.validate();
  CuratedSet out = lexical_dedup(corpus, cfg);

  std::unordered_map<std::string_view, const Query*> by_id;
  for (const auto& q : corpus) by_id.emplace(q.id, &q);
  std::unordered_map<std::string_view, std::size_t> row_of;
  for (std::size_t i = 0; i < embeddings.count(); ++i) row_of.emplace(embeddings.ids[i], i);

  std::map<std::string, std::vector<std::size_t>> buckets;
  for (const auto& id : out.surviving_ids) {
    const auto it = row_of.find(id);
    if (it == row_of.end()) fail("MissingEmbedding", "no embedding row for '" + id + "'");
    buckets[bucket_key(*by_id.at(id))].push_back(it->second);
  }

  std::vector<const std::vector<std::size_t>*> bucket_rows;
  for (const auto& [key, rows] : buckets) bucket_rows.push_back(&rows);
  std::vector<SemanticResult> results(bucket_rows.size());
  std::vector<EmbeddingMatrix> subs(bucket_rows.size());
  const SemanticOptions opts{cfg.exhaustive_limit, cfg.ann_tables, cfg.ann_bits, cfg.rng_seed};
  const auto nb = static_cast<std::int64_t>(bucket_rows.size());
  FirstError err;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t b = 0; b < nb; ++b) {
    const auto ub = static_cast<std::size_t>(b);
    try {
      subs[ub] = embeddings.select(*bucket_rows[ub]);
      results[ub] = semantic_dedup_detailed(subs[ub], cfg.semantic_distance_threshold, opts);
    } catch (...) {
      err.capture(b);
    }
  }
  err.rethrow();

  std::vector<std::string> after_semantic;
  std::map<std::string, std::vector<std::string>> semantic_drops;
  for (std::size_t b = 0; b < results.size(); ++b) {
    for (const std::size_t r : results[b].survivors) after_semantic.push_back(subs[b].ids[r]);
    for (const auto& [dropped, kept] : results[b].drops) {
      semantic_drops[subs[b].ids[kept]].push_back(subs[b].ids[dropped]);
    }
  }
  std::sort(after_semantic.begin(), after_semantic.end());
  for (auto& [survivor, dropped] : semantic_drops) {
    out.drop_log.push_back({survivor, Stage::Semantic, std::move(dropped)});
  }

  std::vector<std::string> after_geometric = after_semantic;
  if (cfg.kcenter_target < after_semantic.size()) {
    std::vector<std::size_t> rows;
    rows.reserve(after_semantic.size());
    for (const auto& id : after_semantic) rows.push_back(row_of.at(id));
    const EmbeddingMatrix pool = embeddings.select(rows);
    const auto selected = kernels::kcenter(pool.rows, pool.dim, cfg.kcenter_target, 0);
    const auto owner = kernels::assign_nearest(pool.rows, pool.dim, selected);
    std::vector<char> chosen(pool.count(), 0);
    for (const std::size_t s : selected) chosen[s] = 1;
    std::map<std::string, std::vector<std::string>> geometric_drops;
    after_geometric.clear();
    for (std::size_t i = 0; i < pool.count(); ++i) {
      if (chosen[i]) {
        after_geometric.push_back(pool.ids[i]);
      } else {
        geometric_drops[pool.ids[selected[owner[i]]]].push_back(pool.ids[i]);
      }
    }
    for (auto& [survivor, dropped] : geometric_drops) {
      out.drop_log.push_back({survivor, Stage::Geometric, std::move(dropped)});
    }
  }

  out.stage_counts.after_semantic = after_semantic.size();
  out.stage_counts.after_geometric = after_geometric.size();
  out.surviving_ids = std::move(after_geometric);
  sort_drop_log(out.drop_log);
  return out;
}

std::string drop_log_jsonl(const CuratedSet& set) {
  std::string out;
  for (const auto& e : set.drop_log) {
    nlohmann::ordered_json j;
    j["survivor"] = e.survivor;
    j["dropped"] = e.dropped;
    j["stage"] = std::string(to_string(e.stage));
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace stforge::funnel
