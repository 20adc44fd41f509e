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
// OpenMP kernels against their serial references, plus end-to-end lexical
// dedup throughput.

#include <cmath>
#include <numeric>

#include <benchmark/benchmark.h>

#include "stforge/corpus.hpp"
#include "stforge/funnel.hpp"
#include "stforge/funnel_kernels.hpp"
#include "stforge/rng.hpp"
#include "stforge/synth.hpp"

namespace {

using namespace stforge;
namespace k = stforge::funnel::kernels;

std::vector<std::vector<std::uint64_t>> random_docs(std::size_t n) {
  SplitMix64 rng(1);
  std::vector<std::vector<std::uint64_t>> docs(n);
  for (auto& d : docs) {
    d.resize(30 + rng.below(20));
    for (auto& h : d) h = rng.next();
  }
  return docs;
}

std::vector<float> random_points(std::size_t n, std::size_t dim) {
  SplitMix64 rng(2);
  std::vector<float> p(n * dim);
  for (auto& x : p) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  return p;
}

std::vector<double> unit_rows(std::size_t n, std::size_t dim) {
  const auto p = random_points(n, dim);
  std::vector<double> out(p.begin(), p.end());
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < dim; ++j) s += out[i * dim + j] * out[i * dim + j];
    const double inv = 1.0 / std::sqrt(s);
    for (std::size_t j = 0; j < dim; ++j) out[i * dim + j] *= inv;
  }
  return out;
}

template <bool Parallel>
void BM_MinhashBatch(benchmark::State& state) {
  const auto docs = random_docs(static_cast<std::size_t>(state.range(0)));
  const auto family = k::hash_family(0, 256);
  for (auto _ : state) {
    auto sigs = Parallel ? k::minhash_batch(docs, family) : k::reference::minhash_batch(docs, family);
    benchmark::DoNotOptimize(sigs.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_SemanticScan(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 64;
  const auto rows = unit_rows(n, dim);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (auto _ : state) {
    auto r = Parallel ? k::semantic_scan(rows, dim, order, 0.15) : k::reference::semantic_scan(rows, dim, order, 0.15);
    benchmark::DoNotOptimize(r.survivors.data());
  }
}

template <bool Parallel>
void BM_KCenter(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 32;
  const auto pts = random_points(n, dim);
  for (auto _ : state) {
    auto c = Parallel ? k::kcenter(pts, dim, 64, 0) : k::reference::kcenter(pts, dim, 64, 0);
    benchmark::DoNotOptimize(c.data());
  }
}

void BM_LexicalDedup(benchmark::State& state) {
  std::vector<Query> corpus;
  SplitMix64 rng(3);
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    corpus.push_back({"q" + std::to_string(i), synth::random_text(rng, 40), std::nullopt, std::nullopt, std::nullopt});
  }
  funnel::FunnelConfig cfg;
  for (auto _ : state) {
    auto set = funnel::lexical_dedup(corpus, cfg);
    benchmark::DoNotOptimize(set.surviving_ids.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_MinhashBatch<false>)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MinhashBatch<true>)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SemanticScan<false>)->Arg(8000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SemanticScan<true>)->Arg(8000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KCenter<false>)->Arg(50000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KCenter<true>)->Arg(50000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LexicalDedup)->Arg(100000)->Unit(benchmark::kMillisecond)->Iterations(1);

BENCHMARK_MAIN();
