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
#include "stforge/funnel_kernels.hpp"

#include <algorithm>
#include <limits>

#include "stforge/rng.hpp"

namespace stforge::funnel::kernels {

namespace {

constexpr std::uint64_t kMinHashStream = 0x6d696e68617368ULL;  // "minhash"
constexpr std::size_t kParallelScanMin = 4096;

// Total order used by every argmax reduction: larger value first, then the
// smaller index.
struct Best {
  double value = -std::numeric_limits<double>::infinity();
  std::size_t index = std::numeric_limits<std::size_t>::max();

  void offer(double v, std::size_t i) noexcept {
    if (v > value || (v == value && i < index)) {
      value = v;
      index = i;
    }
  }
};

}  // namespace

double squared_distance(const float* a, const float* b, std::size_t dim) noexcept {
  double s = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    const double diff = static_cast<double>(a[d]) - static_cast<double>(b[d]);
    s += diff * diff;
  }
  return s;
}

double dot(const double* a, const double* b, std::size_t dim) noexcept {
  double s = 0.0;
  for (std::size_t d = 0; d < dim; ++d) s += a[d] * b[d];
  return s;
}

std::vector<std::uint64_t> hash_family(std::uint64_t seed, std::size_t num_hashes) {
  std::vector<std::uint64_t> family(num_hashes);
  for (std::size_t j = 0; j < num_hashes; ++j) family[j] = stream_seed(seed, kMinHashStream, j);
  return family;
}

void minhash(std::span<const std::uint64_t> shingle_hashes,
             std::span<const std::uint64_t> family, std::span<std::uint64_t> out) {
  const std::size_t n = family.size();
  std::fill(out.begin(), out.end(), std::numeric_limits<std::uint64_t>::max());
  std::uint64_t* o = out.data();
  const std::uint64_t* a = family.data();
  for (const std::uint64_t h : shingle_hashes) {
#pragma omp simd
    for (std::size_t j = 0; j < n; ++j) {
      const std::uint64_t v = mix64(h ^ a[j]);
      o[j] = v < o[j] ? v : o[j];
    }
  }
}

std::vector<std::uint64_t> minhash_batch(const std::vector<std::vector<std::uint64_t>>& docs,
                                         std::span<const std::uint64_t> family) {
  const std::size_t h = family.size();
  std::vector<std::uint64_t> out(docs.size() * h);
  const auto n = static_cast<std::int64_t>(docs.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    minhash(docs[u], family, std::span<std::uint64_t>(out.data() + u * h, h));
  }
  return out;
}

ScanResult semantic_scan(std::span<const double> unit_rows, std::size_t dim,
                         std::span<const std::size_t> order, double threshold) {
  ScanResult res;
  res.survivors.reserve(order.size());
  for (const std::size_t r : order) {
    const double* row = unit_rows.data() + r * dim;
    const auto m = static_cast<std::int64_t>(res.survivors.size());
    Best best;
#pragma omp parallel if (m >= static_cast<std::int64_t>(kParallelScanMin))
    {
      Best local;
#pragma omp for schedule(static) nowait
      for (std::int64_t s = 0; s < m; ++s) {
        const std::size_t other = res.survivors[static_cast<std::size_t>(s)];
        local.offer(dot(row, unit_rows.data() + other * dim, dim), static_cast<std::size_t>(s));
      }
#pragma omp critical(stforge_semantic_best)
      best.offer(local.value, local.index);
    }
    if (m > 0 && 1.0 - best.value <= threshold) {
      res.drops.emplace_back(r, res.survivors[best.index]);
    } else {
      res.survivors.push_back(r);
    }
  }
  return res;
}

std::vector<std::size_t> kcenter(std::span<const float> points, std::size_t dim, std::size_t k,
                                 std::size_t seed) {
  const std::size_t n = dim == 0 ? 0 : points.size() / dim;
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  std::vector<char> chosen(n, 0);
  std::vector<std::size_t> selected;
  selected.reserve(k);
  std::size_t center = seed;
  while (true) {
    selected.push_back(center);
    chosen[center] = 1;
    if (selected.size() == k) break;
    const float* c = points.data() + center * dim;
    Best best;
    const auto sn = static_cast<std::int64_t>(n);
#pragma omp parallel
    {
      Best local;
#pragma omp for schedule(static) nowait
      for (std::int64_t i = 0; i < sn; ++i) {
        const auto u = static_cast<std::size_t>(i);
        const double d2 = squared_distance(points.data() + u * dim, c, dim);
        if (d2 < min_d2[u]) min_d2[u] = d2;
        if (!chosen[u]) local.offer(min_d2[u], u);
      }
#pragma omp critical(stforge_kcenter_best)
      best.offer(local.value, local.index);
    }
    center = best.index;
  }
  return selected;
}

std::vector<std::size_t> assign_nearest(std::span<const float> points, std::size_t dim,
                                        std::span<const std::size_t> centers) {
  const std::size_t n = dim == 0 ? 0 : points.size() / dim;
  std::vector<std::size_t> owner(n, 0);
  const auto sn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < sn; ++i) {
    const auto u = static_cast<std::size_t>(i);
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const double d2 = squared_distance(points.data() + u * dim, points.data() + centers[c] * dim, dim);
      if (d2 < best) {
        best = d2;
        arg = c;
      }
    }
    owner[u] = arg;
  }
  return owner;
}

namespace reference {

std::vector<std::uint64_t> minhash_batch(const std::vector<std::vector<std::uint64_t>>& docs,
                                         std::span<const std::uint64_t> family) {
  const std::size_t h = family.size();
  std::vector<std::uint64_t> out(docs.size() * h, std::numeric_limits<std::uint64_t>::max());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (std::size_t j = 0; j < h; ++j) {
      std::uint64_t m = std::numeric_limits<std::uint64_t>::max();
      for (const std::uint64_t s : docs[i]) m = std::min(m, mix64(s ^ family[j]));
      out[i * h + j] = m;
    }
  }
  return out;
}

ScanResult semantic_scan(std::span<const double> unit_rows, std::size_t dim,
                         std::span<const std::size_t> order, double threshold) {
  ScanResult res;
  for (const std::size_t r : order) {
    const double* row = unit_rows.data() + r * dim;
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t s = 0; s < res.survivors.size(); ++s) {
      const double d = dot(row, unit_rows.data() + res.survivors[s] * dim, dim);
      if (d > best) {
        best = d;
        arg = s;
      }
    }
    if (!res.survivors.empty() && 1.0 - best <= threshold) {
      res.drops.emplace_back(r, res.survivors[arg]);
    } else {
      res.survivors.push_back(r);
    }
  }
  return res;
}

std::vector<std::size_t> kcenter(std::span<const float> points, std::size_t dim, std::size_t k,
                                 std::size_t seed) {
  const std::size_t n = points.size() / dim;
  std::vector<std::size_t> selected{seed};
  while (selected.size() < k) {
    double best = -1.0;
    std::size_t arg = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::find(selected.begin(), selected.end(), i) != selected.end()) continue;
      double m = std::numeric_limits<double>::infinity();
      for (const std::size_t s : selected) {
        m = std::min(m, squared_distance(points.data() + i * dim, points.data() + s * dim, dim));
      }
      if (m > best) {
        best = m;
        arg = i;
      }
    }
    selected.push_back(arg);
  }
  return selected;
}

std::vector<std::size_t> assign_nearest(std::span<const float> points, std::size_t dim,
                                        std::span<const std::size_t> centers) {
  const std::size_t n = points.size() / dim;
  std::vector<std::size_t> owner(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const double d2 = squared_distance(points.data() + i * dim, points.data() + centers[c] * dim, dim);
      if (d2 < best) {
        best = d2;
        owner[i] = c;
      }
    }
  }
  return owner;
}

}  // namespace reference

}  // namespace stforge::funnel::kernels
