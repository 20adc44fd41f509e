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

// Data-parallel inner loops of the curation funnel. Each kernel has an OpenMP
// version and a serial reference in namespace reference; both must return
// bit-identical results for any thread count.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace stforge::funnel::kernels {

/// Per-coordinate seeds a_j of the MinHash family h_j(s) = mix64(H(s) ^ a_j).
std::vector<std::uint64_t> hash_family(std::uint64_t seed, std::size_t num_hashes);

/// out[j] = min over shingle hashes of mix64(h ^ family[j]); all-max when empty.
void minhash(std::span<const std::uint64_t> shingle_hashes,
             std::span<const std::uint64_t> family, std::span<std::uint64_t> out);

/// Row-major n x family.size() signatures, one row per document.
std::vector<std::uint64_t> minhash_batch(const std::vector<std::vector<std::uint64_t>>& docs,
                                         std::span<const std::uint64_t> family);

struct ScanResult {
  std::vector<std::size_t> survivors;                       // in scan order
  std::vector<std::pair<std::size_t, std::size_t>> drops;   // (dropped, nearest prior survivor)
};

/// Greedy threshold scan over unit-norm rows visited in `order`: a row
/// survives iff 1 - dot > threshold against every prior survivor.
ScanResult semantic_scan(std::span<const double> unit_rows, std::size_t dim,
                         std::span<const std::size_t> order, double threshold);

/// Farthest-point selection under squared Euclidean distance; ties go to the
/// smallest index. Requires 1 <= k <= rows and seed < rows.
std::vector<std::size_t> kcenter(std::span<const float> points, std::size_t dim, std::size_t k,
                                 std::size_t seed);

/// Index (into centers) of the nearest center for every point; ties go to the
/// earlier center.
std::vector<std::size_t> assign_nearest(std::span<const float> points, std::size_t dim,
                                        std::span<const std::size_t> centers);

namespace reference {

std::vector<std::uint64_t> minhash_batch(const std::vector<std::vector<std::uint64_t>>& docs,
                                         std::span<const std::uint64_t> family);
ScanResult semantic_scan(std::span<const double> unit_rows, std::size_t dim,
                         std::span<const std::size_t> order, double threshold);
std::vector<std::size_t> kcenter(std::span<const float> points, std::size_t dim, std::size_t k,
                                 std::size_t seed);
std::vector<std::size_t> assign_nearest(std::span<const float> points, std::size_t dim,
                                        std::span<const std::size_t> centers);

}  // namespace reference

double squared_distance(const float* a, const float* b, std::size_t dim) noexcept;
double dot(const double* a, const double* b, std::size_t dim) noexcept;

}  // namespace stforge::funnel::kernels
