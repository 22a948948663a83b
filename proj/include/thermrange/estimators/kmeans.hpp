#pragma once

// k-means clustering of per-pixel emissivity profiles (Euclidean distance,
// k-means++ seeding, Lloyd iterations).
//
// Profiles are put in lexicographic order before seeding, so the partition
// depends only on the multiset of profiles and the seed, never on pixel
// order. Labels are numbered by first appearance in that order.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "thermrange/error.hpp"
#include "thermrange/estimators/hyperspectral.hpp"
#include "thermrange/random.hpp"

namespace thermrange {

struct ClusterResult {
  std::vector<std::size_t> labels;              // one per input profile
  std::vector<std::vector<double>> centroids;  // k mean profiles
  long iterations = 0;
};

namespace detail {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace detail

inline ClusterResult cluster_profiles(const std::vector<std::vector<double>>& profiles, std::size_t k,
                                      std::uint64_t seed, long max_iterations = 300) {
  if (k < 1) throw PreconditionError("cluster count must be at least 1");
  const std::size_t n = profiles.size();
  if (n == 0) throw PreconditionError("no profiles to cluster");
  const std::size_t dim = profiles.front().size();
  for (const auto& p : profiles)
    if (p.size() != dim) throw PreconditionError("emissivity profiles have different lengths");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return profiles[a] < profiles[b]; });
  std::size_t distinct = 1;
  for (std::size_t i = 1; i < n; ++i) distinct += profiles[order[i]] != profiles[order[i - 1]] ? 1 : 0;
  if (distinct < k)
    throw PreconditionError("only " + std::to_string(distinct) + " distinct profiles for " + std::to_string(k) +
                            " clusters");

  // k-means++ seeding over the canonical order.
  const CounterRng rng(seed);
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  const auto first = std::min(n - 1, static_cast<std::size_t>(rng.uniform(0, 0) * static_cast<double>(n)));
  centroids.push_back(profiles[order[first]]);
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = detail::squared_distance(profiles[order[i]], centroids[0]);
  for (std::size_t c = 1; c < k; ++c) {
    const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
    const double target = rng.uniform(0, c) * total;
    std::size_t pick = n;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (nearest[i] <= 0.0) continue;
      acc += nearest[i];
      pick = i;
      if (acc >= target) break;
    }
    centroids.push_back(profiles[order[pick]]);
    for (std::size_t i = 0; i < n; ++i)
      nearest[i] = std::min(nearest[i], detail::squared_distance(profiles[order[i]], centroids[c]));
  }

  // Lloyd iterations; sorted-position labels.
  std::vector<std::size_t> label(n, k);
  long iter = 0;
  for (; iter < max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = detail::squared_distance(profiles[order[i]], centroids[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = detail::squared_distance(profiles[order[i]], centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (label[i] != best) {
        label[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sums[label[i]];
      const auto& p = profiles[order[i]];
      for (std::size_t j = 0; j < dim; ++j) s[j] += p[j];
      ++counts[label[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // keep the previous centroid
      for (std::size_t j = 0; j < dim; ++j) centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
    }
  }

  // Renumber clusters by first appearance in canonical order.
  std::vector<std::size_t> rename(k, k);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (rename[label[i]] == k) rename[label[i]] = next++;
  ClusterResult out;
  out.iterations = iter;
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.labels[order[i]] = rename[label[i]];
  out.centroids.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    // Clusters that ended empty keep their slot after the populated ones.
    const std::size_t to = rename[c] < k ? rename[c] : next++;
    out.centroids[to] = std::move(centroids[c]);
  }
  return out;
}

inline ClusterResult cluster_emissivities(std::span<const EstimationResult> results, std::size_t k,
                                          std::uint64_t seed) {
  std::vector<std::vector<double>> profiles;
  profiles.reserve(results.size());
  for (const auto& r : results) profiles.emplace_back(r.emissivity.values().begin(), r.emissivity.values().end());
  return cluster_profiles(profiles, k, seed);
}

}  // namespace thermrange
