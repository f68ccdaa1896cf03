#pragma once

/**
 * @file search.hpp
 * @brief Exhaustive evaluation of all non-empty feature subsets.
 *
 * Masks run from 1 to 4095; bit i selects feature i of the canonical order.
 * Every mask gets its own CV base seed, mix64(base_seed, mask), so a range
 * restart or a different thread count reproduces identical rows, and the
 * result for a singleton subset matches a standalone cv_auc call with that
 * derived seed.
 */

#include "kneetex/descriptors.hpp"
#include "kneetex/errors.hpp"
#include "kneetex/eval.hpp"
#include "kneetex/parallel.hpp"
#include "kneetex/rng.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace kneetex {

inline constexpr std::uint32_t kMaskCount = (1u << kFeatureCount) - 1;  // 4095

inline std::uint64_t mask_seed(std::uint64_t base_seed, std::uint32_t mask) {
  return mix64(base_seed, mask);
}

struct SubsetResult {
  std::uint32_t mask = 0;
  int cardinality = 0;
  double mean_auc = 0.0;
  double std_auc = 0.0;
};

// Evaluates cv_auc for every mask in [mask_from, mask_to]. Results come back
// ordered by mask. `progress`, when set, is called after each finished mask
// with the number completed so far.
inline std::vector<SubsetResult> search_all(
    const FeatureMatrix& fm, const CvSpec& spec, double svm_c = 1.0, int threads = 0,
    std::uint32_t mask_from = 1, std::uint32_t mask_to = kMaskCount,
    RepeatAuc repeat_auc = RepeatAuc::PooledFolds,
    const std::function<void(std::uint32_t)>& progress = {}) {
  if (mask_from < 1 || mask_to > kMaskCount || mask_from > mask_to)
    throw InputError("search: mask range must lie within [1, 4095]");
  fm.validate();

  const std::uint32_t count = mask_to - mask_from + 1;
  std::vector<SubsetResult> results(count);
  std::atomic<std::uint32_t> done{0};

  parallel_for_index(mask_from, static_cast<std::int64_t>(mask_to) + 1, threads,
                     [&](std::int64_t m) {
                       const auto mask = static_cast<std::uint32_t>(m);
                       CvSpec mask_spec = spec;
                       mask_spec.base_seed = mask_seed(spec.base_seed, mask);
                       const CvResult cv = cv_auc(fm, mask, mask_spec, svm_c, repeat_auc);
                       SubsetResult& slot = results[mask - mask_from];
                       slot.mask = mask;
                       slot.cardinality = std::popcount(mask);
                       slot.mean_auc = cv.mean_auc;
                       slot.std_auc = cv.std_auc;
                       if (progress) progress(done.fetch_add(1) + 1);
                     });
  return results;
}

// Top-k rows by mean AUC; equal means break toward the smaller mask so the
// ranking is total.
inline std::vector<SubsetResult> rank_top(std::span<const SubsetResult> results, int k) {
  std::vector<SubsetResult> sorted(results.begin(), results.end());
  std::sort(sorted.begin(), sorted.end(), [](const SubsetResult& a, const SubsetResult& b) {
    if (a.mean_auc != b.mean_auc) return a.mean_auc > b.mean_auc;
    return a.mask < b.mask;
  });
  if (k >= 0 && static_cast<std::size_t>(k) < sorted.size()) sorted.resize(static_cast<std::size_t>(k));
  return sorted;
}

struct BestPerCardinality {
  int cardinality = 0;
  SubsetResult best;
};

// Requires the complete 4095-row sweep; anything less cannot name a winner
// per cardinality honestly.
inline std::vector<BestPerCardinality> best_per_cardinality(
    std::span<const SubsetResult> results) {
  if (results.size() != kMaskCount)
    throw InputError("best-per-n: need all 4095 subset results");
  std::vector<std::uint8_t> seen(kMaskCount + 1, 0);
  for (const SubsetResult& r : results) {
    if (r.mask < 1 || r.mask > kMaskCount || seen[r.mask])
      throw InputError("best-per-n: results must cover each mask exactly once");
    seen[r.mask] = 1;
  }

  std::vector<BestPerCardinality> best(kFeatureCount);
  for (int n = 1; n <= kFeatureCount; ++n)
    best[static_cast<std::size_t>(n - 1)].cardinality = n;
  std::vector<bool> filled(kFeatureCount + 1, false);
  for (const SubsetResult& r : results) {
    BestPerCardinality& b = best[static_cast<std::size_t>(r.cardinality - 1)];
    const bool wins = !filled[static_cast<std::size_t>(r.cardinality)] ||
                      r.mean_auc > b.best.mean_auc ||
                      (r.mean_auc == b.best.mean_auc && r.mask < b.best.mask);
    if (wins) {
      b.best = r;
      filled[static_cast<std::size_t>(r.cardinality)] = true;
    }
  }
  return best;
}

}  // namespace kneetex
