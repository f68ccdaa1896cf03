#pragma once

/**
 * @file descriptors.hpp
 * @brief Texture descriptors: Shannon entropy and the Hurst exponent.
 *
 * Entropy is computed from the exact 16384-bin intensity histogram, in bits.
 * The Hurst exponent comes from the variance of increments: for dyadic lags
 * d = 1, 2, 4, ... while d <= min(w, h) / 4 the mean squared increment m(d)
 * is pooled over horizontal and vertical pairs; H is half the slope of the
 * least-squares line through (log d, log m(d)), clamped to [0, 1].
 */

#include "kneetex/errors.hpp"
#include "kneetex/patch.hpp"
#include "kneetex/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <type_traits>
#include <vector>

namespace kneetex {

// Canonical feature order. Subset mask bit i selects kFeatureNames[i];
// bit 0 is the least significant bit.
inline constexpr std::array<const char*, 12> kFeatureNames = {
    "H_F0", "H_F1", "H_T0", "H_T1", "H_T2", "H_T3",
    "E_F0", "E_F1", "E_T0", "E_T1", "E_T2", "E_T3"};

inline constexpr int kFeatureCount = 12;

namespace detail {

// c * log2(c) for small counts, built once. Counts beyond the table fall
// back to std::log2; they are rare because a histogram with large counts
// has few occupied bins.
inline double count_log2_count(std::uint32_t c) {
  static const std::array<double, 256> table = [] {
    std::array<double, 256> t{};
    for (std::size_t i = 1; i < t.size(); ++i)
      t[i] = static_cast<double>(i) * std::log2(static_cast<double>(i));
    return t;
  }();
  return c < table.size() ? table[c]
                          : static_cast<double>(c) * std::log2(static_cast<double>(c));
}

}  // namespace detail

namespace detail {

// Contiguous fast path. Two interleaved sub-histograms keep the increments
// of runs of equal intensities, common in smooth patches, off a single
// serial read-modify-write chain. Indices are masked so the loop stays
// branch-free; out-of-range values are caught afterwards via `bad`, before
// the counts are used.
template <typename Scalar>
void histogram_fill(const Scalar* p, std::size_t n, std::uint32_t* h0,
                    std::uint32_t* h1) {
  constexpr auto mask = static_cast<std::uint64_t>(kIntensityMax);
  std::uint64_t bad = 0;
  std::size_t i = 0;
  for (; i + 1 < n; i += 2) {
    const auto a = static_cast<std::uint64_t>(p[i]);
    const auto b = static_cast<std::uint64_t>(p[i + 1]);
    bad |= a | b;
    ++h0[a & mask];
    ++h1[b & mask];
  }
  for (; i < n; ++i) {
    const auto a = static_cast<std::uint64_t>(p[i]);
    bad |= a;
    ++h0[a & mask];
  }
  // Negative values of signed scalars arrive here as huge unsigned ones.
  if (bad > mask) throw InputError("entropy: intensity outside 14-bit range");
}

}  // namespace detail

template <typename Derived>
double entropy(const Eigen::MatrixBase<Derived>& patch) {
  using Scalar = typename Derived::Scalar;
  static_assert(std::is_integral_v<Scalar>, "entropy expects integer intensities");
  if (patch.size() == 0) throw PatchSizeError("entropy: empty patch");

  // Two separate buffers stay under the allocator's mmap threshold, so
  // repeated calls are served from the heap instead of fresh pages.
  std::vector<std::uint32_t> hist0(kIntensityLevels, 0);
  std::vector<std::uint32_t> hist1(kIntensityLevels, 0);
  std::uint32_t* h0 = hist0.data();
  std::uint32_t* h1 = hist1.data();

  // A histogram is traversal-order-independent, so any contiguous block of
  // memory can go through the flat kernel regardless of storage order.
  constexpr bool direct = Eigen::internal::has_direct_access<Derived>::ret;
  bool filled = false;
  if constexpr (direct) {
    const auto& d = patch.derived();
    if (d.innerStride() == 1 && d.outerStride() == d.innerSize()) {
      detail::histogram_fill(d.data(), static_cast<std::size_t>(d.size()), h0, h1);
      filled = true;
    }
  }
  if (!filled) {
    // Generic path for expressions and strided views.
    for (Eigen::Index j = 0; j < patch.cols(); ++j) {
      for (Eigen::Index i = 0; i < patch.rows(); ++i) {
        const auto v = patch(i, j);
        if constexpr (std::is_signed_v<Scalar>) {
          if (v < 0) throw InputError("entropy: intensity outside 14-bit range");
        }
        if (static_cast<std::uint64_t>(v) > static_cast<std::uint64_t>(kIntensityMax))
          throw InputError("entropy: intensity outside 14-bit range");
        ++h0[static_cast<std::size_t>(v)];
      }
    }
  }

  // H = log2(n) - sum(c * log2 c) / n over occupied bins. The sum runs in
  // ascending count order, not bin order, so a bijective intensity remap,
  // which only permutes bins, reproduces the result bit for bit.
  std::array<std::uint32_t, 256> small{};
  std::vector<std::uint32_t> large;
  for (std::size_t b = 0; b < kIntensityLevels; ++b) {
    const std::uint32_t c = h0[b] + h1[b];
    if (c == 0) continue;
    if (c < small.size()) ++small[c];
    else large.push_back(c);
  }
  double sum = 0.0;
  for (std::size_t c = 1; c < small.size(); ++c)
    if (small[c]) sum += static_cast<double>(small[c]) * detail::count_log2_count(
                             static_cast<std::uint32_t>(c));
  std::sort(large.begin(), large.end());
  for (std::uint32_t c : large) sum += detail::count_log2_count(c);

  const double n = static_cast<double>(patch.size());
  // The rearrangement can undershoot zero by an ulp when n is not a power
  // of two; true entropy never does.
  return std::max(0.0, std::log2(n) - sum / n);
}

inline double entropy(const Patch& patch) { return entropy(patch.pixels); }

struct HurstEstimate {
  double value = 0.0;      // slope / 2 clamped to [0, 1]
  double raw_slope = 0.0;  // unclamped regression slope
  bool clamped = false;
  int lags_used = 0;
};

template <typename Derived>
HurstEstimate hurst_estimate(const Eigen::MatrixBase<Derived>& patch) {
  const Eigen::Index h = patch.rows();
  const Eigen::Index w = patch.cols();
  if (h < 16 || w < 16)
    throw PatchSizeError("hurst: patch below the 16x16 minimum");

  Eigen::MatrixXd p = patch.template cast<double>();
  if (p.maxCoeff() == p.minCoeff())
    throw UndefinedRoughnessError("hurst: constant patch");

  const Eigen::Index max_lag = std::min(w, h) / 4;
  std::vector<double> log_d, log_m;
  for (Eigen::Index d = 1; d <= max_lag; d *= 2) {
    const auto dh = p.rightCols(w - d) - p.leftCols(w - d);
    const auto dv = p.bottomRows(h - d) - p.topRows(h - d);
    const double sum_sq = dh.squaredNorm() + dv.squaredNorm();
    const double count = static_cast<double>(dh.size() + dv.size());
    const double m = sum_sq / count;
    if (m <= 0.0) continue;  // a lag with no variation carries no slope information
    log_d.push_back(std::log(static_cast<double>(d)));
    log_m.push_back(std::log(m));
  }
  if (log_d.size() < 3)
    throw UndefinedRoughnessError("hurst: fewer than three usable lags");

  const auto n = static_cast<Eigen::Index>(log_d.size());
  const Eigen::Map<const Eigen::VectorXd> x(log_d.data(), n);
  const Eigen::Map<const Eigen::VectorXd> y(log_m.data(), n);
  const Eigen::VectorXd xc = x.array() - x.mean();
  const double slope = xc.dot(y) / xc.squaredNorm();

  HurstEstimate est;
  est.raw_slope = slope;
  est.lags_used = static_cast<int>(n);
  est.value = std::clamp(slope / 2.0, 0.0, 1.0);
  est.clamped = est.value != slope / 2.0;
  return est;
}

inline HurstEstimate hurst_estimate(const Patch& patch) {
  return hurst_estimate(patch.pixels);
}

inline double hurst(const Patch& patch) { return hurst_estimate(patch.pixels).value; }

struct FeatureVector {
  std::string subject_id;
  ClassLabel label = ClassLabel::Unlabeled;
  Eigen::Matrix<double, kFeatureCount, 1> values;
};

// Extracts all six patches and evaluates both descriptors in canonical
// order: values[0..5] are H per ROI, values[6..11] are E per ROI. Failures
// are collected per ROI and reported together.
template <typename Derived>
FeatureVector feature_vector(const Eigen::MatrixBase<Derived>& image,
                             const RoiLayout& layout, std::string subject_id,
                             ClassLabel label = ClassLabel::Unlabeled) {
  FeatureVector fv;
  fv.subject_id = std::move(subject_id);
  fv.label = label;
  std::string failures;
  for (int i = 0; i < 6; ++i) {
    try {
      const Patch patch = extract_patch(image, layout.rois[static_cast<std::size_t>(i)]);
      fv.values[i] = hurst(patch);
      fv.values[i + 6] = entropy(patch);
    } catch (const InputError& e) {
      if (!failures.empty()) failures += "; ";
      failures += std::string(to_string(layout.rois[static_cast<std::size_t>(i)].name)) +
                  ": " + e.what();
    }
  }
  if (!failures.empty())
    throw FeatureExtractionError("subject " + fv.subject_id + ": " + failures);
  return fv;
}

}  // namespace kneetex
