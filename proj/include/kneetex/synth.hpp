#pragma once

/**
 * @file synth.hpp
 * @brief Synthetic texture and cohort generation.
 *
 * fbm_patch draws fractional Brownian motion by spectral synthesis: iid
 * complex Gaussians are shaped by an alias-folded power-law envelope
 * |k|^-(2H+2) on a grid twice the requested size, inverse-transformed, and
 * the top-left quarter is kept to relax periodicity. The result is rescaled
 * to the full 14-bit range. Patches of this construction are the ground
 * truth against which the Hurst estimator is validated.
 *
 * entropy_shaped_patch builds a patch whose empirical intensity entropy hits
 * a requested bit value: symbol probabilities mix a point mass with a
 * uniform over k = ceil(2^target) levels, the mixing weight is found by
 * bisection (entropy is monotone in it), and counts are apportioned by
 * largest remainder so the realized histogram is deterministic.
 *
 * Cohorts: fast mode emits per-subject jittered descriptor targets directly
 * as a feature matrix; image mode renders the same targets as fBm patches,
 * entropy-planted by equal-population quantization, composited into
 * axis-aligned radiographs whose ROI grid lands exactly on pixel centers.
 * Both modes derive subject targets from the same seeds, so their feature
 * matrices agree up to estimator error.
 */

#include "kneetex/descriptors.hpp"
#include "kneetex/errors.hpp"
#include "kneetex/feature_matrix.hpp"
#include "kneetex/patch.hpp"
#include "kneetex/rng.hpp"
#include "kneetex/types.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace kneetex {

// Fractional Brownian field, `size` x `size`, 14-bit range. H in (0.05, 0.95),
// size in [16, 4096].
inline Patch fbm_patch(double hurst_target, int size, std::uint64_t seed) {
  if (!(hurst_target > 0.05 && hurst_target < 0.95))
    throw InputError("fbm: H must lie in (0.05, 0.95)");
  if (size < 16 || size > 4096)
    throw InputError("fbm: size must lie in [16, 4096]");

  const int big = 2 * size;
  const double exponent = hurst_target + 1.0;  // S(k) ~ (|k|^2)^-(H+1)

  // Power envelope with +/-1 alias images per axis, matching the spectrum of
  // a sampled continuum power law rather than a bare grid power law; without
  // the folding the estimator reads H low near the rough end.
  Eigen::MatrixXcd spectrum(big, big);
  Rng rng(seed);
  for (int i = 0; i < big; ++i) {
    for (int j = 0; j < big; ++j) {
      double power = 0.0;
      for (int a = -1; a <= 1; ++a) {
        const double fy = static_cast<double>(i + a * big);
        for (int b = -1; b <= 1; ++b) {
          const double fx = static_cast<double>(j + b * big);
          const double k2 = fx * fx + fy * fy;
          if (k2 > 0.0) power += std::pow(k2, -exponent);
        }
      }
      const double amp = std::sqrt(power);
      spectrum(i, j) = amp * std::complex<double>(rng.normal(), rng.normal());
    }
  }
  spectrum(0, 0) = 0.0;

  Eigen::FFT<double> fft;
  Eigen::VectorXcd line(big), transformed(big);
  for (int i = 0; i < big; ++i) {
    line = spectrum.row(i).transpose();
    fft.inv(transformed, line);
    spectrum.row(i) = transformed.transpose();
  }
  for (int j = 0; j < big; ++j) {
    line = spectrum.col(j);
    fft.inv(transformed, line);
    spectrum.col(j) = transformed;
  }

  Eigen::MatrixXd field = spectrum.topLeftCorner(size, size).real();
  const double lo = field.minCoeff();
  const double hi = field.maxCoeff();
  if (!(hi > lo)) throw InputError("fbm: degenerate field");

  Patch patch;
  patch.roi_name = "fbm";
  patch.pixels.resize(size, size);
  const double scale = static_cast<double>(kIntensityMax) / (hi - lo);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j)
      patch.pixels(i, j) =
          static_cast<std::uint16_t>(std::lround((field(i, j) - lo) * scale));
  return patch;
}

namespace detail {

// Entropy in bits of the two-level mixture p0 = (1-w) + w/k, p_i = w/k.
inline double mixture_entropy_bits(double w, int k) {
  const double pu = w / static_cast<double>(k);
  const double p0 = (1.0 - w) + pu;
  double bits = 0.0;
  if (p0 > 0.0) bits -= p0 * std::log2(p0);
  if (pu > 0.0) bits -= static_cast<double>(k - 1) * pu * std::log2(pu);
  return bits;
}

inline double counts_entropy_bits(const std::vector<std::int64_t>& counts,
                                  double total) {
  double bits = 0.0;
  for (const std::int64_t c : counts) {
    if (c <= 0) continue;
    const double p = static_cast<double>(c) / total;
    bits -= p * std::log2(p);
  }
  return bits;
}

}  // namespace detail

// Patch whose empirical entropy is within 0.05 bits of the target; throws
// when the pixel budget cannot reach it.
inline Patch entropy_shaped_patch(double target_bits, int size, std::uint64_t seed) {
  if (!(target_bits >= 0.0 && target_bits <= 14.0))
    throw InputError("entropy patch: target must lie in [0, 14] bits");
  if (size < 2 || size > 4096)
    throw InputError("entropy patch: size must lie in [2, 4096]");

  const std::int64_t n = static_cast<std::int64_t>(size) * size;
  const int k = std::max<int>(1, static_cast<int>(std::ceil(std::exp2(target_bits))));
  if (n < k)
    throw InputError("entropy patch: unreachable target, needs at least " +
                     std::to_string(k) + " pixels");

  // Bisect the mixing weight; mixture entropy is monotone increasing in w.
  double w_lo = 0.0, w_hi = 1.0;
  for (int it = 0; it < 200 && k > 1; ++it) {
    const double mid = 0.5 * (w_lo + w_hi);
    (detail::mixture_entropy_bits(mid, k) < target_bits ? w_lo : w_hi) = mid;
  }
  const double w = k > 1 ? 0.5 * (w_lo + w_hi) : 0.0;

  // Largest-remainder apportionment of n pixels onto the k probabilities.
  const double pu = w / static_cast<double>(k);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(k));
  std::vector<std::pair<double, int>> remainders(static_cast<std::size_t>(k));
  std::int64_t assigned = 0;
  for (int i = 0; i < k; ++i) {
    const double ideal = (i == 0 ? (1.0 - w) + pu : pu) * static_cast<double>(n);
    counts[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(std::floor(ideal));
    assigned += counts[static_cast<std::size_t>(i)];
    remainders[static_cast<std::size_t>(i)] = {
        ideal - std::floor(ideal), i};
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::int64_t r = 0; r < n - assigned; ++r)
    ++counts[static_cast<std::size_t>(remainders[static_cast<std::size_t>(r)].second)];

  const double realized = detail::counts_entropy_bits(counts, static_cast<double>(n));
  if (std::abs(realized - target_bits) > 0.05)
    throw InputError("entropy patch: unreachable target " + std::to_string(target_bits) +
                     " bits at size " + std::to_string(size));

  std::vector<std::uint16_t> pixels;
  pixels.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < k; ++i) {
    const auto value = static_cast<std::uint16_t>(
        (static_cast<std::int64_t>(i) * kIntensityLevels) / k);
    pixels.insert(pixels.end(), static_cast<std::size_t>(counts[static_cast<std::size_t>(i)]),
                  value);
  }
  Rng rng(seed);
  rng.shuffle(pixels);

  Patch patch;
  patch.roi_name = "entropy";
  patch.pixels = Eigen::Map<const Eigen::Matrix<std::uint16_t, Eigen::Dynamic,
                                                Eigen::Dynamic, Eigen::RowMajor>>(
      pixels.data(), size, size);
  return patch;
}

// Requantizes a patch to k levels holding near-equal pixel counts; each bin
// is replaced by its rounded mean. Raises the histogram's flatness toward
// log2(k) bits while preserving the pixel ordering that carries roughness.
inline Patch equal_population_quantize(const Patch& patch, int k) {
  if (k < 1) throw InputError("quantize: k must be positive");
  const std::int64_t n = static_cast<std::int64_t>(patch.pixels.size());
  if (n == 0) throw InputError("quantize: empty patch");

  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::int64_t(0));
  const std::uint16_t* data = patch.pixels.data();
  std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    if (data[a] != data[b]) return data[a] < data[b];
    return a < b;
  });

  Patch out = patch;
  std::uint16_t* out_data = out.pixels.data();
  for (int b = 0; b < k; ++b) {
    const std::int64_t lo = b * n / k;
    const std::int64_t hi = (b + 1) * n / k;
    if (hi <= lo) continue;
    double sum = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) sum += data[order[static_cast<std::size_t>(i)]];
    const auto rep = static_cast<std::uint16_t>(std::clamp<long>(
        std::lround(sum / static_cast<double>(hi - lo)), 0, kIntensityMax));
    for (std::int64_t i = lo; i < hi; ++i)
      out_data[order[static_cast<std::size_t>(i)]] = rep;
  }
  return out;
}

struct CohortSpec {
  int n_case = 67;
  int n_control = 86;
  std::array<double, 6> h_case{};     // Hurst target per ROI, canonical order
  std::array<double, 6> h_control{};
  std::array<double, 6> e_case{};     // entropy target per ROI, bits
  std::array<double, 6> e_control{};
  double noise_sd = 0.08;             // per-subject target jitter, both descriptors
  int patch_size = 70;                // image mode; rounded to a multiple of 35
  double pixel_spacing_mm = 0.075;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_case < 2 || n_control < 2)
      throw InputError("cohort: need at least two subjects per class");
    if (!(noise_sd >= 0.0)) throw InputError("cohort: negative noise");
    if (!(pixel_spacing_mm > 0.0)) throw InputError("cohort: bad pixel spacing");
    for (int i = 0; i < 6; ++i) {
      for (const double h : {h_case[static_cast<std::size_t>(i)],
                             h_control[static_cast<std::size_t>(i)]})
        if (!(h > 0.05 && h < 0.95))
          throw InputError("cohort: H targets must lie in (0.05, 0.95)");
      for (const double e : {e_case[static_cast<std::size_t>(i)],
                             e_control[static_cast<std::size_t>(i)]})
        if (!(e > 0.0 && e < 14.0))
          throw InputError("cohort: entropy targets must lie in (0, 14)");
    }
  }

  int subjects() const { return n_case + n_control; }

  // No class difference anywhere.
  static CohortSpec null_cohort(std::uint64_t seed_value = 0) {
    CohortSpec s;
    s.h_case.fill(0.5);
    s.h_control.fill(0.5);
    s.e_case.fill(10.0);
    s.e_control.fill(10.0);
    s.seed = seed_value;
    return s;
  }

  // Effects only in H_F0, E_F0 and E_T3 (case minus control = +0.08 each).
  static CohortSpec planted_three(std::uint64_t seed_value = 0) {
    CohortSpec s = null_cohort(seed_value);
    s.h_case[0] = 0.58;
    s.e_case[0] = 10.08;
    s.e_case[5] = 10.08;
    return s;
  }

  // Effects in H_F0 and H_T2 only.
  static CohortSpec planted_pair(std::uint64_t seed_value = 0) {
    CohortSpec s = null_cohort(seed_value);
    s.h_case[0] = 0.58;
    s.h_case[4] = 0.58;
    return s;
  }
};

struct SubjectTargets {
  std::array<double, 6> h{};
  std::array<double, 6> e{};
};

// Jittered per-subject descriptor targets. Subject index s draws from
// stream mix64(seed, s); fast and image mode share this, which is what lets
// their outputs be compared.
inline SubjectTargets subject_targets(const CohortSpec& spec, int subject) {
  const bool is_case = subject < spec.n_case;
  const auto& h_base = is_case ? spec.h_case : spec.h_control;
  const auto& e_base = is_case ? spec.e_case : spec.e_control;
  Rng rng(mix64(spec.seed, static_cast<std::uint64_t>(subject)));
  SubjectTargets t;
  for (int i = 0; i < 6; ++i)
    t.h[static_cast<std::size_t>(i)] =
        std::clamp(h_base[static_cast<std::size_t>(i)] + spec.noise_sd * rng.normal(),
                   0.06, 0.94);
  for (int i = 0; i < 6; ++i)
    t.e[static_cast<std::size_t>(i)] =
        std::clamp(e_base[static_cast<std::size_t>(i)] + spec.noise_sd * rng.normal(),
                   1.0, 13.5);
  return t;
}

inline std::string synth_subject_id(int subject) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "synth_%04d", subject);
  return buf;
}

// Fast mode: the jittered targets are the features.
inline FeatureMatrix planted_cohort_features(const CohortSpec& spec) {
  spec.validate();
  FeatureMatrix fm;
  const int n = spec.subjects();
  fm.labels.resize(n);
  fm.values.resize(n, kFeatureCount);
  fm.subject_ids.reserve(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    const SubjectTargets t = subject_targets(spec, s);
    fm.subject_ids.push_back(synth_subject_id(s));
    fm.labels[s] = s < spec.n_case ? 1 : 0;
    for (int i = 0; i < 6; ++i) {
      fm.values(s, i) = t.h[static_cast<std::size_t>(i)];
      fm.values(s, i + 6) = t.e[static_cast<std::size_t>(i)];
    }
  }
  return fm;
}

struct GroundTruth {
  std::vector<std::string> informative_features;
  std::array<double, kFeatureCount> effects{};  // case minus control targets
};

inline GroundTruth ground_truth(const CohortSpec& spec) {
  GroundTruth gt;
  for (int i = 0; i < 6; ++i) {
    gt.effects[static_cast<std::size_t>(i)] =
        spec.h_case[static_cast<std::size_t>(i)] - spec.h_control[static_cast<std::size_t>(i)];
    gt.effects[static_cast<std::size_t>(i + 6)] =
        spec.e_case[static_cast<std::size_t>(i)] - spec.e_control[static_cast<std::size_t>(i)];
  }
  for (int f = 0; f < kFeatureCount; ++f)
    if (gt.effects[static_cast<std::size_t>(f)] != 0.0)
      gt.informative_features.emplace_back(kFeatureNames[static_cast<std::size_t>(f)]);
  return gt;
}

// Image mode, implemented in synth_cohort.cpp: writes <dir>/landmarks.json,
// <dir>/images/*.pgm and <dir>/ground_truth.json.
void write_image_cohort(const CohortSpec& spec, const std::filesystem::path& dir);

void write_ground_truth_json(const std::filesystem::path& path, const CohortSpec& spec);

}  // namespace kneetex
