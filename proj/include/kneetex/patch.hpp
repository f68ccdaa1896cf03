#pragma once

/**
 * @file patch.hpp
 * @brief Pixel resampling of oriented ROIs.
 *
 * A ROI of size w x h pixels is sampled on a round(w) x round(h) grid with
 * unit step along its axes, position(i, j) = origin + j*u + i*v. Samples are
 * bilinearly interpolated, rounded to the nearest integer and clamped to the
 * 14-bit range, so an axis-aligned integer-origin ROI reproduces the source
 * pixels exactly.
 */

#include "kneetex/errors.hpp"
#include "kneetex/geometry.hpp"
#include "kneetex/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace kneetex {

struct Patch {
  Eigen::Matrix<std::uint16_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> pixels;
  std::string roi_name;

  Eigen::Index rows() const { return pixels.rows(); }
  Eigen::Index cols() const { return pixels.cols(); }
};

template <typename Derived>
Patch extract_patch(const Eigen::MatrixBase<Derived>& image, const OrientedRect& roi) {
  const auto rows = static_cast<Eigen::Index>(std::lround(roi.height));
  const auto cols = static_cast<Eigen::Index>(std::lround(roi.width));
  if (rows < 1 || cols < 1)
    throw PatchSizeError(std::string("patch ") + to_string(roi.name) +
                         ": ROI smaller than one pixel");

  if (image.rows() < 2 || image.cols() < 2)
    throw InputError("patch: image too small for bilinear sampling");

  const double max_x = static_cast<double>(image.cols() - 1);
  const double max_y = static_cast<double>(image.rows() - 1);
  constexpr double eps = 1e-9;
  for (Eigen::Index i : {Eigen::Index(0), rows - 1}) {
    for (Eigen::Index j : {Eigen::Index(0), cols - 1}) {
      const Vec2 p = roi.origin + static_cast<double>(j) * roi.u_axis +
                     static_cast<double>(i) * roi.v_axis;
      if (p.x() < -eps || p.x() > max_x + eps || p.y() < -eps || p.y() > max_y + eps)
        throw OutOfBoundsError(std::string("patch ") + to_string(roi.name) +
                               ": sample (" + std::to_string(p.x()) + ", " +
                               std::to_string(p.y()) + ") outside image");
    }
  }

  Patch patch;
  patch.roi_name = to_string(roi.name);
  patch.pixels.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const Vec2 p = roi.origin + static_cast<double>(j) * roi.u_axis +
                     static_cast<double>(i) * roi.v_axis;
      const double x = std::clamp(p.x(), 0.0, max_x);
      const double y = std::clamp(p.y(), 0.0, max_y);
      // Anchor on the upper-left neighbor; pulling the anchor back at the
      // far edge keeps both neighbors in range while fx, fy reach exactly 1.
      const auto x0 = std::min(static_cast<Eigen::Index>(std::floor(x)), image.cols() - 2);
      const auto y0 = std::min(static_cast<Eigen::Index>(std::floor(y)), image.rows() - 2);
      const double fx = x - static_cast<double>(x0);
      const double fy = y - static_cast<double>(y0);
      const double v00 = static_cast<double>(image(y0, x0));
      const double v01 = static_cast<double>(image(y0, x0 + 1));
      const double v10 = static_cast<double>(image(y0 + 1, x0));
      const double v11 = static_cast<double>(image(y0 + 1, x0 + 1));
      const double value = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v01) +
                           fy * ((1.0 - fx) * v10 + fx * v11);
      const long q = std::clamp(std::lround(value), 0l, static_cast<long>(kIntensityMax));
      patch.pixels(i, j) = static_cast<std::uint16_t>(q);
    }
  }
  return patch;
}

inline ImageU16 flip_horizontal(const ImageU16& image) {
  return image.rowwise().reverse();
}

}  // namespace kneetex
