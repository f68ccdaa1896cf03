#pragma once

/**
 * @file types.hpp
 * @brief Shared scalar/matrix aliases and the intensity range convention.
 *
 * Images are 14-bit grayscale stored row-major so that a matrix row is an
 * image scanline; pixel (x, y) is image(y, x).
 */

#include <Eigen/Dense>

#include <cstdint>

namespace kneetex {

using Vec2 = Eigen::Vector2d;

using ImageU16 =
    Eigen::Matrix<std::uint16_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kIntensityMax = 16383;  // 2^14 - 1
inline constexpr int kIntensityLevels = 16384;

enum class Laterality { Left, Right };

inline const char* to_string(Laterality s) {
  return s == Laterality::Left ? "L" : "R";
}

// Label convention used throughout: case = 1, control = 0.
enum class ClassLabel : int { Control = 0, Case = 1, Unlabeled = -1 };

}  // namespace kneetex
