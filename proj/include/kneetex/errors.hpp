#pragma once

/**
 * @file errors.hpp
 * @brief Exception taxonomy. Everything caused by bad inputs or degenerate
 *        data derives from InputError; the CLI maps those to exit code 1 and
 *        anything else to exit code 2.
 */

#include <stdexcept>
#include <string>

namespace kneetex {

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Landmark frame with coincident anchor points.
class DegenerateFrameError : public InputError {
 public:
  using InputError::InputError;
};

// A ROI corner or sample position falls outside the image.
class OutOfBoundsError : public InputError {
 public:
  using InputError::InputError;
};

// Patch below the minimum size accepted by the descriptors.
class PatchSizeError : public InputError {
 public:
  using InputError::InputError;
};

// Roughness estimation impossible: constant patch or too few usable lags.
class UndefinedRoughnessError : public InputError {
 public:
  using InputError::InputError;
};

// Statistical routine fed fewer observations than it needs.
class InsufficientDataError : public InputError {
 public:
  using InputError::InputError;
};

// Ranking metric or CV split asked of a single-class label vector.
class SingleClassError : public InputError {
 public:
  using InputError::InputError;
};

// One or more ROIs of a subject failed during feature extraction.
class FeatureExtractionError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace kneetex
