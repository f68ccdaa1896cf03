#pragma once

/**
 * @file pipeline.hpp
 * @brief Image + landmarks -> feature vector, and whole-cohort extraction.
 *
 * Right knees are mirrored into the canonical left orientation before the
 * ROI layout is built, so one layout convention serves both sides.
 */

#include "kneetex/descriptors.hpp"
#include "kneetex/feature_matrix.hpp"
#include "kneetex/geometry.hpp"
#include "kneetex/image_io.hpp"
#include "kneetex/landmarks_io.hpp"
#include "kneetex/patch.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace kneetex {

inline FeatureVector extract_subject(const ImageU16& image, const LandmarkSet& landmarks,
                                     std::string subject_id,
                                     Laterality canonical = Laterality::Left) {
  const LandmarkSet lm =
      mirror_for_laterality(landmarks, static_cast<int>(image.cols()), canonical);
  const RoiLayout layout = roi_layout(lm);
  if (landmarks.laterality != canonical) {
    const ImageU16 flipped = flip_horizontal(image);
    return feature_vector(flipped, layout, std::move(subject_id), landmarks.label);
  }
  return feature_vector(image, layout, std::move(subject_id), landmarks.label);
}

// Reads every subject listed in a landmarks file, extracts its features, and
// stacks them. Image paths resolve relative to the landmarks file. Subjects
// whose extraction fails abort with their aggregated error unless `skipped`
// is given, in which case their messages are collected there instead.
FeatureMatrix extract_cohort(const std::filesystem::path& landmarks_path,
                             Laterality canonical = Laterality::Left,
                             std::vector<std::string>* skipped = nullptr);

}  // namespace kneetex
