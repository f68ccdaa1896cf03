#pragma once

/**
 * @file landmarks_io.hpp
 * @brief Landmark JSON reading and writing.
 *
 * The file is either one subject object or an array of them:
 *
 *   {
 *     "image": "images/subject_0001.pgm",
 *     "id": "subject_0001",                  // optional, defaults to the
 *                                            // image filename stem
 *     "label": 1,                            // optional: 1 case, 0 control
 *     "laterality": "L",
 *     "pixel_spacing_mm": 0.075,
 *     "medial_plateau": [x, y],
 *     "lateral_plateau": [x, y],
 *     "medial_condyle_tip": [x, y],
 *     "lateral_condyle_tip": [x, y],
 *     "medial_condyle_extent": [lo, hi],     // px along the condyle axis,
 *     "lateral_condyle_extent": [lo, hi]     // measured from the medial tip
 *   }
 *
 * Errors name the offending subject and key.
 */

#include "kneetex/geometry.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace kneetex {

struct SubjectRecord {
  std::string id;
  std::string image_path;  // as written in the file, relative to its directory
  LandmarkSet landmarks;
};

std::vector<SubjectRecord> read_landmarks_json(const std::filesystem::path& path);
void write_landmarks_json(const std::filesystem::path& path,
                          const std::vector<SubjectRecord>& records);

}  // namespace kneetex
