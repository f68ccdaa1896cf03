#include "kneetex/pipeline.hpp"

namespace kneetex {

FeatureMatrix extract_cohort(const std::filesystem::path& landmarks_path,
                             Laterality canonical, std::vector<std::string>* skipped) {
  const std::vector<SubjectRecord> records = read_landmarks_json(landmarks_path);
  const std::filesystem::path base = landmarks_path.parent_path();

  FeatureMatrix fm;
  for (const SubjectRecord& rec : records) {
    try {
      const ImageU16 image = read_image(base / rec.image_path);
      fm.append(extract_subject(image, rec.landmarks, rec.id, canonical));
    } catch (const InputError& e) {
      if (!skipped) throw;
      skipped->push_back(e.what());
    }
  }
  return fm;
}

}  // namespace kneetex
