#include "kneetex/landmarks_io.hpp"

#include "kneetex/errors.hpp"

#include <json.hpp>

#include <fstream>

namespace kneetex {

namespace {

using nlohmann::json;

std::string subject_tag(const json& j, std::size_t index) {
  if (j.contains("id") && j["id"].is_string()) return j["id"].get<std::string>();
  return "entry " + std::to_string(index);
}

Vec2 read_point(const json& j, const char* key, const std::string& tag) {
  if (!j.contains(key))
    throw InputError("landmarks: " + tag + ": missing key '" + key + "'");
  const json& p = j[key];
  if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
    throw InputError("landmarks: " + tag + ": '" + key + "' must be [x, y]");
  return Vec2(p[0].get<double>(), p[1].get<double>());
}

ExtentInterval read_extent(const json& j, const char* key, const std::string& tag) {
  if (!j.contains(key))
    throw InputError("landmarks: " + tag + ": missing key '" + key + "'");
  const json& p = j[key];
  if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
    throw InputError("landmarks: " + tag + ": '" + key + "' must be [lo, hi]");
  ExtentInterval e{p[0].get<double>(), p[1].get<double>()};
  if (!(e.hi > e.lo))
    throw InputError("landmarks: " + tag + ": '" + key + "' must satisfy lo < hi");
  return e;
}

SubjectRecord parse_subject(const json& j, std::size_t index) {
  const std::string tag = subject_tag(j, index);
  if (!j.is_object()) throw InputError("landmarks: " + tag + ": not an object");
  if (!j.contains("image") || !j["image"].is_string())
    throw InputError("landmarks: " + tag + ": missing key 'image'");

  SubjectRecord rec;
  rec.image_path = j["image"].get<std::string>();
  rec.id = j.contains("id") && j["id"].is_string()
               ? j["id"].get<std::string>()
               : std::filesystem::path(rec.image_path).stem().string();

  LandmarkSet& lm = rec.landmarks;
  lm.medial_plateau = read_point(j, "medial_plateau", tag);
  lm.lateral_plateau = read_point(j, "lateral_plateau", tag);
  lm.medial_condyle_tip = read_point(j, "medial_condyle_tip", tag);
  lm.lateral_condyle_tip = read_point(j, "lateral_condyle_tip", tag);
  lm.medial_extent = read_extent(j, "medial_condyle_extent", tag);
  lm.lateral_extent = read_extent(j, "lateral_condyle_extent", tag);

  if (!j.contains("pixel_spacing_mm") || !j["pixel_spacing_mm"].is_number())
    throw InputError("landmarks: " + tag + ": missing key 'pixel_spacing_mm'");
  lm.pixel_spacing_mm = j["pixel_spacing_mm"].get<double>();

  if (!j.contains("laterality") || !j["laterality"].is_string())
    throw InputError("landmarks: " + tag + ": missing key 'laterality'");
  const std::string side = j["laterality"].get<std::string>();
  if (side == "L") lm.laterality = Laterality::Left;
  else if (side == "R") lm.laterality = Laterality::Right;
  else throw InputError("landmarks: " + tag + ": laterality must be \"L\" or \"R\"");

  if (j.contains("label") && !j["label"].is_null()) {
    if (!j["label"].is_number_integer())
      throw InputError("landmarks: " + tag + ": label must be 0, 1 or null");
    const int label = j["label"].get<int>();
    if (label != 0 && label != 1)
      throw InputError("landmarks: " + tag + ": label must be 0, 1 or null");
    lm.label = label == 1 ? ClassLabel::Case : ClassLabel::Control;
  }

  try {
    lm.validate();
  } catch (const InputError& e) {
    throw InputError("landmarks: " + tag + ": " + e.what());
  }
  return rec;
}

json subject_to_json(const SubjectRecord& rec) {
  const LandmarkSet& lm = rec.landmarks;
  json j;
  j["id"] = rec.id;
  j["image"] = rec.image_path;
  if (lm.label != ClassLabel::Unlabeled) j["label"] = static_cast<int>(lm.label);
  j["laterality"] = to_string(lm.laterality);
  j["pixel_spacing_mm"] = lm.pixel_spacing_mm;
  j["medial_plateau"] = {lm.medial_plateau.x(), lm.medial_plateau.y()};
  j["lateral_plateau"] = {lm.lateral_plateau.x(), lm.lateral_plateau.y()};
  j["medial_condyle_tip"] = {lm.medial_condyle_tip.x(), lm.medial_condyle_tip.y()};
  j["lateral_condyle_tip"] = {lm.lateral_condyle_tip.x(), lm.lateral_condyle_tip.y()};
  j["medial_condyle_extent"] = {lm.medial_extent.lo, lm.medial_extent.hi};
  j["lateral_condyle_extent"] = {lm.lateral_extent.lo, lm.lateral_extent.hi};
  return j;
}

}  // namespace

std::vector<SubjectRecord> read_landmarks_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot read " + path.string());
  json root;
  try {
    root = json::parse(is);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }

  std::vector<SubjectRecord> records;
  if (root.is_object()) {
    records.push_back(parse_subject(root, 0));
  } else if (root.is_array()) {
    for (std::size_t i = 0; i < root.size(); ++i)
      records.push_back(parse_subject(root[i], i));
  } else {
    throw InputError(path.string() + ": expected a subject object or array");
  }
  return records;
}

void write_landmarks_json(const std::filesystem::path& path,
                          const std::vector<SubjectRecord>& records) {
  json root = json::array();
  for (const SubjectRecord& rec : records) root.push_back(subject_to_json(rec));
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path.string());
  os << root.dump(2) << "\n";
  if (!os) throw InputError("write failed: " + path.string());
}

}  // namespace kneetex
