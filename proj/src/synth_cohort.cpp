#include "kneetex/synth.hpp"

#include "kneetex/image_io.hpp"
#include "kneetex/landmarks_io.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace kneetex {

namespace {

// Stream tags separating the independent per-subject random draws.
constexpr std::uint64_t kGeometryStream = 0x47454f4d;  // geometry jitter
constexpr std::uint64_t kPatchStream = 0x50415443;     // patch synthesis

struct SceneGeometry {
  LandmarkSet landmarks;  // canonical (left) orientation
  int width = 0;
  int height = 0;
};

// Axis-aligned anatomy with every ROI corner on integer pixel centers, so
// extraction reads back composited patches verbatim. The plateau span u is a
// multiple of 200, making all tibial fractions (0.15, 0.175, 0.07, 0.16,
// 0.23 of u) integers; femoral extents are padded by 20 px, placing square
// origins at integer offsets from the integer condyle tips.
SceneGeometry scene_geometry(const CohortSpec& spec, int subject, int side_px, int span_u) {
  Rng geo(mix64(mix64(spec.seed, kGeometryStream), static_cast<std::uint64_t>(subject)));
  const int jx = static_cast<int>(geo.below(9));
  const int jy = static_cast<int>(geo.below(9));
  const int jg = static_cast<int>(geo.below(7));
  const int ja = static_cast<int>(geo.below(9));
  const int jb = static_cast<int>(geo.below(9));
  const int jm = static_cast<int>(geo.below(11));
  const int jl = static_cast<int>(geo.below(11));

  const int offset = static_cast<int>(std::lround(4.0 / spec.pixel_spacing_mm));
  const int pad = 20;
  const int x0 = 80 + jx;
  const int gap = 40 + jg;
  const int y0 = side_px + offset + gap + 40 + jy;
  const int tip_y = y0 - gap;

  SceneGeometry scene;
  LandmarkSet& lm = scene.landmarks;
  lm.medial_plateau = Vec2(x0, y0);
  lm.lateral_plateau = Vec2(x0 + span_u, y0);
  lm.medial_condyle_tip = Vec2(x0 - 12 + ja, tip_y);
  lm.lateral_condyle_tip = Vec2(x0 + span_u + 12 - jb, tip_y);
  const double axis_len = lm.lateral_condyle_tip.x() - lm.medial_condyle_tip.x();
  lm.medial_extent = {20.0 + jm, 20.0 + jm + side_px + pad};
  lm.lateral_extent = {axis_len - (20.0 + jl) - (side_px + pad), axis_len - (20.0 + jl)};
  lm.pixel_spacing_mm = spec.pixel_spacing_mm;
  lm.laterality = Laterality::Left;
  lm.label = subject < spec.n_case ? ClassLabel::Case : ClassLabel::Control;

  scene.width = x0 + span_u + 80;
  scene.height = y0 + (23 * span_u) / 100 + 60;
  return scene;
}

}  // namespace

void write_image_cohort(const CohortSpec& spec, const std::filesystem::path& dir) {
  spec.validate();
  const int side_px = std::max(35, 35 * static_cast<int>(std::lround(spec.patch_size / 35.0)));
  const int span_u = side_px * 40 / 7;  // plateau span; side_px = 0.175 * span_u

  std::filesystem::create_directories(dir / "images");
  std::vector<SubjectRecord> records;
  records.reserve(static_cast<std::size_t>(spec.subjects()));

  for (int s = 0; s < spec.subjects(); ++s) {
    const SceneGeometry scene = scene_geometry(spec, s, side_px, span_u);
    const SubjectTargets targets = subject_targets(spec, s);
    const RoiLayout layout = roi_layout(scene.landmarks);

    ImageU16 image(scene.height, scene.width);
    image.setConstant(5000);

    for (int r = 0; r < 6; ++r) {
      const OrientedRect& roi = layout.rois[static_cast<std::size_t>(r)];
      const auto rows = static_cast<int>(std::lround(roi.height));
      const auto cols = static_cast<int>(std::lround(roi.width));
      const std::uint64_t patch_seed =
          mix64(mix64(spec.seed, kPatchStream), static_cast<std::uint64_t>(s) * 8 + r);

      Patch textured = fbm_patch(targets.h[static_cast<std::size_t>(r)], cols, patch_seed);
      Patch cropped;
      cropped.roi_name = to_string(roi.name);
      cropped.pixels = textured.pixels.topRows(rows);

      const auto levels = static_cast<int>(std::clamp<long>(
          std::lround(std::exp2(targets.e[static_cast<std::size_t>(r)])), 2,
          static_cast<long>(rows) * cols));
      const Patch planted = equal_population_quantize(cropped, levels);

      const auto oy = static_cast<Eigen::Index>(std::lround(roi.origin.y()));
      const auto ox = static_cast<Eigen::Index>(std::lround(roi.origin.x()));
      image.block(oy, ox, rows, cols) = planted.pixels;
    }

    SubjectRecord rec;
    rec.id = synth_subject_id(s);
    rec.image_path = "images/" + rec.id + ".pgm";
    rec.landmarks = scene.landmarks;
    if (s % 4 == 3) {
      // Store a right knee: flip the rendered image and reflect the
      // annotation; extraction mirrors both back to canonical pose.
      image = flip_horizontal(image);
      rec.landmarks.laterality = Laterality::Right;
      rec.landmarks = mirror_for_laterality(rec.landmarks, scene.width);
    }
    write_pgm(dir / rec.image_path, image);
    records.push_back(std::move(rec));
  }

  write_landmarks_json(dir / "landmarks.json", records);
  write_ground_truth_json(dir / "ground_truth.json", spec);
}

void write_ground_truth_json(const std::filesystem::path& path, const CohortSpec& spec) {
  const GroundTruth gt = ground_truth(spec);
  nlohmann::json j;
  j["n_case"] = spec.n_case;
  j["n_control"] = spec.n_control;
  j["seed"] = spec.seed;
  j["noise_sd"] = spec.noise_sd;
  j["informative_features"] = gt.informative_features;
  nlohmann::json effects = nlohmann::json::object();
  for (int f = 0; f < kFeatureCount; ++f)
    effects[kFeatureNames[static_cast<std::size_t>(f)]] = gt.effects[static_cast<std::size_t>(f)];
  j["effects"] = effects;
  j["targets"]["h_case"] = spec.h_case;
  j["targets"]["h_control"] = spec.h_control;
  j["targets"]["e_case"] = spec.e_case;
  j["targets"]["e_control"] = spec.e_control;

  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path.string());
  os << j.dump(2) << "\n";
  if (!os) throw InputError("write failed: " + path.string());
}

}  // namespace kneetex
