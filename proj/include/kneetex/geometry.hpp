#pragma once

/**
 * @file geometry.hpp
 * @brief Landmark-anchored ROI layout.
 *
 * Image coordinates are pixel-centered with y growing downward. The plateau
 * frame maps the unit segment (0,0)-(1,0) onto medial->lateral plateau
 * points; its v axis is u rotated +90 degrees, perp(x, y) = (-y, x), which
 * points distally (into the tibia) for a left knee in canonical pose.
 *
 * The tibial band is the unit-frame rectangle [0.15, 0.85] x [0.07, 0.23]
 * split into four equal quarters T0..T3 from medial to lateral. The two
 * femoral ROIs are squares with the tibial quarter width as side length,
 * seated round(4.0 mm / pixel spacing) pixels proximal of the condyle tip
 * line and centered on each condyle's extent interval.
 */

#include "kneetex/errors.hpp"
#include "kneetex/types.hpp"

#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <string>

namespace kneetex {

inline Vec2 perp(const Vec2& v) { return Vec2(-v.y(), v.x()); }

enum class RoiName { F0, F1, T0, T1, T2, T3 };

inline const char* to_string(RoiName name) {
  switch (name) {
    case RoiName::F0: return "F0";
    case RoiName::F1: return "F1";
    case RoiName::T0: return "T0";
    case RoiName::T1: return "T1";
    case RoiName::T2: return "T2";
    case RoiName::T3: return "T3";
  }
  return "?";
}

// Condyle support interval along the condyle axis, in pixels measured from
// the medial condyle tip. lo < hi.
struct ExtentInterval {
  double lo = 0.0;
  double hi = 0.0;

  double center() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
};

struct LandmarkSet {
  Vec2 medial_plateau;
  Vec2 lateral_plateau;
  Vec2 medial_condyle_tip;
  Vec2 lateral_condyle_tip;
  ExtentInterval medial_extent;
  ExtentInterval lateral_extent;
  double pixel_spacing_mm = 0.0;
  Laterality laterality = Laterality::Left;
  ClassLabel label = ClassLabel::Unlabeled;

  void validate() const {
    if (!(pixel_spacing_mm > 0.0))
      throw InputError("landmarks: pixel spacing must be positive");
    if ((lateral_plateau - medial_plateau).norm() < 1e-9)
      throw DegenerateFrameError("landmarks: plateau points coincide");
    if ((lateral_condyle_tip - medial_condyle_tip).norm() < 1e-9)
      throw DegenerateFrameError("landmarks: condyle tips coincide");
    if (!(medial_extent.width() > 0.0) || !(lateral_extent.width() > 0.0))
      throw InputError("landmarks: condyle extents must have positive width");
  }
};

// Rectangle given by its top-left corner and unit axes; u runs along the
// width, v = perp(u) along the height. Sizes are in pixels.
struct OrientedRect {
  Vec2 origin;
  Vec2 u_axis;
  Vec2 v_axis;
  double width = 0.0;
  double height = 0.0;
  RoiName name = RoiName::T0;
  bool out_of_bone = false;

  std::array<Vec2, 4> corners() const {
    const Vec2 du = width * u_axis;
    const Vec2 dv = height * v_axis;
    return {origin, origin + du, origin + du + dv, origin + dv};
  }
};

// Similarity transform taking unit-frame coordinates to pixel coordinates:
// (0,0) -> medial, (1,0) -> lateral, (0,1) -> medial + perp(lateral-medial).
inline Eigen::Affine2d plateau_frame(const Vec2& medial, const Vec2& lateral) {
  const Vec2 u = lateral - medial;
  if (u.norm() < 1e-9)
    throw DegenerateFrameError("plateau frame: anchor points coincide");
  Eigen::Affine2d frame;
  frame.linear() << u, perp(u);
  frame.translation() = medial;
  return frame;
}

inline std::array<OrientedRect, 4> tibia_rois(const Eigen::Affine2d& frame) {
  constexpr double x0 = 0.15, x1 = 0.85, y0 = 0.07, y1 = 0.23;
  const double scale = frame.linear().col(0).norm();
  if (scale < 1e-9) throw DegenerateFrameError("tibia ROIs: zero-scale frame");
  const Vec2 u = frame.linear().col(0) / scale;
  const Vec2 v = frame.linear().col(1) / scale;
  const double quarter = (x1 - x0) / 4.0;

  std::array<OrientedRect, 4> rois;
  for (int i = 0; i < 4; ++i) {
    OrientedRect& r = rois[static_cast<std::size_t>(i)];
    r.origin = frame * Vec2(x0 + quarter * i, y0);
    r.u_axis = u;
    r.v_axis = v;
    r.width = quarter * scale;
    r.height = (y1 - y0) * scale;
    r.name = static_cast<RoiName>(static_cast<int>(RoiName::T0) + i);
  }
  return rois;
}

// Two squares of the given side length, bottom edges seated `offset` pixels
// proximal of the condyle tip line, each centered on its extent interval.
// offset = round(4.0 mm / pixel spacing). A square wider than its extent is
// flagged out_of_bone rather than rejected.
inline std::array<OrientedRect, 2> femoral_rois(const LandmarkSet& lm, double side) {
  const Vec2 axis = lm.lateral_condyle_tip - lm.medial_condyle_tip;
  if (axis.norm() < 1e-9)
    throw DegenerateFrameError("femoral ROIs: condyle tips coincide");
  const Vec2 u = axis.normalized();
  const Vec2 v = perp(u);
  const double offset =
      static_cast<double>(std::lround(4.0 / lm.pixel_spacing_mm));

  std::array<OrientedRect, 2> rois;
  const std::array<ExtentInterval, 2> extents = {lm.medial_extent, lm.lateral_extent};
  for (int i = 0; i < 2; ++i) {
    const ExtentInterval& ext = extents[static_cast<std::size_t>(i)];
    OrientedRect& r = rois[static_cast<std::size_t>(i)];
    r.origin = lm.medial_condyle_tip + (ext.center() - side / 2.0) * u -
               (offset + side) * v;
    r.u_axis = u;
    r.v_axis = v;
    r.width = side;
    r.height = side;
    r.name = i == 0 ? RoiName::F0 : RoiName::F1;
    r.out_of_bone = ext.width() < side;
  }
  return rois;
}

// Canonical ROI order: F0, F1, T0, T1, T2, T3. Feature vectors, CSV columns
// and subset masks all follow it.
struct RoiLayout {
  std::array<OrientedRect, 6> rois;

  const OrientedRect& by_name(RoiName name) const {
    for (const OrientedRect& r : rois)
      if (r.name == name) return r;
    throw std::logic_error("roi layout: unknown name");
  }
};

inline RoiLayout roi_layout(const LandmarkSet& lm) {
  lm.validate();
  const Eigen::Affine2d frame = plateau_frame(lm.medial_plateau, lm.lateral_plateau);
  const std::array<OrientedRect, 4> tibia = tibia_rois(frame);
  const std::array<OrientedRect, 2> femoral = femoral_rois(lm, tibia[0].width);
  RoiLayout layout;
  layout.rois = {femoral[0], femoral[1], tibia[0], tibia[1], tibia[2], tibia[3]};
  return layout;
}

// Reflects landmark coordinates about the vertical image midline,
// x' = (width - 1) - x, when the recorded side differs from the canonical
// one. Extent intervals are lengths along the condyle axis and survive the
// reflection unchanged. The laterality field is left as recorded, so
// applying the function twice is the identity. The caller is responsible
// for flipping the image itself.
inline LandmarkSet mirror_for_laterality(const LandmarkSet& lm, int image_width,
                                         Laterality canonical = Laterality::Left) {
  if (lm.laterality == canonical) return lm;
  const double w = static_cast<double>(image_width - 1);
  LandmarkSet out = lm;
  out.medial_plateau.x() = w - lm.medial_plateau.x();
  out.lateral_plateau.x() = w - lm.lateral_plateau.x();
  out.medial_condyle_tip.x() = w - lm.medial_condyle_tip.x();
  out.lateral_condyle_tip.x() = w - lm.lateral_condyle_tip.x();
  return out;
}

}  // namespace kneetex
