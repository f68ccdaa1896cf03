#pragma once

/**
 * @file reports.hpp
 * @brief CSV, text and SVG outputs of the pipeline stages.
 *
 * Every file starts with `# kneetex <version>` followed by `# key=value`
 * comment lines recording the run configuration (seed, folds, repeats, C,
 * mask range as applicable). Floats are rendered with %.9g. Scheduling
 * details such as thread count are deliberately not recorded: the same
 * configuration must produce byte-identical files at any parallelism.
 */

#include "kneetex/eval.hpp"
#include "kneetex/feature_matrix.hpp"
#include "kneetex/geometry.hpp"
#include "kneetex/search.hpp"
#include "kneetex/stats.hpp"
#include "kneetex/svm.hpp"
#include "kneetex/types.hpp"

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace kneetex {

std::string fmt_g9(double value);

using HeaderPairs = std::vector<std::pair<std::string, std::string>>;

void write_report_header(std::ostream& os, const HeaderPairs& pairs);

void write_layout_csv(const std::filesystem::path& path, const RoiLayout& layout,
                      const HeaderPairs& header = {});

void write_features_csv(const std::filesystem::path& path, const FeatureMatrix& fm,
                        const HeaderPairs& header = {});

FeatureMatrix read_features_csv(const std::filesystem::path& path);

void write_screen_csv(const std::filesystem::path& path,
                      std::span<const ScreenRow> rows, const HeaderPairs& header = {});

// Fixed-width per-ROI grid of group means (sd) and p-values for both
// descriptors, one ROI per row.
std::string screen_grid_text(std::span<const ScreenRow> rows);

void write_search_csv(const std::filesystem::path& path,
                      std::span<const SubsetResult> results,
                      const HeaderPairs& header = {});

std::vector<SubsetResult> read_search_csv(const std::filesystem::path& path);

void write_best_csv(const std::filesystem::path& path,
                    std::span<const BestPerCardinality> best,
                    const HeaderPairs& header = {});

void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve,
                   const HeaderPairs& header = {});

void write_cv_report_csv(const std::filesystem::path& path, const CvResult& result,
                         const HeaderPairs& header = {});

void write_projection_csv(const std::filesystem::path& path, const FeatureMatrix& fm,
                          const Projection& projection, const HeaderPairs& header = {});

// One CSV per unordered feature pair of the mask, named pair_<A>_<B>.csv,
// with columns subject_id,label,<A>,<B>. Returns the paths written.
std::vector<std::filesystem::path> write_pairs_csvs(
    const std::filesystem::path& out_dir, const FeatureMatrix& fm, std::uint32_t mask,
    const HeaderPairs& header = {});

void write_model_json(const std::filesystem::path& path, const LinearModel& model);
LinearModel read_model_json(const std::filesystem::path& path);

// ROI layout over the radiograph as a standalone SVG; the image travels
// inside the file as a base64 8-bit PNG.
void write_overlay_svg(const std::filesystem::path& path, const ImageU16& image,
                       const RoiLayout& layout, const LandmarkSet& landmarks);

}  // namespace kneetex
