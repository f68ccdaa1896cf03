#include "kneetex/reports.hpp"

#include "kneetex/errors.hpp"
#include "kneetex/version.hpp"

#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace kneetex {

std::string fmt_g9(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

void write_report_header(std::ostream& os, const HeaderPairs& pairs) {
  os << "# kneetex " << kVersion << "\n";
  for (const auto& [key, value] : pairs) os << "# " << key << "=" << value << "\n";
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path.string());
  return os;
}

void finish(std::ofstream& os, const std::filesystem::path& path) {
  if (!os) throw InputError("write failed: " + path.string());
}

}  // namespace

void write_layout_csv(const std::filesystem::path& path, const RoiLayout& layout,
                      const HeaderPairs& header) {
  std::ofstream os = open_out(path);
  write_report_header(os, header);
  os << "roi,c0_x,c0_y,c1_x,c1_y,c2_x,c2_y,c3_x,c3_y,width,height,out_of_bone\n";
  for (const OrientedRect& r : layout.rois) {
    os << to_string(r.name);
    for (const Vec2& c : r.corners()) os << ',' << fmt_g9(c.x()) << ',' << fmt_g9(c.y());
    os << ',' << fmt_g9(r.width) << ',' << fmt_g9(r.height) << ','
       << (r.out_of_bone ? 1 : 0) << "\n";
  }
  finish(os, path);
}

void write_screen_csv(const std::filesystem::path& path, std::span<const ScreenRow> rows,
                      const HeaderPairs& header) {
  std::ofstream os = open_out(path);
  write_report_header(os, header);
  os << "feature,n_case,n_control,mean_case,mean_control,sd_case,sd_control,"
        "t,df,p,normality_k2,normality_p,residuals_normal\n";
  for (const ScreenRow& row : rows) {
    const TTestResult& t = row.ttest;
    os << row.feature << ',' << t.n_a << ',' << t.n_b << ',' << fmt_g9(t.mean_a) << ','
       << fmt_g9(t.mean_b) << ',' << fmt_g9(std::sqrt(t.var_a)) << ','
       << fmt_g9(std::sqrt(t.var_b)) << ',' << fmt_g9(t.t) << ',' << fmt_g9(t.df) << ','
       << fmt_g9(t.p) << ',' << fmt_g9(row.normality.k2) << ',' << fmt_g9(row.normality.p)
       << ',' << (row.residuals_normal ? 1 : 0) << "\n";
  }
  finish(os, path);
}

std::string screen_grid_text(std::span<const ScreenRow> rows) {
  if (rows.size() != kFeatureCount)
    throw InputError("screen grid: expected 12 rows in canonical order");

  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%-4s %28s %28s %10s   %28s %28s %10s\n", "ROI",
                "H case", "H control", "p", "E case", "E control", "p");
  os << line;
  for (int roi = 0; roi < 6; ++roi) {
    const ScreenRow& h = rows[static_cast<std::size_t>(roi)];
    const ScreenRow& e = rows[static_cast<std::size_t>(roi + 6)];
    char hc[32], hk[32], ec[32], ek[32];
    std::snprintf(hc, sizeof(hc), "%.3f (%.3f)", h.ttest.mean_a, std::sqrt(h.ttest.var_a));
    std::snprintf(hk, sizeof(hk), "%.3f (%.3f)", h.ttest.mean_b, std::sqrt(h.ttest.var_b));
    std::snprintf(ec, sizeof(ec), "%.2f (%.2f)", e.ttest.mean_a, std::sqrt(e.ttest.var_a));
    std::snprintf(ek, sizeof(ek), "%.2f (%.2f)", e.ttest.mean_b, std::sqrt(e.ttest.var_b));
    const char* name = to_string(static_cast<RoiName>(roi));
    std::snprintf(line, sizeof(line), "%-4s %28s %28s %10.4g   %28s %28s %10.4g\n", name,
                  hc, hk, h.ttest.p, ec, ek, e.ttest.p);
    os << line;
  }
  return os.str();
}

void write_search_csv(const std::filesystem::path& path,
                      std::span<const SubsetResult> results, const HeaderPairs& header) {
  std::ofstream os = open_out(path);
  write_report_header(os, header);
  os << "mask,n_features,features,mean_auc,std_auc\n";
  for (const SubsetResult& r : results)
    os << r.mask << ',' << r.cardinality << ',' << mask_feature_names(r.mask) << ','
       << fmt_g9(r.mean_auc) << ',' << fmt_g9(r.std_auc) << "\n";
  finish(os, path);
}

std::vector<SubsetResult> read_search_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot read " + path.string());
  std::vector<SubsetResult> results;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("mask,", 0) != 0)
        throw InputError(path.string() + ": line " + std::to_string(line_no) +
                         ": bad search header");
      continue;
    }
    SubsetResult r;
    char features[128];
    if (std::sscanf(line.c_str(), "%" SCNu32 ",%d,%127[^,],%lf,%lf", &r.mask,
                    &r.cardinality, features, &r.mean_auc, &r.std_auc) != 5)
      throw InputError(path.string() + ": line " + std::to_string(line_no) +
                       ": bad search row");
    results.push_back(r);
  }
  if (!header_seen) throw InputError(path.string() + ": no search header");
  return results;
}

void write_best_csv(const std::filesystem::path& path,
                    std::span<const BestPerCardinality> best, const HeaderPairs& header) {
  std::ofstream os = open_out(path);
  write_report_header(os, header);
  os << "n_features,mask,features,mean_auc,std_auc\n";
  for (const BestPerCardinality& b : best)
    os << b.cardinality << ',' << b.best.mask << ',' << mask_feature_names(b.best.mask)
       << ',' << fmt_g9(b.best.mean_auc) << ',' << fmt_g9(b.best.std_auc) << "\n";
  finish(os, path);
}

void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve,
                   const HeaderPairs& header) {
  std::ofstream os = open_out(path);
  write_report_header(os, header);
  os << "# auc=" << fmt_g9(curve.area) << "\n";
  os << "fpr,tpr\n";
  for (std::size_t i = 0; i < curve.fpr.size(); ++i)
    os << fmt_g9(curve.fpr[i]) << ',' << fmt_g9(curve.tpr[i]) << "\n";
  finish(os, path);
}

void write_cv_report_csv(const std::filesystem::path& path, const CvResult& result,
                         const HeaderPairs& header) {
  std::ofstream os = open_out(path);
  write_report_header(os, header);
  os << "# mean_auc=" << fmt_g9(result.mean_auc) << "\n";
  os << "# std_auc=" << fmt_g9(result.std_auc) << "\n";
  os << "repeat,auc\n";
  for (Eigen::Index r = 0; r < result.per_repeat.size(); ++r)
    os << r << ',' << fmt_g9(result.per_repeat[r]) << "\n";
  finish(os, path);
}

void write_projection_csv(const std::filesystem::path& path, const FeatureMatrix& fm,
                          const Projection& projection, const HeaderPairs& header) {
  if (projection.x.size() != fm.rows() || projection.y.size() != fm.rows())
    throw InputError("projection csv: size mismatch");
  std::ofstream os = open_out(path);
  write_report_header(os, header);
  os << "# hyperplane_x=" << fmt_g9(projection.hyperplane_x) << "\n";
  os << "subject_id,label,x,y\n";
  for (Eigen::Index i = 0; i < fm.rows(); ++i)
    os << fm.subject_ids[static_cast<std::size_t>(i)] << ',' << fm.labels[i] << ','
       << fmt_g9(projection.x[i]) << ',' << fmt_g9(projection.y[i]) << "\n";
  finish(os, path);
}

std::vector<std::filesystem::path> write_pairs_csvs(const std::filesystem::path& out_dir,
                                                    const FeatureMatrix& fm,
                                                    std::uint32_t mask,
                                                    const HeaderPairs& header) {
  fm.validate();
  std::vector<int> cols;
  for (int f = 0; f < kFeatureCount; ++f)
    if (mask & (1u << f)) cols.push_back(f);
  if (cols.size() < 2)
    throw InputError("pairs: mask must select at least two features");

  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (std::size_t a = 0; a < cols.size(); ++a) {
    for (std::size_t b = a + 1; b < cols.size(); ++b) {
      const char* name_a = kFeatureNames[static_cast<std::size_t>(cols[a])];
      const char* name_b = kFeatureNames[static_cast<std::size_t>(cols[b])];
      const std::filesystem::path path =
          out_dir / (std::string("pair_") + name_a + "_" + name_b + ".csv");
      std::ofstream os = open_out(path);
      write_report_header(os, header);
      os << "subject_id,label," << name_a << ',' << name_b << "\n";
      for (Eigen::Index i = 0; i < fm.rows(); ++i)
        os << fm.subject_ids[static_cast<std::size_t>(i)] << ',' << fm.labels[i] << ','
           << fmt_g9(fm.values(i, cols[a])) << ',' << fmt_g9(fm.values(i, cols[b]))
           << "\n";
      finish(os, path);
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace kneetex
