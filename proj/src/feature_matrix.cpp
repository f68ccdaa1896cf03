#include "kneetex/feature_matrix.hpp"

#include "kneetex/reports.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace kneetex {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& text, int line_no, int column) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw InputError("features csv: line " + std::to_string(line_no) + ", column " +
                     std::to_string(column) + ": not a number: '" + text + "'");
  return value;
}

}  // namespace

void FeatureMatrix::append(const FeatureVector& fv) {
  if (fv.label != ClassLabel::Case && fv.label != ClassLabel::Control)
    throw InputError("feature matrix: subject " + fv.subject_id + " has no class label");
  const Eigen::Index r = values.rows();
  subject_ids.push_back(fv.subject_id);
  labels.conservativeResize(r + 1);
  values.conservativeResize(r + 1, kFeatureCount);
  labels[r] = fv.label == ClassLabel::Case ? 1 : 0;
  values.row(r) = fv.values.transpose();
}

void FeatureMatrix::validate() const {
  const auto n = values.rows();
  if (n == 0) throw InputError("feature matrix: empty");
  if (labels.size() != n || static_cast<Eigen::Index>(subject_ids.size()) != n)
    throw InputError("feature matrix: inconsistent row counts");
  if (values.cols() != kFeatureCount)
    throw InputError("feature matrix: expected 12 feature columns");
  if (!values.allFinite()) throw InputError("feature matrix: non-finite value");
  for (Eigen::Index i = 0; i < n; ++i)
    if (labels[i] != 0 && labels[i] != 1)
      throw InputError("feature matrix: label of " + subject_ids[static_cast<std::size_t>(i)] +
                       " must be 0 or 1");
}

void write_features_csv(const std::filesystem::path& path, const FeatureMatrix& fm,
                        const HeaderPairs& header) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path.string());
  write_report_header(os, header);
  os << "subject_id,label";
  for (const char* name : kFeatureNames) os << ',' << name;
  os << "\n";
  for (Eigen::Index i = 0; i < fm.rows(); ++i) {
    os << fm.subject_ids[static_cast<std::size_t>(i)] << ',' << fm.labels[i];
    for (Eigen::Index c = 0; c < kFeatureCount; ++c) os << ',' << fmt_g9(fm.values(i, c));
    os << "\n";
  }
  if (!os) throw InputError("write failed: " + path.string());
}

FeatureMatrix read_features_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot read " + path.string());

  std::string line;
  int line_no = 0;
  bool header_seen = false;
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::vector<std::array<double, kFeatureCount>> rows;

  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> fields = split_csv_line(line);

    if (!header_seen) {
      header_seen = true;
      if (fields.size() != 2 + kFeatureCount || fields[0] != "subject_id" ||
          fields[1] != "label")
        throw InputError("features csv: line " + std::to_string(line_no) +
                         ": bad header, expected subject_id,label,H_F0,...,E_T3");
      for (int f = 0; f < kFeatureCount; ++f)
        if (fields[static_cast<std::size_t>(f) + 2] != kFeatureNames[static_cast<std::size_t>(f)])
          throw InputError("features csv: line " + std::to_string(line_no) + ", column " +
                           std::to_string(f + 3) + ": expected feature " +
                           kFeatureNames[static_cast<std::size_t>(f)]);
      continue;
    }

    if (fields.size() != 2 + kFeatureCount)
      throw InputError("features csv: line " + std::to_string(line_no) + ": expected " +
                       std::to_string(2 + kFeatureCount) + " fields, got " +
                       std::to_string(fields.size()));
    ids.push_back(fields[0]);
    if (fields[1] != "0" && fields[1] != "1")
      throw InputError("features csv: line " + std::to_string(line_no) +
                       ", column 2: label must be 0 or 1");
    labels.push_back(fields[1] == "1" ? 1 : 0);
    std::array<double, kFeatureCount> row{};
    for (int f = 0; f < kFeatureCount; ++f)
      row[static_cast<std::size_t>(f)] =
          parse_double(fields[static_cast<std::size_t>(f) + 2], line_no, f + 3);
    rows.push_back(row);
  }
  if (!header_seen) throw InputError("features csv: " + path.string() + " has no header");
  if (rows.empty()) throw InputError("features csv: " + path.string() + " has no data rows");

  FeatureMatrix fm;
  const auto n = static_cast<Eigen::Index>(rows.size());
  fm.subject_ids = std::move(ids);
  fm.labels.resize(n);
  fm.values.resize(n, kFeatureCount);
  for (Eigen::Index i = 0; i < n; ++i) {
    fm.labels[i] = labels[static_cast<std::size_t>(i)];
    for (int f = 0; f < kFeatureCount; ++f)
      fm.values(i, f) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)];
  }
  return fm;
}

}  // namespace kneetex
