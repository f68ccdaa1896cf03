#pragma once

/**
 * @file feature_matrix.hpp
 * @brief Cohort feature table and its CSV form.
 *
 * CSV layout: header `subject_id,label,H_F0,...,E_T3` with the twelve
 * feature columns in canonical order, label 1 = case, 0 = control, floats
 * rendered with %.9g. Lines starting with '#' are comments and are skipped
 * on read.
 */

#include "kneetex/descriptors.hpp"
#include "kneetex/errors.hpp"
#include "kneetex/types.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace kneetex {

struct FeatureMatrix {
  std::vector<std::string> subject_ids;
  Eigen::VectorXi labels;   // 1 = case, 0 = control
  Eigen::MatrixXd values;   // one row per subject, canonical column order

  Eigen::Index rows() const { return values.rows(); }

  int count_label(int label) const {
    return static_cast<int>((labels.array() == label).count());
  }

  void append(const FeatureVector& fv);
  void validate() const;
};

// The CSV reader/writer live with the other report formats in reports.hpp.

}  // namespace kneetex
