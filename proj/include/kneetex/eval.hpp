#pragma once

/**
 * @file eval.hpp
 * @brief AUC, ROC curves, stratified cross-validation and the 2-D
 *        separation view.
 *
 * AUC uses midranks, so ties contribute 1/2 and the value equals the
 * trapezoidal area under the ROC curve exactly. Cross-validation derives
 * every per-repeat and per-fold seed from the base seed with mix64, which
 * keeps results independent of evaluation order.
 */

#include "kneetex/errors.hpp"
#include "kneetex/feature_matrix.hpp"
#include "kneetex/rng.hpp"
#include "kneetex/svm.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace kneetex {

// Mann-Whitney AUC with midrank tie handling; labels are 1/0.
inline double auc(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels) {
  const Eigen::Index n = scores.size();
  if (labels.size() != n) throw InputError("auc: size mismatch");
  const Eigen::Index n_pos = (labels.array() == 1).count();
  const Eigen::Index n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw SingleClassError("auc: both classes required");

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index(0));
  std::sort(idx.begin(), idx.end(),
            [&](Eigen::Index a, Eigen::Index b) { return scores[a] < scores[b]; });

  double rank_sum_pos = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k)
      if (labels[idx[k]] == 1) rank_sum_pos += midrank;
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

struct RocCurve {
  std::vector<double> fpr;  // monotone non-decreasing, starts 0, ends 1
  std::vector<double> tpr;
  double area = 0.0;        // trapezoidal; equals the midrank AUC
};

// Sweeps thresholds through the distinct scores in descending order. A tie
// group moves the curve diagonally in one step.
inline RocCurve roc_curve(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels) {
  const Eigen::Index n = scores.size();
  if (labels.size() != n) throw InputError("roc: size mismatch");
  const Eigen::Index n_pos = (labels.array() == 1).count();
  const Eigen::Index n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw SingleClassError("roc: both classes required");

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index(0));
  std::sort(idx.begin(), idx.end(),
            [&](Eigen::Index a, Eigen::Index b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);
  double tp = 0.0, fp = 0.0, area = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    double d_tp = 0.0, d_fp = 0.0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] == 1 ? d_tp : d_fp) += 1.0;
      ++j;
    }
    const double fp_next = fp + d_fp;
    const double tp_next = tp + d_tp;
    area += (fp_next - fp) * (tp + tp_next) / 2.0;
    fp = fp_next;
    tp = tp_next;
    curve.fpr.push_back(fp / static_cast<double>(n_neg));
    curve.tpr.push_back(tp / static_cast<double>(n_pos));
    i = j;
  }
  curve.area = area / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
  return curve;
}

// k disjoint test-index sets. Each class is shuffled separately with the
// given seed, then dealt round-robin starting at fold 0, so fold sizes
// within a class differ by at most one.
inline std::vector<std::vector<Eigen::Index>> stratified_kfold(
    const Eigen::VectorXi& labels, int k, std::uint64_t seed) {
  if (k < 2) throw InputError("kfold: k must be at least 2");
  std::vector<Eigen::Index> pos, neg;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) pos.push_back(i);
    else if (labels[i] == 0) neg.push_back(i);
    else throw InputError("kfold: labels must be 0 or 1");
  }
  if (pos.empty() || neg.empty()) throw SingleClassError("kfold: both classes required");
  if (pos.size() < static_cast<std::size_t>(k) || neg.size() < static_cast<std::size_t>(k))
    throw InsufficientDataError("kfold: each class needs at least k subjects");

  Rng rng(seed);
  rng.shuffle(pos);
  rng.shuffle(neg);

  std::vector<std::vector<Eigen::Index>> folds(static_cast<std::size_t>(k));
  for (std::size_t j = 0; j < pos.size(); ++j) folds[j % k].push_back(pos[j]);
  for (std::size_t j = 0; j < neg.size(); ++j) folds[j % k].push_back(neg[j]);
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

struct CvSpec {
  int folds = 5;
  int repeats = 100;
  std::uint64_t base_seed = 0;
};

enum class RepeatAuc {
  PooledFolds,  // one AUC per repeat from out-of-fold scores pooled over folds
  PerFoldMean   // mean of per-fold AUCs
};

struct CvResult {
  double mean_auc = 0.0;
  double std_auc = 0.0;  // population std over repeats
  int repeats = 0;
  Eigen::VectorXd per_repeat;
};

namespace detail {

inline std::vector<int> mask_columns(std::uint32_t mask) {
  if (mask == 0 || mask >= (1u << kFeatureCount))
    throw InputError("subset mask must be in [1, 4095]");
  std::vector<int> cols;
  for (int f = 0; f < kFeatureCount; ++f)
    if (mask & (1u << f)) cols.push_back(f);
  return cols;
}

}  // namespace detail

inline std::string mask_feature_names(std::uint32_t mask, char sep = '+') {
  std::string out;
  for (const int f : detail::mask_columns(mask)) {
    if (!out.empty()) out += sep;
    out += kFeatureNames[static_cast<std::size_t>(f)];
  }
  return out;
}

// Repeated stratified k-fold CV of a linear SVM on the masked feature
// subset. Standardization is fitted on each training split only. Seeds:
// repeat r uses mix64(base_seed, r) for its folds, and the SVM in fold f of
// that repeat uses mix64(mix64(base_seed, r), f + 1).
inline CvResult cv_auc(const FeatureMatrix& fm, std::uint32_t mask, const CvSpec& spec,
                       double svm_c = 1.0, RepeatAuc repeat_auc = RepeatAuc::PooledFolds) {
  if (spec.repeats < 1) throw InputError("cv: repeats must be positive");
  const std::vector<int> cols = detail::mask_columns(mask);

  Eigen::MatrixXd sub(fm.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    sub.col(static_cast<Eigen::Index>(c)) = fm.values.col(cols[c]);

  Eigen::VectorXd aucs(spec.repeats);
  Eigen::VectorXd pooled_scores(fm.rows());
  for (int r = 0; r < spec.repeats; ++r) {
    const std::uint64_t seed_r = mix64(spec.base_seed, static_cast<std::uint64_t>(r));
    const auto folds = stratified_kfold(fm.labels, spec.folds, seed_r);

    double fold_auc_sum = 0.0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const std::vector<Eigen::Index>& test = folds[f];
      std::vector<Eigen::Index> train;
      train.reserve(static_cast<std::size_t>(fm.rows()) - test.size());
      for (std::size_t g = 0; g < folds.size(); ++g)
        if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());

      Eigen::MatrixXd x_train(static_cast<Eigen::Index>(train.size()), sub.cols());
      Eigen::VectorXi y_train(static_cast<Eigen::Index>(train.size()));
      for (std::size_t i = 0; i < train.size(); ++i) {
        x_train.row(static_cast<Eigen::Index>(i)) = sub.row(train[i]);
        y_train[static_cast<Eigen::Index>(i)] = fm.labels[train[i]] == 1 ? 1 : -1;
      }

      const Standardizer st = standardize_fit(x_train);
      SvmOptions opts;
      opts.C = svm_c;
      opts.seed = mix64(seed_r, static_cast<std::uint64_t>(f) + 1);
      const LinearModel model = svm_train(st.apply(x_train), y_train, opts);

      Eigen::MatrixXd x_test(static_cast<Eigen::Index>(test.size()), sub.cols());
      for (std::size_t i = 0; i < test.size(); ++i)
        x_test.row(static_cast<Eigen::Index>(i)) = sub.row(test[i]);
      const Eigen::VectorXd s = decision_scores(model, st.apply(x_test));
      for (std::size_t i = 0; i < test.size(); ++i)
        pooled_scores[test[i]] = s[static_cast<Eigen::Index>(i)];

      if (repeat_auc == RepeatAuc::PerFoldMean) {
        Eigen::VectorXi y_test(static_cast<Eigen::Index>(test.size()));
        for (std::size_t i = 0; i < test.size(); ++i)
          y_test[static_cast<Eigen::Index>(i)] = fm.labels[test[i]];
        fold_auc_sum += auc(s, y_test);
      }
    }
    aucs[r] = repeat_auc == RepeatAuc::PooledFolds
                  ? auc(pooled_scores, fm.labels)
                  : fold_auc_sum / static_cast<double>(folds.size());
  }

  CvResult result;
  result.repeats = spec.repeats;
  result.mean_auc = aucs.mean();
  result.std_auc = std::sqrt((aucs.array() - result.mean_auc).square().sum() /
                             static_cast<double>(spec.repeats));
  result.per_repeat = std::move(aucs);
  return result;
}

// Scores from one fold pass (repeat index `repeat` of the CvSpec seed tree),
// pooled out-of-fold; used for ROC output.
inline Eigen::VectorXd cv_pooled_scores(const FeatureMatrix& fm, std::uint32_t mask,
                                        const CvSpec& spec, double svm_c = 1.0,
                                        int repeat = 0) {
  const std::vector<int> cols = detail::mask_columns(mask);
  Eigen::MatrixXd sub(fm.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    sub.col(static_cast<Eigen::Index>(c)) = fm.values.col(cols[c]);

  const std::uint64_t seed_r = mix64(spec.base_seed, static_cast<std::uint64_t>(repeat));
  const auto folds = stratified_kfold(fm.labels, spec.folds, seed_r);
  Eigen::VectorXd pooled(fm.rows());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const std::vector<Eigen::Index>& test = folds[f];
    std::vector<Eigen::Index> train;
    for (std::size_t g = 0; g < folds.size(); ++g)
      if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());

    Eigen::MatrixXd x_train(static_cast<Eigen::Index>(train.size()), sub.cols());
    Eigen::VectorXi y_train(static_cast<Eigen::Index>(train.size()));
    for (std::size_t i = 0; i < train.size(); ++i) {
      x_train.row(static_cast<Eigen::Index>(i)) = sub.row(train[i]);
      y_train[static_cast<Eigen::Index>(i)] = fm.labels[train[i]] == 1 ? 1 : -1;
    }
    const Standardizer st = standardize_fit(x_train);
    SvmOptions opts;
    opts.C = svm_c;
    opts.seed = mix64(seed_r, static_cast<std::uint64_t>(f) + 1);
    const LinearModel model = svm_train(st.apply(x_train), y_train, opts);

    Eigen::MatrixXd x_test(static_cast<Eigen::Index>(test.size()), sub.cols());
    for (std::size_t i = 0; i < test.size(); ++i)
      x_test.row(static_cast<Eigen::Index>(i)) = sub.row(test[i]);
    const Eigen::VectorXd s = decision_scores(model, st.apply(x_test));
    for (std::size_t i = 0; i < test.size(); ++i)
      pooled[test[i]] = s[static_cast<Eigen::Index>(i)];
  }
  return pooled;
}

struct Projection {
  Eigen::VectorXd x;         // signed distance direction: w_hat . z
  Eigen::VectorXd y;         // top principal direction of the residual
  double hyperplane_x = 0.0; // decision boundary, x = -b / ||w||
};

// Projects standardized rows onto the model normal and the first principal
// axis of what remains. The y direction's sign is fixed by making its
// largest-magnitude loading positive.
inline Projection project_2d(const FeatureMatrix& fm, std::uint32_t mask,
                             const LinearModel& model) {
  const std::vector<int> cols = detail::mask_columns(mask);
  if (static_cast<Eigen::Index>(cols.size()) != model.weights.size())
    throw InputError("project: mask width does not match model");

  Eigen::MatrixXd sub(fm.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    sub.col(static_cast<Eigen::Index>(c)) = fm.values.col(cols[c]);
  const Eigen::MatrixXd z = model.standardizer.apply(sub);

  const double w_norm = model.weights.norm();
  if (w_norm == 0.0) throw InputError("project: zero weight vector");
  const Eigen::VectorXd w_hat = model.weights / w_norm;

  Projection proj;
  proj.x = z * w_hat;
  proj.hyperplane_x = -model.bias / w_norm;

  Eigen::MatrixXd residual = z - proj.x * w_hat.transpose();
  residual.rowwise() -= residual.colwise().mean();
  if (cols.size() == 1) {
    proj.y = Eigen::VectorXd::Zero(fm.rows());
    return proj;
  }
  const Eigen::MatrixXd cov = residual.transpose() * residual;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  Eigen::VectorXd v = es.eigenvectors().col(cov.cols() - 1);
  Eigen::Index max_idx = 0;
  v.cwiseAbs().maxCoeff(&max_idx);
  if (v[max_idx] < 0.0) v = -v;
  proj.y = residual * v;
  return proj;
}

}  // namespace kneetex
