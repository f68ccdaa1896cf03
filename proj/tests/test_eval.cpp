#include "kneetex/eval.hpp"

#include "kneetex/synth.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

using namespace kneetex;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const double x : v) out[i++] = x;
  return out;
}

Eigen::VectorXi ivec(std::initializer_list<int> v) {
  Eigen::VectorXi out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const int x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("auc hand values") {
  CHECK(auc(vec({1, 2, 3, 4}), ivec({0, 0, 1, 1})) == doctest::Approx(1.0));
  CHECK(auc(vec({4, 3, 2, 1}), ivec({0, 0, 1, 1})) == doctest::Approx(0.0));
  CHECK(auc(vec({5, 5}), ivec({1, 0})) == doctest::Approx(0.5));
  // 3 of 4 pairs won, one lost.
  CHECK(auc(vec({1, 4, 2, 3}), ivec({0, 1, 1, 0})) == doctest::Approx(0.75));
  CHECK_THROWS_AS(auc(vec({1, 2}), ivec({1, 1})), SingleClassError);
  CHECK_THROWS_AS(auc(vec({1, 2, 3}), ivec({1, 0})), InputError);
}

TEST_CASE("auc equals the pair-counting oracle, ties included") {
  Rng rng(2024);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 5 + static_cast<int>(rng.below(40));
    Eigen::VectorXd scores(n);
    Eigen::VectorXi labels(n);
    bool has0 = false, has1 = false;
    for (int i = 0; i < n; ++i) {
      // Coarse grid forces plenty of ties.
      scores[i] = static_cast<double>(rng.below(8));
      labels[i] = static_cast<int>(rng.below(2));
      (labels[i] ? has1 : has0) = true;
    }
    if (!has0 || !has1) continue;
    CHECK(auc(scores, labels) ==
          doctest::Approx(oracles::pair_count_auc(scores, labels)).epsilon(1e-12));
    // Negating scores flips the AUC even with ties.
    CHECK(auc(-scores, labels) ==
          doctest::Approx(1.0 - auc(scores, labels)).epsilon(1e-12));
  }
}

TEST_CASE("roc curve is a staircase whose area is the auc") {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 12 + static_cast<int>(rng.below(30));
    Eigen::VectorXd scores(n);
    Eigen::VectorXi labels(n);
    for (int i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.below(6));
      labels[i] = i % 3 == 0 ? 1 : 0;
    }
    const RocCurve curve = roc_curve(scores, labels);
    CHECK(curve.fpr.front() == 0.0);
    CHECK(curve.tpr.front() == 0.0);
    CHECK(curve.fpr.back() == doctest::Approx(1.0));
    CHECK(curve.tpr.back() == doctest::Approx(1.0));
    for (std::size_t i = 1; i < curve.fpr.size(); ++i) {
      CHECK(curve.fpr[i] >= curve.fpr[i - 1]);
      CHECK(curve.tpr[i] >= curve.tpr[i - 1]);
    }
    CHECK(curve.area == doctest::Approx(auc(scores, labels)).epsilon(1e-12));
  }
}

TEST_CASE("roc tie groups move diagonally") {
  // scores 3,2,1 with labels 1,0,1: midpoint loses the (1 vs 2) pair.
  const RocCurve curve = roc_curve(vec({3, 2, 1}), ivec({1, 0, 1}));
  REQUIRE(curve.fpr.size() == 4);
  CHECK(curve.tpr[1] == doctest::Approx(0.5));
  CHECK(curve.fpr[1] == 0.0);
  CHECK(curve.area == doctest::Approx(0.5));
}

TEST_CASE("stratified folds balance both classes") {
  Eigen::VectorXi labels(153);
  for (int i = 0; i < 153; ++i) labels[i] = i < 67 ? 1 : 0;
  const auto folds = stratified_kfold(labels, 5, 99);

  REQUIRE(folds.size() == 5);
  std::vector<int> case_counts, control_counts;
  std::set<Eigen::Index> seen;
  for (const auto& fold : folds) {
    int n_case = 0, n_control = 0;
    for (const Eigen::Index i : fold) {
      CHECK(seen.insert(i).second);  // disjoint
      (labels[i] == 1 ? n_case : n_control) += 1;
    }
    CHECK(std::is_sorted(fold.begin(), fold.end()));
    case_counts.push_back(n_case);
    control_counts.push_back(n_control);
  }
  CHECK(seen.size() == 153);  // covers
  std::sort(case_counts.rbegin(), case_counts.rend());
  std::sort(control_counts.rbegin(), control_counts.rend());
  CHECK(case_counts == std::vector<int>({14, 14, 13, 13, 13}));
  CHECK(control_counts == std::vector<int>({18, 17, 17, 17, 17}));

  CHECK(stratified_kfold(labels, 5, 99) == folds);      // deterministic
  CHECK(stratified_kfold(labels, 5, 100) != folds);     // seed-sensitive
}

TEST_CASE("kfold input validation") {
  Eigen::VectorXi labels = ivec({1, 1, 1, 0, 0, 0});
  CHECK_THROWS_AS(stratified_kfold(labels, 1, 0), InputError);
  CHECK_THROWS_AS(stratified_kfold(labels, 4, 0), InsufficientDataError);
  CHECK_THROWS_AS(stratified_kfold(ivec({1, 1, 1, 1}), 2, 0), SingleClassError);
  CHECK_THROWS_AS(stratified_kfold(ivec({1, 0, 2, 0}), 2, 0), InputError);
}

namespace {

FeatureMatrix small_cohort(double h_shift, std::uint64_t seed) {
  CohortSpec spec = CohortSpec::null_cohort(seed);
  spec.n_case = 20;
  spec.n_control = 24;
  spec.h_case[0] += h_shift;
  return planted_cohort_features(spec);
}

}  // namespace

TEST_CASE("cv_auc is deterministic and matches its own seed tree") {
  const FeatureMatrix fm = small_cohort(0.1, 31);
  CvSpec spec;
  spec.folds = 4;
  spec.repeats = 3;
  spec.base_seed = 555;

  const CvResult a = cv_auc(fm, 0b1, spec);
  const CvResult b = cv_auc(fm, 0b1, spec);
  CHECK(a.mean_auc == b.mean_auc);  // bitwise
  CHECK(a.std_auc == b.std_auc);
  REQUIRE(a.per_repeat.size() == 3);

  // Repeat 0 equals a standalone pooled-score pass with the same base seed.
  const Eigen::VectorXd pooled = cv_pooled_scores(fm, 0b1, spec);
  CHECK(a.per_repeat[0] == doctest::Approx(auc(pooled, fm.labels)).epsilon(1e-15));

  // Summary statistics match their definitions.
  CHECK(a.mean_auc == doctest::Approx(a.per_repeat.mean()).epsilon(1e-15));
  const double var = (a.per_repeat.array() - a.mean_auc).square().sum() / 3.0;
  CHECK(a.std_auc == doctest::Approx(std::sqrt(var)).epsilon(1e-12));

  CvSpec other = spec;
  other.base_seed = 556;
  CHECK(cv_auc(fm, 0b1, other).mean_auc != a.mean_auc);
}

TEST_CASE("cv_auc separates informative from null features") {
  const FeatureMatrix fm = small_cohort(0.35, 8);
  CvSpec spec;
  spec.folds = 5;
  spec.repeats = 5;
  spec.base_seed = 2;

  const double informative = cv_auc(fm, 0b1, spec).mean_auc;        // H_F0 shifted
  const double null_feature = cv_auc(fm, 0b10, spec).mean_auc;      // untouched
  CHECK(informative > 0.85);
  CHECK(null_feature < 0.70);
  CHECK(null_feature > 0.30);
}

TEST_CASE("per-fold-mean aggregation is available and close to pooled") {
  const FeatureMatrix fm = small_cohort(0.3, 12);
  CvSpec spec;
  spec.folds = 4;
  spec.repeats = 4;
  spec.base_seed = 77;
  const CvResult pooled = cv_auc(fm, 0b1, spec, 1.0, RepeatAuc::PooledFolds);
  const CvResult perfold = cv_auc(fm, 0b1, spec, 1.0, RepeatAuc::PerFoldMean);
  CHECK(std::abs(pooled.mean_auc - perfold.mean_auc) < 0.1);
}

TEST_CASE("cv rejects bad masks and repeat counts") {
  const FeatureMatrix fm = small_cohort(0.1, 3);
  CvSpec spec;
  spec.repeats = 0;
  CHECK_THROWS_AS(cv_auc(fm, 1, spec), InputError);
  spec.repeats = 1;
  CHECK_THROWS_AS(cv_auc(fm, 0, spec), InputError);
  CHECK_THROWS_AS(cv_auc(fm, 1u << 12, spec), InputError);
}

TEST_CASE("project_2d separates the model direction from the residual axis") {
  const FeatureMatrix fm = small_cohort(0.4, 21);
  const std::uint32_t mask = 0b111;  // H_F0, H_F1, H_T0

  Eigen::MatrixXd sub(fm.rows(), 3);
  for (int c = 0; c < 3; ++c) sub.col(c) = fm.values.col(c);
  Eigen::VectorXi y(fm.rows());
  for (Eigen::Index i = 0; i < fm.rows(); ++i) y[i] = fm.labels[i] == 1 ? 1 : -1;

  LinearModel model;
  {
    const Standardizer st = standardize_fit(sub);
    SvmOptions opts;
    opts.seed = 4;
    model = svm_train(st.apply(sub), y, opts);
    model.standardizer = st;
  }

  const Projection proj = project_2d(fm, mask, model);
  REQUIRE(proj.x.size() == fm.rows());
  REQUIRE(proj.y.size() == fm.rows());

  const Eigen::MatrixXd z = model.standardizer.apply(sub);
  const Eigen::VectorXd w_hat = model.weights / model.weights.norm();
  CHECK((proj.x - z * w_hat).norm() < 1e-12);
  CHECK(proj.hyperplane_x == doctest::Approx(-model.bias / model.weights.norm()));

  // Points at the decision boundary land exactly at hyperplane_x.
  const Eigen::VectorXd scores = decision_scores(model, z);
  for (Eigen::Index i = 0; i < fm.rows(); ++i)
    CHECK(scores[i] == doctest::Approx((proj.x[i] - proj.hyperplane_x) *
                                       model.weights.norm()).epsilon(1e-9));

  // y comes from the residual, so it carries no component along w_hat.
  Eigen::MatrixXd residual = z - proj.x * w_hat.transpose();
  residual.rowwise() -= residual.colwise().mean();
  const Eigen::VectorXd v =
      oracles::power_iteration_top(residual.transpose() * residual, 5000);
  CHECK((proj.y - residual * v).norm() < 1e-6);
  CHECK(std::abs(v.dot(w_hat)) < 1e-9);

  // Among directions orthogonal to w_hat, v has maximal variance.
  Rng rng(99);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd u(3);
    for (int i = 0; i < 3; ++i) u[i] = rng.normal();
    u -= u.dot(w_hat) * w_hat;
    if (u.norm() < 1e-6) continue;
    u.normalize();
    CHECK((residual * u).squaredNorm() <= proj.y.squaredNorm() + 1e-9);
  }
}

TEST_CASE("project_2d x and y decorrelate on whitened inputs") {
  // With identity sample covariance, cov(x, y) = w_hat' S v = w_hat' v = 0.
  Rng rng(314);
  Eigen::MatrixXd raw(60, 4);
  for (Eigen::Index i = 0; i < raw.size(); ++i) raw(i) = rng.normal();
  raw.rowwise() -= raw.colwise().mean();
  const Eigen::MatrixXd cov = raw.transpose() * raw / 60.0;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::MatrixXd white =
      raw * es.eigenvectors() *
      es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
      es.eigenvectors().transpose();

  FeatureMatrix fm;
  fm.values.resize(60, kFeatureCount);
  fm.values.setZero();
  fm.values.leftCols(4) = white;
  fm.labels.resize(60);
  Eigen::VectorXi y(60);
  for (int i = 0; i < 60; ++i) {
    fm.labels[i] = (white(i, 0) + 0.3 * white(i, 1) > 0) ? 1 : 0;
    y[i] = fm.labels[i] == 1 ? 1 : -1;
    fm.subject_ids.push_back("s" + std::to_string(i));
  }

  LinearModel model;
  Standardizer st = standardize_fit(white);
  SvmOptions opts;
  opts.seed = 10;
  model = svm_train(st.apply(white), y, opts);
  model.standardizer = st;

  const Projection proj = project_2d(fm, 0b1111, model);
  const Eigen::VectorXd xc = proj.x.array() - proj.x.mean();
  const Eigen::VectorXd yc = proj.y.array() - proj.y.mean();
  const double corr = xc.dot(yc) / (xc.norm() * yc.norm());
  // Standardization rescales columns, so whitening is only approximate
  // after apply(); the correlation still collapses by construction.
  CHECK(std::abs(corr) < 0.05);
}

TEST_CASE("project_2d degenerate and error cases") {
  const FeatureMatrix fm = small_cohort(0.3, 5);
  Eigen::VectorXi y(fm.rows());
  for (Eigen::Index i = 0; i < fm.rows(); ++i) y[i] = fm.labels[i] == 1 ? 1 : -1;

  Eigen::MatrixXd one = fm.values.col(0);
  const Standardizer st = standardize_fit(one);
  SvmOptions opts;
  opts.seed = 3;
  LinearModel model = svm_train(st.apply(one), y, opts);
  model.standardizer = st;

  const Projection proj = project_2d(fm, 0b1, model);
  CHECK(proj.y.isZero(0.0));  // single feature has no residual axis

  CHECK_THROWS_AS(project_2d(fm, 0b11, model), InputError);  // width mismatch
}
