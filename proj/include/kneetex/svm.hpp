#pragma once

/**
 * @file svm.hpp
 * @brief Column standardization and a linear L1-hinge SVM trained by dual
 *        coordinate descent.
 *
 * The primal problem is min_w,b 0.5*||w||^2 + C * sum_i max(0, 1 - y_i(w*x_i + b))
 * with y in {-1, +1}. The bias is learned through an appended constant
 * feature of value 1, so it is regularized like any weight. Dual coordinate
 * descent sweeps the alphas in a freshly shuffled order each epoch
 * (one-variable exact minimization, alpha clipped to [0, C]) and stops when
 * the duality gap drops below 1e-6 of the primal objective or after 10^4
 * epochs.
 *
 * Coordinates stuck at a box bound with a gradient beyond the previous
 * epoch's violation range are shrunk from the sweep, as in liblinear. Every
 * eighth epoch restores the full set; only those full sweeps evaluate the
 * objectives (and the observer) and can trigger the duality-gap stop, so the
 * stopping rule always measures the complete problem. Shrinking changes the
 * iterate path, never the optimum: a parked coordinate is one whose clipped
 * update was a provable no-op when last visited.
 */

#include "kneetex/errors.hpp"
#include "kneetex/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace kneetex {

// Per-column affine map fitted on training rows: z = (x - mean) / std with
// the population convention (divide by n). Columns with zero spread are
// flagged degenerate and map to zero.
struct Standardizer {
  Eigen::VectorXd means;
  Eigen::VectorXd stds;
  std::vector<std::uint8_t> degenerate;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const {
    if (rows.cols() != means.size())
      throw InputError("standardizer: column count mismatch");
    Eigen::MatrixXd out(rows.rows(), rows.cols());
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      if (degenerate[static_cast<std::size_t>(c)])
        out.col(c).setZero();
      else
        out.col(c) = (rows.col(c).array() - means[c]) / stds[c];
    }
    return out;
  }
};

inline Standardizer standardize_fit(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 1) throw InsufficientDataError("standardize: no rows");
  Standardizer st;
  st.means = rows.colwise().mean();
  st.stds.resize(rows.cols());
  st.degenerate.assign(static_cast<std::size_t>(rows.cols()), 0);
  for (Eigen::Index c = 0; c < rows.cols(); ++c) {
    const double var =
        (rows.col(c).array() - st.means[c]).square().sum() / static_cast<double>(rows.rows());
    st.stds[c] = std::sqrt(var);
    if (st.stds[c] == 0.0) {
      st.degenerate[static_cast<std::size_t>(c)] = 1;
      st.stds[c] = 1.0;
    }
  }
  return st;
}

struct SvmOptions {
  double C = 1.0;
  double gap_tolerance = 1e-6;  // relative to the primal objective
  int max_epochs = 10000;
  std::uint64_t seed = 0;
  // Called at every full sweep with (epoch, dual objective, primal objective).
  std::function<void(int, double, double)> observer;
};

struct LinearModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double C = 1.0;
  Standardizer standardizer;            // filled in by the training pipeline
  std::vector<std::string> feature_names;
  Eigen::VectorXd alphas;               // dual variables, one per training row
  double duality_gap = 0.0;
  int epochs = 0;
  bool converged = false;
};

// w * row + b per standardized row.
inline Eigen::VectorXd decision_scores(const LinearModel& model,
                                       const Eigen::MatrixXd& rows) {
  if (rows.cols() != model.weights.size())
    throw InputError("decision scores: feature count mismatch");
  return (rows * model.weights).array() + model.bias;
}

// X: standardized training rows. y: labels in {-1, +1}.
inline LinearModel svm_train(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                             const SvmOptions& opts = {}) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (n < 2 || d < 1) throw InsufficientDataError("svm: empty training set");
  if (y.size() != n) throw InputError("svm: label count mismatch");
  if (!X.allFinite()) throw InputError("svm: non-finite feature value");
  if (!(opts.C > 0.0)) throw InputError("svm: C must be positive");

  bool has_pos = false, has_neg = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y[i] == 1) has_pos = true;
    else if (y[i] == -1) has_neg = true;
    else throw InputError("svm: labels must be -1 or +1");
  }
  if (!has_pos || !has_neg) throw SingleClassError("svm: single-class training set");

  // Row-major copy so each sample is contiguous in the inner loop.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> Xr = X;
  Eigen::VectorXd qii(n);
  for (Eigen::Index i = 0; i < n; ++i) qii[i] = Xr.row(i).squaredNorm() + 1.0;

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double wb = 0.0;  // weight of the appended constant feature

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  Rng rng(opts.seed);

  const auto objectives = [&](double& primal, double& dual) {
    const double w_norm2 = w.squaredNorm() + wb * wb;
    double hinge = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double margin = 1.0 - static_cast<double>(y[i]) * (Xr.row(i).dot(w) + wb);
      if (margin > 0.0) hinge += margin;
    }
    primal = 0.5 * w_norm2 + opts.C * hinge;
    dual = alpha.sum() - 0.5 * w_norm2;
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr int kFullSweepStretch = 7;  // shrunk epochs between full sweeps
  std::size_t active = order.size();
  int since_full = kFullSweepStretch;  // the first epoch is a full sweep
  double pg_max_old = kInf, pg_min_old = -kInf;
  bool stalled = false;

  LinearModel model;
  model.C = opts.C;
  double gap = kInf;
  int epoch = 0;
  for (; epoch < opts.max_epochs; ++epoch) {
    const bool full = since_full >= kFullSweepStretch || stalled;
    if (full) {
      active = order.size();
      since_full = 0;
      pg_max_old = kInf;
      pg_min_old = -kInf;
    } else {
      ++since_full;
    }

    for (std::size_t s = active; s > 1; --s)
      std::swap(order[s - 1], order[static_cast<std::size_t>(rng.below(s))]);

    double pg_max = -kInf, pg_min = kInf;
    std::size_t updates = 0;
    std::size_t k = 0;
    while (k < active) {
      const Eigen::Index i = order[k];
      const double yi = static_cast<double>(y[i]);
      const double g = yi * (Xr.row(i).dot(w) + wb) - 1.0;
      // Projected gradient: zero when the coordinate is at a bound the
      // gradient pushes into, i.e. when the clipped update cannot move it.
      double pg = 0.0;
      if (alpha[i] == 0.0) {
        if (g > pg_max_old) {
          --active;
          std::swap(order[k], order[active]);
          continue;
        }
        if (g < 0.0) pg = g;
      } else if (alpha[i] == opts.C) {
        if (g < pg_min_old) {
          --active;
          std::swap(order[k], order[active]);
          continue;
        }
        if (g > 0.0) pg = g;
      } else {
        pg = g;
      }
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (pg != 0.0) {
        const double a_old = alpha[i];
        const double a_new = std::clamp(a_old - g / qii[i], 0.0, opts.C);
        const double delta = a_new - a_old;
        if (delta != 0.0) {
          alpha[i] = a_new;
          w += (delta * yi) * Xr.row(i).transpose();
          wb += delta * yi;
          ++updates;
        }
      }
      ++k;
    }
    pg_max_old = pg_max <= 0.0 ? kInf : pg_max;
    pg_min_old = pg_min >= 0.0 ? -kInf : pg_min;
    stalled = updates == 0;

    if (full) {
      double primal = 0.0, dual = 0.0;
      objectives(primal, dual);
      gap = primal - dual;
      if (opts.observer) opts.observer(epoch, dual, primal);
      if (gap <= opts.gap_tolerance * std::max(primal, 1e-300)) {
        model.converged = true;
        ++epoch;
        break;
      }
    }
  }
  if (!model.converged) {
    double primal = 0.0, dual = 0.0;
    objectives(primal, dual);
    gap = primal - dual;
  }

  model.weights = w;
  model.bias = wb;
  model.alphas = std::move(alpha);
  model.duality_gap = gap;
  model.epochs = epoch;
  return model;
}

}  // namespace kneetex
