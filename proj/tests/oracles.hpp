#pragma once

// Independent reference implementations used only by the tests. Each one
// recomputes a quantity the library produces, by a different route: direct
// pair counting instead of ranks, quadrature instead of continued fractions,
// projected gradient on the dual instead of coordinate descent, a periodogram
// instead of increment statistics. Agreement between the two routes is the
// evidence the production code is right.

#include "kneetex/rng.hpp"
#include "kneetex/types.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <vector>

namespace oracles {

// AUC by exhaustive case-control pair comparison, ties worth 1/2.
inline double pair_count_auc(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels) {
  double wins = 0.0;
  long pairs = 0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (Eigen::Index j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// Shannon entropy from an ordered map, no fixed-size histogram involved.
template <typename Matrix>
double map_entropy_bits(const Matrix& patch) {
  std::map<long, long> counts;
  for (Eigen::Index i = 0; i < patch.rows(); ++i)
    for (Eigen::Index j = 0; j < patch.cols(); ++j) ++counts[static_cast<long>(patch(i, j))];
  const double n = static_cast<double>(patch.size());
  double bits = 0.0;
  for (const auto& [value, count] : counts) {
    const double p = static_cast<double>(count) / n;
    bits -= p * std::log2(p);
  }
  return bits;
}

// Variance-of-increments Hurst estimate with plain loops; same definition as
// the library, none of the same code.
template <typename Matrix>
double loop_hurst(const Matrix& patch) {
  const long h = patch.rows(), w = patch.cols();
  std::vector<double> xs, ys;
  for (long d = 1; d <= std::min(w, h) / 4; d *= 2) {
    double sum = 0.0;
    long count = 0;
    for (long i = 0; i < h; ++i)
      for (long j = 0; j + d < w; ++j) {
        const double diff = static_cast<double>(patch(i, j + d)) - static_cast<double>(patch(i, j));
        sum += diff * diff;
        ++count;
      }
    for (long i = 0; i + d < h; ++i)
      for (long j = 0; j < w; ++j) {
        const double diff = static_cast<double>(patch(i + d, j)) - static_cast<double>(patch(i, j));
        sum += diff * diff;
        ++count;
      }
    const double m = sum / static_cast<double>(count);
    if (m <= 0.0) continue;
    xs.push_back(std::log(static_cast<double>(d)));
    ys.push_back(std::log(m));
  }
  if (xs.size() < 3) throw std::runtime_error("loop_hurst: too few lags");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sx += xs[k];
    sy += ys[k];
    sxx += xs[k] * xs[k];
    sxy += xs[k] * ys[k];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return std::clamp(slope / 2.0, 0.0, 1.0);
}

// Student t two-sided tail by adaptive Simpson quadrature of the density.
inline double t_density(double x, double df) {
  const double c = std::exp(std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0)) /
                   std::sqrt(df * std::acos(-1.0));
  return c * std::pow(1.0 + x * x / df, -(df + 1.0) / 2.0);
}

inline double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson(double a, double b, double fa, double fm, double fb,
                               double whole, double df, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = t_density(lm, df), frm = t_density(rm, df);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(a, m, fa, flm, fm, left, df, tol / 2.0, depth - 1) +
         adaptive_simpson(m, b, fm, frm, fb, right, df, tol / 2.0, depth - 1);
}

inline double quadrature_t_two_sided_p(double t, double df) {
  const double hi = std::abs(t);
  if (hi == 0.0) return 1.0;
  const double fa = t_density(0.0, df), fb = t_density(hi, df);
  const double fm = t_density(0.5 * hi, df);
  const double whole = simpson(0.0, hi, fa, fm, fb);
  const double integral =
      adaptive_simpson(0.0, hi, fa, fm, fb, whole, df, 1e-14, 40);
  return 2.0 * (0.5 - integral);
}

// Dual of the L1-hinge SVM with the bias-as-feature convention, solved by
// projected gradient. Slow and simple on purpose.
struct DualSolution {
  Eigen::VectorXd alpha;
  Eigen::VectorXd weights;  // without the bias component
  double bias = 0.0;
  double dual_objective = 0.0;
};

inline DualSolution projected_gradient_svm(const Eigen::MatrixXd& X,
                                           const Eigen::VectorXi& y, double C,
                                           int iterations = 200000) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd xb(n, X.cols() + 1);
  xb << X, Eigen::VectorXd::Ones(n);
  Eigen::MatrixXd q(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      q(i, j) = static_cast<double>(y[i]) * static_cast<double>(y[j]) * xb.row(i).dot(xb.row(j));

  const double step = 1.0 / q.operatorNorm();
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd grad = Eigen::VectorXd::Ones(n) - q * alpha;
    alpha = (alpha + step * grad).cwiseMax(0.0).cwiseMin(C);
  }

  DualSolution sol;
  sol.alpha = alpha;
  Eigen::VectorXd w_full = Eigen::VectorXd::Zero(xb.cols());
  for (Eigen::Index i = 0; i < n; ++i)
    w_full += alpha[i] * static_cast<double>(y[i]) * xb.row(i).transpose();
  sol.weights = w_full.head(X.cols());
  sol.bias = w_full[X.cols()];
  sol.dual_objective = alpha.sum() - 0.5 * alpha.dot(q * alpha);
  return sol;
}

inline double svm_primal_objective(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                                   const Eigen::VectorXd& w, double b, double C) {
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double margin = 1.0 - static_cast<double>(y[i]) * (X.row(i).dot(w) + b);
    if (margin > 0.0) hinge += margin;
  }
  return 0.5 * (w.squaredNorm() + b * b) + C * hinge;
}

// Dominant eigenvector by power iteration with a fixed start.
inline Eigen::VectorXd power_iteration_top(const Eigen::MatrixXd& sym, int iterations = 20000) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(sym.cols()).normalized();
  for (int it = 0; it < iterations; ++it) {
    v = (sym * v).normalized();
  }
  Eigen::Index max_idx = 0;
  v.cwiseAbs().maxCoeff(&max_idx);
  if (v[max_idx] < 0.0) v = -v;
  return v;
}

// Log-log slope of the radially averaged periodogram. For fractional
// Brownian motion with parameter H the expected slope is -(2H + 2).
template <typename Matrix>
double periodogram_slope(const Matrix& patch) {
  const int n = static_cast<int>(patch.rows());
  Eigen::MatrixXcd f(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) f(i, j) = static_cast<double>(patch(i, j));

  Eigen::FFT<double> fft;
  Eigen::VectorXcd line(n), out(n);
  for (int i = 0; i < n; ++i) {
    line = f.row(i).transpose();
    fft.fwd(out, line);
    f.row(i) = out.transpose();
  }
  for (int j = 0; j < n; ++j) {
    line = f.col(j);
    fft.fwd(out, line);
    f.col(j) = out;
  }

  // Radial averaging over annuli [k, k+1) up to n/4, skipping DC.
  const int kmax = n / 4;
  std::vector<double> power(static_cast<std::size_t>(kmax) + 1, 0.0);
  std::vector<long> count(static_cast<std::size_t>(kmax) + 1, 0);
  for (int i = 0; i < n; ++i) {
    const double fy = i <= n / 2 ? i : i - n;
    for (int j = 0; j < n; ++j) {
      const double fx = j <= n / 2 ? j : j - n;
      const double radius = std::sqrt(fx * fx + fy * fy);
      const int bin = static_cast<int>(std::floor(radius));
      if (bin < 1 || bin > kmax) continue;
      power[static_cast<std::size_t>(bin)] += std::norm(f(i, j));
      ++count[static_cast<std::size_t>(bin)];
    }
  }

  std::vector<double> xs, ys;
  for (int k = 1; k <= kmax; ++k) {
    if (count[static_cast<std::size_t>(k)] == 0) continue;
    xs.push_back(std::log(static_cast<double>(k) + 0.5));
    ys.push_back(std::log(power[static_cast<std::size_t>(k)] /
                          static_cast<double>(count[static_cast<std::size_t>(k)])));
  }
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sx += xs[k];
    sy += ys[k];
    sxx += xs[k] * xs[k];
    sxy += xs[k] * ys[k];
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

// Convenience: uniform random 14-bit patch.
inline kneetex::ImageU16 random_patch(int rows, int cols, std::uint64_t seed,
                                      int max_value = kneetex::kIntensityMax) {
  kneetex::Rng rng(seed);
  kneetex::ImageU16 patch(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      patch(i, j) = static_cast<std::uint16_t>(rng.below(static_cast<std::uint64_t>(max_value) + 1));
  return patch;
}

}  // namespace oracles
