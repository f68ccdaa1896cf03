#pragma once

/**
 * @file stats.hpp
 * @brief Welch's t-test, Student t tail probabilities and the
 *        D'Agostino-Pearson omnibus normality check.
 *
 * The t distribution is evaluated through the regularized incomplete beta
 * function, computed with the modified Lentz continued fraction to a
 * relative tolerance of 1e-12.
 */

#include "kneetex/errors.hpp"
#include "kneetex/feature_matrix.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace kneetex {

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double rel_tol = 1e-12;
  constexpr int max_iter = 500;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double step = d * c;
    h *= step;
    if (std::abs(step - 1.0) < rel_tol) return h;
  }
  throw std::runtime_error("incomplete beta: continued fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw InputError("incomplete beta: parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front =
      std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_cf(a, b, x) / a;
  return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

// Two-sided tail probability P(|T_df| >= |t|).
inline double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw InputError("student t: df must be positive");
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

inline double student_t_cdf(double t, double df) {
  const double p = student_t_two_sided_p(t, df);
  return t >= 0.0 ? 1.0 - p / 2.0 : p / 2.0;
}

enum class TTestVariant { Welch, Pooled };

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double var_a = 0.0;  // sample variance, n - 1 denominator
  double var_b = 0.0;
  int n_a = 0;
  int n_b = 0;
};

// Two-sample t-test, unequal variances by default (Welch-Satterthwaite df).
// When both samples are constant the statistic degenerates: equal means give
// t = 0, p = 1; unequal means give t = +/-inf, p = 0, df = n_a + n_b - 2.
inline TTestResult welch_t_test(std::span<const double> a, std::span<const double> b,
                                TTestVariant variant = TTestVariant::Welch) {
  if (a.size() < 2 || b.size() < 2)
    throw InsufficientDataError("t-test: each sample needs at least two values");

  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  const Eigen::Map<const Eigen::VectorXd> va(a.data(), static_cast<Eigen::Index>(a.size()));
  const Eigen::Map<const Eigen::VectorXd> vb(b.data(), static_cast<Eigen::Index>(b.size()));

  TTestResult r;
  r.n_a = static_cast<int>(a.size());
  r.n_b = static_cast<int>(b.size());
  r.mean_a = va.mean();
  r.mean_b = vb.mean();
  r.var_a = (va.array() - r.mean_a).square().sum() / (na - 1.0);
  r.var_b = (vb.array() - r.mean_b).square().sum() / (nb - 1.0);

  double se2 = 0.0;
  if (variant == TTestVariant::Welch) {
    const double ta = r.var_a / na;
    const double tb = r.var_b / nb;
    se2 = ta + tb;
    r.df = se2 > 0.0 ? se2 * se2 / (ta * ta / (na - 1.0) + tb * tb / (nb - 1.0))
                     : na + nb - 2.0;
  } else {
    const double pooled =
        ((na - 1.0) * r.var_a + (nb - 1.0) * r.var_b) / (na + nb - 2.0);
    se2 = pooled * (1.0 / na + 1.0 / nb);
    r.df = na + nb - 2.0;
  }

  const double diff = r.mean_a - r.mean_b;
  if (se2 == 0.0) {
    if (diff == 0.0) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = std::copysign(std::numeric_limits<double>::infinity(), diff);
      r.p = 0.0;
    }
    return r;
  }
  r.t = diff / std::sqrt(se2);
  r.p = student_t_two_sided_p(r.t, r.df);
  return r;
}

struct NormalityResult {
  double k2 = 0.0;       // omnibus statistic, skew z^2 + kurtosis z^2
  double p = 1.0;        // chi-squared survival, 2 df
  double skew_z = 0.0;
  double kurtosis_z = 0.0;
};

// D'Agostino-Pearson omnibus test: the transformed-skewness z of D'Agostino
// (1970) plus the Anscombe-Glynn (1983) kurtosis z. Needs n >= 8.
inline NormalityResult dagostino_pearson(std::span<const double> sample) {
  const auto n_int = sample.size();
  if (n_int < 8)
    throw InsufficientDataError("normality check: need at least eight values");
  const auto n = static_cast<double>(n_int);
  const Eigen::Map<const Eigen::VectorXd> v(sample.data(),
                                            static_cast<Eigen::Index>(n_int));
  const double mean = v.mean();
  const Eigen::ArrayXd c = v.array() - mean;
  const double m2 = c.square().mean();
  if (m2 == 0.0) throw InputError("normality check: constant sample");
  const double m3 = c.cube().mean();
  const double m4 = c.square().square().mean();

  // Skewness z-score.
  const double b1 = m3 / std::pow(m2, 1.5);
  double y = b1 * std::sqrt((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0)));
  const double beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0) /
                       ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
  const double w2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
  const double delta = 1.0 / std::sqrt(0.5 * std::log(w2));
  const double alpha = std::sqrt(2.0 / (w2 - 1.0));
  if (y == 0.0) y = 1.0;
  const double zs = delta * std::log(y / alpha + std::sqrt((y / alpha) * (y / alpha) + 1.0));

  // Kurtosis z-score.
  const double b2 = m4 / (m2 * m2);
  const double eb2 = 3.0 * (n - 1.0) / (n + 1.0);
  const double vb2 = 24.0 * n * (n - 2.0) * (n - 3.0) /
                     ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
  const double x = (b2 - eb2) / std::sqrt(vb2);
  const double sqrt_b1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0)) *
                         std::sqrt(6.0 * (n + 3.0) * (n + 5.0) /
                                   (n * (n - 2.0) * (n - 3.0)));
  const double a = 6.0 + 8.0 / sqrt_b1 *
                             (2.0 / sqrt_b1 + std::sqrt(1.0 + 4.0 / (sqrt_b1 * sqrt_b1)));
  const double term1 = 1.0 - 2.0 / (9.0 * a);
  const double denom = 1.0 + x * std::sqrt(2.0 / (a - 4.0));
  if (denom == 0.0)
    throw std::runtime_error("normality check: degenerate kurtosis transform");
  const double term2 =
      std::copysign(std::cbrt((1.0 - 2.0 / a) / std::abs(denom)), denom);
  const double zk = (term1 - term2) / std::sqrt(2.0 / (9.0 * a));

  NormalityResult r;
  r.skew_z = zs;
  r.kurtosis_z = zk;
  r.k2 = zs * zs + zk * zk;
  r.p = std::exp(-r.k2 / 2.0);  // chi-squared survival with 2 df
  return r;
}

struct ScreenRow {
  std::string feature;
  TTestResult ttest;        // a = cases, b = controls
  NormalityResult normality;  // on pooled within-group residuals
  bool residuals_normal = false;  // normality p > 0.05
};

// Per-feature case/control comparison. The normality check runs on the
// pooled residuals after removing each group's mean, since the t-test's
// assumption concerns within-group distributions, not the mixture.
inline std::vector<ScreenRow> screen_features(const FeatureMatrix& fm) {
  fm.validate();
  if (fm.count_label(1) < 2 || fm.count_label(0) < 2)
    throw InsufficientDataError("screen: need at least two subjects per class");

  std::vector<ScreenRow> rows;
  rows.reserve(kFeatureCount);
  for (int f = 0; f < kFeatureCount; ++f) {
    std::vector<double> cases, controls;
    for (Eigen::Index i = 0; i < fm.rows(); ++i)
      (fm.labels[i] == 1 ? cases : controls).push_back(fm.values(i, f));

    ScreenRow row;
    row.feature = kFeatureNames[static_cast<std::size_t>(f)];
    row.ttest = welch_t_test(cases, controls);

    std::vector<double> residuals;
    residuals.reserve(cases.size() + controls.size());
    for (double v : cases) residuals.push_back(v - row.ttest.mean_a);
    for (double v : controls) residuals.push_back(v - row.ttest.mean_b);
    row.normality = dagostino_pearson(residuals);
    row.residuals_normal = row.normality.p > 0.05;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace kneetex
