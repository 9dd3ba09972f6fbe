#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "iebsm/core.hpp"

namespace iebsm::stattests {

enum class ScoreKind { PValue, Distance };

// PValue outcomes carry drift_score == p_value; Distance outcomes carry
// drift_score == statistic (possibly normalized), always >= 0.
struct TestOutcome {
  double statistic = 0.0;
  std::optional<double> p_value;
  double drift_score = 0.0;
  ScoreKind score_kind = ScoreKind::PValue;
};

// p-values flag drift below theta, distances flag drift above it.
bool flags_drift(const TestOutcome& outcome, double theta);

inline constexpr std::size_t kJsNumericBins = 30;
inline constexpr double kJsBinSmoothing = 1e-9;
inline constexpr double kScaleFloor = 1e-12;

TestOutcome ks_two_sample(std::span<const double> a, std::span<const double> b);

// W1 between the empirical distributions, normalized by the reference spread.
TestOutcome wasserstein_1d(std::span<const double> a, std::span<const double> b,
                           double reference_std);

// Square root of the base-2 Jensen-Shannon divergence. Numeric samples are
// histogrammed on kJsNumericBins shared equal-width bins; other kinds use the
// union of observed values.
TestOutcome js_divergence(std::span<const double> a, std::span<const double> b, FeatureKind kind);

// Reference a, current b. Values are category codes.
TestOutcome chi_squared(std::span<const double> a, std::span<const double> b);

TestOutcome z_proportion(std::size_t successes_a, std::size_t n_a, std::size_t successes_b,
                         std::size_t n_b);

// Base-2 JS divergence of two discrete distributions of equal length.
double js_divergence_distributions(std::span<const double> p, std::span<const double> q);

// Survival function of the asymptotic Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

// Regularized upper incomplete gamma Q(a, x).
double regularized_gamma_q(double a, double x);

double chi_squared_survival(double statistic, double df);

// Two-sided normal tail probability P(|Z| > |z|).
double normal_two_sided_p(double z);

// Population standard deviation.
double population_std(std::span<const double> values);

}  // namespace iebsm::stattests
