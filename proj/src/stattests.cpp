#include "iebsm/stattests.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <vector>

namespace iebsm::stattests {
namespace {

void require_non_empty(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw SampleError("two-sample test needs non-empty samples");
}

std::vector<double> sorted_copy(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  std::sort(out.begin(), out.end());
  return out;
}

TestOutcome p_value_outcome(double statistic, double p) {
  p = std::clamp(p, 0.0, 1.0);
  return {statistic, p, p, ScoreKind::PValue};
}

TestOutcome distance_outcome(double statistic, double score) {
  return {statistic, std::nullopt, std::max(score, 0.0), ScoreKind::Distance};
}

// Series for P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double sum = 1.0 / a;
  double term = sum;
  for (int n = 1; n < 1000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a, x), valid for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

bool flags_drift(const TestOutcome& outcome, double theta) {
  if (outcome.score_kind == ScoreKind::PValue) return outcome.drift_score < theta;
  return outcome.drift_score > theta;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Jacobi-theta form converges fast for small lambda
    const double w = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double m = 2.0 * k - 1.0;
      const double term = std::exp(-m * m * w);
      sum += term;
      if (term < 1e-20) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-20) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double regularized_gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  if (x < a + 1.0) return std::clamp(1.0 - gamma_p_series(a, x), 0.0, 1.0);
  return std::clamp(gamma_q_fraction(a, x), 0.0, 1.0);
}

double chi_squared_survival(double statistic, double df) {
  if (df <= 0.0) return 1.0;
  return regularized_gamma_q(df / 2.0, statistic / 2.0);
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::numbers::sqrt2); }

double population_std(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

TestOutcome ks_two_sample(std::span<const double> a, std::span<const double> b) {
  require_non_empty(a, b);
  const auto sa = sorted_copy(a);
  const auto sb = sorted_copy(b);
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double t = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == t) ++i;
    while (j < sb.size() && sb[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double effective_n = na * nb / (na + nb);
  return p_value_outcome(d, kolmogorov_survival(std::sqrt(effective_n) * d));
}

TestOutcome wasserstein_1d(std::span<const double> a, std::span<const double> b,
                           double reference_std) {
  require_non_empty(a, b);
  if (reference_std < 0.0) throw SampleError("reference_std must be non-negative");
  const auto sa = sorted_copy(a);
  const auto sb = sorted_copy(b);
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  // integral of |F_a - F_b| over the merged breakpoints
  std::size_t i = 0;
  std::size_t j = 0;
  double w = 0.0;
  double prev = std::min(sa.front(), sb.front());
  while (i < sa.size() || j < sb.size()) {
    double t;
    if (j >= sb.size() || (i < sa.size() && sa[i] <= sb[j])) {
      t = sa[i];
    } else {
      t = sb[j];
    }
    w += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (t - prev);
    while (i < sa.size() && sa[i] == t) ++i;
    while (j < sb.size() && sb[j] == t) ++j;
    prev = t;
  }
  return distance_outcome(w, w / std::max(reference_std, kScaleFloor));
}

double js_divergence_distributions(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw SampleError("distributions differ in support size");
  double js = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double m = 0.5 * (p[k] + q[k]);
    if (p[k] > 0.0) js += 0.5 * p[k] * std::log2(p[k] / m);
    if (q[k] > 0.0) js += 0.5 * q[k] * std::log2(q[k] / m);
  }
  return std::max(js, 0.0);
}

TestOutcome js_divergence(std::span<const double> a, std::span<const double> b, FeatureKind kind) {
  require_non_empty(a, b);
  std::vector<double> p;
  std::vector<double> q;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  if (kind == FeatureKind::Numeric) {
    const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
    const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
    const double lo = std::min(*amin, *bmin);
    const double hi = std::max(*amax, *bmax);
    p.assign(kJsNumericBins, 0.0);
    q.assign(kJsNumericBins, 0.0);
    if (hi > lo) {
      const double width = (hi - lo) / static_cast<double>(kJsNumericBins);
      std::vector<double> inner_edges(kJsNumericBins - 1);
      for (std::size_t k = 0; k + 1 < kJsNumericBins; ++k) {
        inner_edges[k] = lo + static_cast<double>(k + 1) * width;
      }
      auto bin_of = [&](double v) {
        return static_cast<std::size_t>(
            std::upper_bound(inner_edges.begin(), inner_edges.end(), v) - inner_edges.begin());
      };
      for (double v : a) p[bin_of(v)] += 1.0;
      for (double v : b) q[bin_of(v)] += 1.0;
    } else {
      p[0] = na;
      q[0] = nb;
    }
    const double zp = na + kJsBinSmoothing * kJsNumericBins;
    const double zq = nb + kJsBinSmoothing * kJsNumericBins;
    for (std::size_t k = 0; k < kJsNumericBins; ++k) {
      p[k] = (p[k] + kJsBinSmoothing) / zp;
      q[k] = (q[k] + kJsBinSmoothing) / zq;
    }
  } else {
    std::map<double, std::pair<double, double>> counts;
    for (double v : a) counts[v].first += 1.0;
    for (double v : b) counts[v].second += 1.0;
    for (const auto& [value, c] : counts) {
      p.push_back(c.first / na);
      q.push_back(c.second / nb);
    }
  }
  const double js = js_divergence_distributions(p, q);
  return distance_outcome(js, std::min(std::sqrt(js), 1.0));
}

TestOutcome chi_squared(std::span<const double> a, std::span<const double> b) {
  require_non_empty(a, b);
  std::map<double, std::pair<double, double>> counts;
  for (double v : a) counts[v].first += 1.0;
  for (double v : b) counts[v].second += 1.0;
  if (counts.size() < 2) return p_value_outcome(0.0, 1.0);
  const bool smooth = std::any_of(counts.begin(), counts.end(),
                                  [](const auto& kv) { return kv.second.first == 0.0; });
  double ref_total = 0.0;
  for (auto& [value, c] : counts) {
    if (smooth) c.first += 0.5;
    ref_total += c.first;
  }
  const double nb = static_cast<double>(b.size());
  double statistic = 0.0;
  for (const auto& [value, c] : counts) {
    const double expected = c.first / ref_total * nb;
    const double diff = c.second - expected;
    statistic += diff * diff / expected;
  }
  const double df = static_cast<double>(counts.size() - 1);
  return p_value_outcome(statistic, chi_squared_survival(statistic, df));
}

TestOutcome z_proportion(std::size_t successes_a, std::size_t n_a, std::size_t successes_b,
                         std::size_t n_b) {
  if (n_a == 0 || n_b == 0) throw SampleError("z_proportion needs n >= 1 in both samples");
  if (successes_a > n_a || successes_b > n_b) throw SampleError("successes exceed sample size");
  const double pa = static_cast<double>(successes_a) / static_cast<double>(n_a);
  const double pb = static_cast<double>(successes_b) / static_cast<double>(n_b);
  const double pooled = static_cast<double>(successes_a + successes_b) /
                        static_cast<double>(n_a + n_b);
  if (pooled <= 0.0 || pooled >= 1.0) return p_value_outcome(0.0, 1.0);
  const double se = std::sqrt(pooled * (1.0 - pooled) *
                              (1.0 / static_cast<double>(n_a) + 1.0 / static_cast<double>(n_b)));
  const double z = (pa - pb) / se;
  return p_value_outcome(z, normal_two_sided_p(z));
}

}  // namespace iebsm::stattests
