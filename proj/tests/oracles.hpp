// Direct-definition reference implementations used as test oracles. They
// favour obviousness over speed and share no code with the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <vector>

namespace oracle {

inline double ecdf(const std::vector<double>& s, double t) {
  std::size_t k = 0;
  for (double v : s) k += v <= t ? 1 : 0;
  return static_cast<double>(k) / static_cast<double>(s.size());
}

inline double ks_statistic(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (const auto* s : {&a, &b}) {
    for (double t : *s) d = std::max(d, std::abs(ecdf(a, t) - ecdf(b, t)));
  }
  return d;
}

// P(K > lambda), switching between the two classical series at a different
// point than the library does.
inline double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  long double sum = 0.0L;
  if (lambda < 0.3) {
    const long double pi = std::numbers::pi_v<long double>;
    for (int k = 1; k <= 200; ++k) {
      const long double m = 2.0L * k - 1.0L;
      sum += std::exp(-m * m * pi * pi / (8.0L * lambda * lambda));
    }
    return static_cast<double>(1.0L - std::sqrt(2.0L * pi) / lambda * sum);
  }
  for (int k = 1; k <= 2000; ++k) {
    const long double term = std::exp(-2.0L * k * k * static_cast<long double>(lambda) * lambda);
    sum += (k % 2 == 1 ? term : -term);
  }
  return static_cast<double>(2.0L * sum);
}

inline double ks_p_value(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  return std::clamp(kolmogorov_q(std::sqrt(na * nb / (na + nb)) * ks_statistic(a, b)), 0.0, 1.0);
}

// Integral of |Qa(u) - Qb(u)| over u in (0, 1), Q the empirical quantile
// function (left-continuous inverse of the ECDF).
inline double wasserstein(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::vector<double> cuts;
  for (std::size_t i = 0; i <= a.size(); ++i) cuts.push_back(static_cast<double>(i) / na);
  for (std::size_t j = 0; j <= b.size(); ++j) cuts.push_back(static_cast<double>(j) / nb);
  std::sort(cuts.begin(), cuts.end());
  double w = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k], hi = cuts[k + 1];
    if (hi <= lo) continue;
    const double mid = 0.5 * (lo + hi);
    const auto ia = std::min(static_cast<std::size_t>(mid * na), a.size() - 1);
    const auto ib = std::min(static_cast<std::size_t>(mid * nb), b.size() - 1);
    w += std::abs(a[ia] - b[ib]) * (hi - lo);
  }
  return w;
}

inline double population_std(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

// JS divergence in bits: (KL(p||m) + KL(q||m)) / 2 with natural logs, / ln 2.
inline double js(const std::vector<double>& p, const std::vector<double>& q) {
  double total = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double m = (p[k] + q[k]) / 2.0;
    if (p[k] > 0) total += p[k] * std::log(p[k] / m);
    if (q[k] > 0) total += q[k] * std::log(q[k] / m);
  }
  return total / 2.0 / std::numbers::ln2;
}

inline double js_numeric_score(const std::vector<double>& a, const std::vector<double>& b, std::size_t bins = 30,
                               double smoothing = 1e-9) {
  double lo = a[0], hi = a[0];
  for (const auto* s : {&a, &b}) {
    for (double v : *s) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  auto hist = [&](const std::vector<double>& s) {
    std::vector<double> h(bins, 0.0);
    for (double v : s) {
      std::size_t k = hi > lo ? static_cast<std::size_t>(std::floor((v - lo) / (hi - lo) * bins)) : 0;
      h[std::min(k, bins - 1)] += 1.0;
    }
    double z = 0.0;
    for (auto& c : h) z += c + smoothing;
    for (auto& c : h) c = (c + smoothing) / z;
    return h;
  };
  return std::sqrt(js(hist(a), hist(b)));
}

inline double js_categorical_score(const std::vector<double>& a, const std::vector<double>& b) {
  std::map<double, std::pair<double, double>> c;
  for (double v : a) c[v].first += 1.0 / static_cast<double>(a.size());
  for (double v : b) c[v].second += 1.0 / static_cast<double>(b.size());
  std::vector<double> p, q;
  for (auto& [k, pq] : c) {
    p.push_back(pq.first);
    q.push_back(pq.second);
  }
  return std::sqrt(js(p, q));
}

// Chi-square survival for integer df from the closed-form finite sums.
inline double chi2_sf(double x, int df) {
  const double h = x / 2.0;
  if (df % 2 == 0) {
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < df / 2; ++k) {
      term *= h / k;
      sum += term;
    }
    return std::exp(-h) * sum;
  }
  double sum = std::erfc(std::sqrt(h));
  double term = std::sqrt(h) / std::tgamma(1.5);  // h^(1/2) / Gamma(3/2)
  for (int k = 0; k <= (df - 3) / 2; ++k) {
    sum += std::exp(-h) * term;
    term *= h / (k + 1.5);
  }
  return sum;
}

struct ChiResult {
  double statistic;
  double p;
};

// Goodness of fit of the current counts to the reference proportions; every
// reference count gets +0.5 when some category has none.
inline ChiResult chi_squared(const std::vector<double>& a, const std::vector<double>& b) {
  std::map<double, std::pair<double, double>> c;
  for (double v : a) c[v].first += 1.0;
  for (double v : b) c[v].second += 1.0;
  if (c.size() < 2) return {0.0, 1.0};
  bool zero = false;
  for (auto& [k, v] : c) zero = zero || v.first == 0.0;
  double ref = 0.0;
  for (auto& [k, v] : c) ref += v.first + (zero ? 0.5 : 0.0);
  double stat = 0.0;
  for (auto& [k, v] : c) {
    const double e = (v.first + (zero ? 0.5 : 0.0)) / ref * static_cast<double>(b.size());
    stat += (v.second - e) * (v.second - e) / e;
  }
  return {stat, chi2_sf(stat, static_cast<int>(c.size()) - 1)};
}

struct ZResult {
  double z;
  double p;
};

inline ZResult z_test(double sa, double na, double sb, double nb) {
  const double pooled = (sa + sb) / (na + nb);
  if (pooled == 0.0 || pooled == 1.0) return {0.0, 1.0};
  const double z = (sa / na - sb / nb) / std::sqrt(pooled * (1 - pooled) * (1 / na + 1 / nb));
  const double phi = 0.5 * (1.0 + std::erf(std::abs(z) / std::sqrt(2.0)));
  return {z, 2.0 * (1.0 - phi)};
}

// Macro F1 straight from per-class precision and recall.
inline double f1_macro(const std::vector<std::vector<long long>>& cm) {
  const std::size_t k = cm.size();
  double sum = 0.0;
  int used = 0;
  for (std::size_t c = 0; c < k; ++c) {
    long long tp = cm[c][c], actual = 0, predicted = 0;
    for (std::size_t j = 0; j < k; ++j) {
      actual += cm[c][j];
      predicted += cm[j][c];
    }
    if (actual == 0 && predicted == 0) continue;
    ++used;
    const double p = predicted ? static_cast<double>(tp) / predicted : 0.0;
    const double r = actual ? static_cast<double>(tp) / actual : 0.0;
    sum += p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  return sum / used;
}

}  // namespace oracle
