#pragma once

#include <random>
#include <string>
#include <vector>

#include "iebsm/core.hpp"

namespace testing_support {

inline iebsm::Schema numeric_schema(std::size_t d, std::size_t k) {
  std::vector<iebsm::FeatureDescriptor> f;
  for (std::size_t i = 0; i < d; ++i) f.push_back({"f" + std::to_string(i), iebsm::FeatureKind::Numeric});
  std::vector<std::string> c;
  for (std::size_t i = 0; i < k; ++i) c.push_back("c" + std::to_string(i));
  return iebsm::Schema(f, c);
}

// Class c has mean c * shift on every feature.
inline std::vector<iebsm::Instance> gaussian_blobs(std::size_t n, std::size_t d, std::size_t k, double shift,
                                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> cls(0, k - 1);
  std::vector<iebsm::Instance> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].y = cls(rng);
    out[i].seq = i;
    out[i].x.resize(d);
    for (auto& v : out[i].x) v = shift * static_cast<double>(out[i].y) + noise(rng);
  }
  return out;
}

}  // namespace testing_support
