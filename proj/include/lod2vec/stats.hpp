#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "lod2vec/raster.hpp"

namespace lod2vec {

inline double mean(std::span<const double> v) {
  if (v.empty()) throw Error("mean of empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Even-length samples take the mean of the two central order statistics.
inline double median(std::vector<double> v) {
  if (v.empty()) throw Error("median of empty sample");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

inline double median(std::span<const double> v) { return median(std::vector<double>(v.begin(), v.end())); }

/// Population standard deviation.
inline double stddev(std::span<const double> v) {
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace lod2vec
