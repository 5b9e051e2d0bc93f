#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace mtdemand {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;

  /// Half-width of the normal-approximation 95% interval.
  double half_width() const { return 1.96 * se; }
};

/// Sample mean and standard error (sample sd / sqrt(n)); se is 0 for n < 2.
inline MeanSe mean_se(std::span<const double> v) {
  MeanSe r;
  r.n = v.size();
  if (v.empty()) return r;
  double s = 0;
  for (double x : v) s += x;
  r.mean = s / static_cast<double>(v.size());
  if (v.size() < 2) return r;
  double ss = 0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  return r;
}

inline MeanSe mean_se(const std::vector<double>& v) { return mean_se(std::span<const double>(v)); }

}  // namespace mtdemand
