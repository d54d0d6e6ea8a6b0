#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "ekg/core/types.hpp"
#include "ekg/core/vec.hpp"

namespace ekg {

// Adjacent-frame distance series. values[i] is the distance between frames
// i and i+1 (1 - similarity); frame_ts keeps all frame timestamps, so
// transition i spans [frame_ts[i], frame_ts[i+1]].
struct DistanceSeries {
  std::vector<double> values;
  std::vector<double> frame_ts;  // size == values.size() + 1

  double t_of(std::size_t i) const { return frame_ts[i]; }
};

inline DistanceSeries adjacent_distance(std::span<const FrameEmbedding> frames) {
  if (frames.size() < 2)
    throw std::invalid_argument("adjacent_distance: need at least 2 frames");
  DistanceSeries s;
  s.values.reserve(frames.size() - 1);
  s.frame_ts.reserve(frames.size());
  s.frame_ts.push_back(frames[0].t);
  for (std::size_t i = 0; i + 1 < frames.size(); ++i) {
    if (!(frames[i + 1].t > frames[i].t))
      throw std::invalid_argument(
          "adjacent_distance: timestamps must be strictly increasing");
    // unit vectors by contract; distance is 1 - dot
    s.values.push_back(1.0 - dot(frames[i].v, frames[i + 1].v));
    s.frame_ts.push_back(frames[i + 1].t);
  }
  return s;
}

struct GaussianKernel {
  int radius = 0;
  std::vector<double> w;  // size 2*radius + 1, sums to 1
};

inline GaussianKernel make_gaussian_kernel(double sigma) {
  GaussianKernel k;
  if (sigma <= 0.0) {
    k.radius = 0;
    k.w = {1.0};
    return k;
  }
  k.radius = static_cast<int>(std::ceil(3.0 * sigma));
  k.w.resize(static_cast<std::size_t>(2 * k.radius + 1));
  double sum = 0.0;
  for (int j = -k.radius; j <= k.radius; ++j) {
    const double x = std::exp(-(static_cast<double>(j) * j) / (2.0 * sigma * sigma));
    k.w[static_cast<std::size_t>(j + k.radius)] = x;
    sum += x;
  }
  for (double& x : k.w) x /= sum;
  return k;
}

// Mirror index about the series ends without repeating the edge sample
// (-1 -> 1, n -> n-2).
inline std::size_t mirror_index(long long k, std::size_t n) {
  if (n == 1) return 0;
  const long long nn = static_cast<long long>(n);
  while (k < 0 || k >= nn) {
    if (k < 0) k = -k;
    if (k >= nn) k = 2 * (nn - 1) - k;
  }
  return static_cast<std::size_t>(k);
}

// Discrete Gaussian smoothing with reflect padding; unit-sum kernel, output
// length equals input length. sigma == 0 is the identity.
inline DistanceSeries gaussian_smooth(const DistanceSeries& in, double sigma) {
  DistanceSeries out;
  out.frame_ts = in.frame_ts;
  const std::size_t n = in.values.size();
  out.values.resize(n);
  if (n == 0) return out;
  const GaussianKernel k = make_gaussian_kernel(sigma);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = -k.radius; j <= k.radius; ++j) {
      const std::size_t src = mirror_index(static_cast<long long>(i) + j, n);
      acc += k.w[static_cast<std::size_t>(j + k.radius)] * in.values[src];
    }
    out.values[i] = acc;
  }
  return out;
}

}  // namespace ekg
