#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ekg {

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("dot: dimension mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double l2_norm(std::span<const double> v) {
  return std::sqrt(dot(v, v));
}

// Cosine similarity, clamped into [-1, 1]. For unit vectors this is the
// plain dot product up to rounding.
inline double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (!(na > 0.0) || !(nb > 0.0))
    throw std::invalid_argument("cosine: zero vector");
  double c = dot(a, b) / (na * nb);
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  return c;
}

// Scale to unit norm. Iterates the division until the vector is a bitwise
// fixpoint, so normalize(normalize(v)) == normalize(v) exactly.
inline std::vector<double> normalize(std::vector<double> v) {
  double n = l2_norm(v);
  if (!(n > 0.0)) throw std::invalid_argument("normalize: zero vector");
  for (int pass = 0; pass < 16; ++pass) {
    if (n == 1.0) break;
    bool changed = false;
    for (double& x : v) {
      const double y = x / n;
      if (y != x) changed = true;
      x = y;
    }
    if (!changed) break;
    n = l2_norm(v);
  }
  return v;
}

inline bool is_unit(std::span<const double> v, double tol = 1e-6) {
  return std::fabs(l2_norm(v) - 1.0) <= tol;
}

// FNV-1a 64-bit; used for token bucketing and fixture keys.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string fnv1a64_hex(std::string_view s) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a64(s);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace ekg
