#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ekg/core/config.hpp"
#include "ekg/sentinel/series.hpp"

namespace ekg {

// A strict local maximum of the smoothed distance series above the event
// threshold. Series endpoints are never anchors.
struct Anchor {
  std::size_t idx = 0;
  double d = 0.0;  // smoothed distance at idx
};

inline std::vector<Anchor> detect_anchors(const DistanceSeries& smoothed,
                                          const SegConfig& cfg) {
  std::vector<Anchor> out;
  const auto& v = smoothed.values;
  if (v.size() < 3) return out;
  const double thr = cfg.anchor_threshold();
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] > thr && v[i] > v[i - 1] && v[i] > v[i + 1]) out.push_back({i, v[i]});
  }
  return out;
}

// Confirmed event window: transitions [anchor_idx - a, anchor_idx + b],
// spanning [start, end) in time.
struct EventWindow {
  std::size_t anchor_idx = 0;
  std::size_t a = 0;  // backward extent, transitions
  std::size_t b = 0;  // forward extent, transitions
  double start = 0.0;
  double end = 0.0;

  std::size_t lo() const { return anchor_idx - a; }
  std::size_t hi() const { return anchor_idx + b; }
};

// Center-out expansion. The backward walk runs to completion first, then the
// forward walk uses the remaining duration budget. A direction stops at the
// first run of patience_m consecutive quiet values (excluded from the
// window), at the series boundary, or when including the next position would
// exceed p_u; that last check runs before the position is inspected.
// Returns nullopt (discard) when the final duration is <= p_l.
inline std::optional<EventWindow> expand_window(const Anchor& anchor,
                                                const DistanceSeries& smoothed,
                                                const SegConfig& cfg) {
  const auto& v = smoothed.values;
  const auto& ts = smoothed.frame_ts;
  const std::size_t n = v.size();
  if (anchor.idx >= n) throw std::out_of_range("expand_window: anchor out of range");
  const double quiet = cfg.quiet_threshold();

  std::size_t lo = anchor.idx;
  std::size_t hi = anchor.idx;
  const double anchor_end = ts[anchor.idx + 1];

  int q = 0;
  for (long long pos = static_cast<long long>(anchor.idx) - 1; pos >= 0; --pos) {
    const std::size_t p = static_cast<std::size_t>(pos);
    if (anchor_end - ts[p] > cfg.p_u) break;
    if (v[p] < quiet) {
      if (++q == cfg.patience_m) break;
    } else {
      lo = p;
      q = 0;
    }
  }

  q = 0;
  for (std::size_t pos = anchor.idx + 1; pos < n; ++pos) {
    if (ts[pos + 1] - ts[lo] > cfg.p_u) break;
    if (v[pos] < quiet) {
      if (++q == cfg.patience_m) break;
    } else {
      hi = pos;
      q = 0;
    }
  }

  const double duration = ts[hi + 1] - ts[lo];
  if (duration <= cfg.p_l) return std::nullopt;
  return EventWindow{anchor.idx, anchor.idx - lo, hi - anchor.idx, ts[lo], ts[hi + 1]};
}

// Extends the window over every intersecting speech island, to fixpoint
// (an extension may bring further islands into intersection).
inline EventWindow merge_speech(EventWindow w, std::span<const SpeechIsland> islands) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& isl : islands) {
      if (isl.start <= w.end && isl.end >= w.start) {
        if (isl.start < w.start) {
          w.start = isl.start;
          changed = true;
        }
        if (isl.end > w.end) {
          w.end = isl.end;
          changed = true;
        }
      }
    }
  }
  return w;
}

}  // namespace ekg
