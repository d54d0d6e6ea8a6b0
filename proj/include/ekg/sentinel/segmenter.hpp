#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ekg/core/config.hpp"
#include "ekg/core/types.hpp"
#include "ekg/core/vec.hpp"
#include "ekg/sentinel/series.hpp"
#include "ekg/sentinel/window.hpp"

namespace ekg {

// Single-pass dual-sentinel segmenter. Frames are pushed one at a time;
// finalized chunks become available through take_ready(). Per-frame state is
// bounded: the raw-distance buffer never exceeds 2*ceil(3*sigma) entries and
// the smoothed-distance buffer never exceeds the p_u duration horizon, so
// retained_entries() stays below p_u*fps + 2*ceil(3*sigma) + patience_m for
// any stream length.
//
// A window is only emitted once no later anchor or speech extension can still
// merge into it: every future window starts strictly after
// min(frontier time, oldest open expansion) - p_u, and a window at speech
// fixpoint owns every island component it touches.
class StreamingSegmenter {
 public:
  StreamingSegmenter(SegConfig cfg, std::vector<SpeechIsland> islands)
      : cfg_(cfg), kernel_(make_gaussian_kernel(cfg.sigma)) {
    cfg_.validate();
    for (const auto& isl : islands)
      if (!(isl.start < isl.end) || isl.text.empty())
        throw std::invalid_argument("segmenter: invalid speech island");
    std::sort(islands.begin(), islands.end(),
              [](const SpeechIsland& a, const SpeechIsland& b) {
                if (a.start != b.start) return a.start < b.start;
                if (a.end != b.end) return a.end < b.end;
                return a.text < b.text;
              });
    islands_ = std::move(islands);
    absorbed_.assign(islands_.size(), false);
  }

  void push(const FrameEmbedding& f) {
    if (finished_) throw std::logic_error("segmenter: push after finish");
    if (f.v.empty()) throw std::invalid_argument("segmenter: empty embedding");
    if (dim_ == 0) dim_ = f.v.size();
    if (f.v.size() != dim_)
      throw std::invalid_argument("segmenter: embedding dimension mismatch");
    if (!is_unit(f.v))
      throw std::invalid_argument("segmenter: embedding is not unit-norm");
    if (have_prev_ && !(f.t > prev_t_))
      throw std::invalid_argument("segmenter: timestamps must be strictly increasing");
    if (!have_prev_) {
      t_first_ = f.t;
      emitted_until_ = f.t;
      have_prev_ = true;
    } else {
      raw_.push_back(Trans{1.0 - dot(prev_v_, f.v), prev_t_, f.t});
      ++n_raw_;
    }
    prev_v_ = f.v;
    prev_t_ = f.t;
    t_last_ = f.t;
    advance(false);
  }

  void finish() {
    if (finished_) return;
    finished_ = true;
    advance(true);
    for (auto& e : open_)
      if (!e.done) complete(e);  // series boundary ends the forward walk
    open_.clear();
    drained_ = true;
    bookkeeping();
    if (have_prev_ && emitted_until_ < t_last_) emit_static(emitted_until_, t_last_);
  }

  std::vector<EventChunk> take_ready() {
    std::vector<EventChunk> out;
    out.swap(ready_);
    return out;
  }

  // raw lookahead + smoothed horizon; the streaming-boundedness figure
  std::size_t retained_entries() const { return raw_.size() + sm_.size(); }

  bool finished() const { return finished_; }

 private:
  struct Trans {
    double v, t0, t1;
  };

  struct Expansion {
    std::size_t anchor_idx;
    double anchor_t0;
    double lo_time;
    double end_time;  // timestamp just past the last included transition
    std::size_t fpos;
    int fquiet = 0;
    bool done = false;
  };

  struct Pending {  // completed expansion, pre-speech
    double start, end;
  };

  struct Pooled {  // speech-extended window awaiting emission
    double start, end;
    std::vector<std::size_t> islands;
  };

  std::size_t sm_next() const { return sm_base_ + sm_.size(); }
  std::size_t frontier() const { return sm_base_ + sm_.size() - 1; }
  const Trans& sm_at(std::size_t abs) const { return sm_[abs - sm_base_]; }

  double raw_at(std::size_t abs) const { return raw_[abs - raw_base_].v; }

  // Smoothed value at absolute transition k; start mirror always applies,
  // end mirror only once the stream has finished.
  double convolve(std::size_t k, bool at_end) const {
    const int r = kernel_.radius;
    const long long nn = static_cast<long long>(n_raw_);
    double acc = 0.0;
    for (int j = -r; j <= r; ++j) {
      long long idx = static_cast<long long>(k) + j;
      if (nn == 1) {
        idx = 0;
      } else {
        while (idx < 0 || idx >= nn) {
          if (idx < 0) idx = -idx;
          // idx >= nn is only reachable once the stream has finished
          else if (at_end)
            idx = 2 * (nn - 1) - idx;
        }
      }
      acc += kernel_.w[static_cast<std::size_t>(j + r)] *
             raw_at(static_cast<std::size_t>(idx));
    }
    return acc;
  }

  void advance(bool at_end) {
    const std::size_t r = static_cast<std::size_t>(kernel_.radius);
    while (true) {
      const std::size_t k = sm_next();
      if (k >= n_raw_) break;
      if (!at_end && k + r >= n_raw_) break;  // wait for lookahead
      const Trans& base = raw_[k - raw_base_];
      sm_.push_back(Trans{convolve(k, at_end), base.t0, base.t1});
      on_smoothed(k);
      if (!at_end && k >= r) {
        const std::size_t keep_from = k + 1 - r;
        while (raw_base_ < keep_from) {
          raw_.pop_front();
          ++raw_base_;
        }
      }
    }
  }

  void on_smoothed(std::size_t k) {
    for (auto& e : open_)
      if (!e.done) step_forward(e);

    // anchor test at k-1 (strict local max above threshold; endpoints never)
    if (k >= 2 && k - 2 >= sm_base_) {
      const std::size_t i = k - 1;
      const double vi = sm_at(i).v;
      if (vi > cfg_.anchor_threshold() && vi > sm_at(i - 1).v && vi > sm_at(k).v)
        start_expansion(i);
    }

    for (auto it = open_.begin(); it != open_.end();) {
      if (it->done) {
        complete(*it);
        it = open_.erase(it);
      } else {
        ++it;
      }
    }

    bookkeeping();

    // trim the smoothed horizon to p_u behind the frontier
    const double ft = sm_at(frontier()).t0;
    while (!sm_.empty() && ft - sm_.front().t0 > cfg_.p_u) {
      sm_.pop_front();
      ++sm_base_;
    }
  }

  void start_expansion(std::size_t i) {
    const double quiet = cfg_.quiet_threshold();
    Expansion e;
    e.anchor_idx = i;
    e.anchor_t0 = sm_at(i).t0;
    e.end_time = sm_at(i).t1;
    std::size_t lo = i;
    int q = 0;
    for (long long pos = static_cast<long long>(i) - 1;
         pos >= static_cast<long long>(sm_base_); --pos) {
      const Trans& s = sm_at(static_cast<std::size_t>(pos));
      if (e.end_time - s.t0 > cfg_.p_u) break;
      if (s.v < quiet) {
        if (++q == cfg_.patience_m) break;
      } else {
        lo = static_cast<std::size_t>(pos);
        q = 0;
      }
    }
    e.lo_time = sm_at(lo).t0;
    e.fpos = i + 1;
    step_forward(e);
    if (e.done)
      complete(e);
    else
      open_.push_back(e);
  }

  void step_forward(Expansion& e) {
    const double quiet = cfg_.quiet_threshold();
    while (e.fpos <= frontier()) {
      const Trans& s = sm_at(e.fpos);
      if (s.t1 - e.lo_time > cfg_.p_u) {
        e.done = true;
        return;
      }
      if (s.v < quiet) {
        if (++e.fquiet == cfg_.patience_m) {
          e.done = true;
          return;
        }
      } else {
        e.end_time = s.t1;
        e.fquiet = 0;
      }
      ++e.fpos;
    }
  }

  void complete(const Expansion& e) {
    const double dur = e.end_time - e.lo_time;
    if (dur > cfg_.p_l) settle_q_.push_back(Pending{e.lo_time, e.end_time});
  }

  double barrier() const {
    if (drained_) return std::numeric_limits<double>::infinity();
    if (sm_.empty()) return -std::numeric_limits<double>::infinity();
    double t = sm_at(frontier()).t0;
    for (const auto& e : open_) t = std::min(t, e.anchor_t0);
    return t - cfg_.p_u;
  }

  void bookkeeping() {
    const double bar = barrier();
    for (auto it = settle_q_.begin(); it != settle_q_.end();) {
      if (it->end <= bar) {
        pool_insert(absorb_speech(*it));
        it = settle_q_.erase(it);
      } else {
        ++it;
      }
    }
    while (!pool_.empty()) {
      while (pool_.size() >= 2 && pool_[1].start < pool_[0].end) {
        pool_[0].end = std::max(pool_[0].end, pool_[1].end);
        std::vector<std::size_t> merged;
        std::set_union(pool_[0].islands.begin(), pool_[0].islands.end(),
                       pool_[1].islands.begin(), pool_[1].islands.end(),
                       std::back_inserter(merged));
        pool_[0].islands = std::move(merged);
        pool_.erase(pool_.begin() + 1);
      }
      const Pooled& head = pool_.front();
      bool blocked = bar < head.end;
      for (const auto& p : settle_q_)
        if (p.start < head.end) blocked = true;
      if (blocked) break;
      emit_window(head);
      pool_.erase(pool_.begin());
    }
  }

  Pooled absorb_speech(const Pending& p) {
    Pooled w{p.start, p.end, {}};
    std::vector<bool> mine(islands_.size(), false);
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t idx = 0; idx < islands_.size(); ++idx) {
        const auto& isl = islands_[idx];
        if (isl.start > w.end) break;  // islands sorted by start
        if (isl.end < w.start) continue;
        if (!mine[idx]) {
          mine[idx] = true;
          absorbed_[idx] = true;
          changed = true;
        }
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
    for (std::size_t idx = 0; idx < islands_.size(); ++idx)
      if (mine[idx]) w.islands.push_back(idx);
    return w;
  }

  void pool_insert(Pooled w) {
    auto it = std::upper_bound(pool_.begin(), pool_.end(), w,
                               [](const Pooled& a, const Pooled& b) {
                                 return a.start < b.start;
                               });
    pool_.insert(it, std::move(w));
  }

  void emit_window(const Pooled& w) {
    const double start = std::max(w.start, t_first_);
    const double end = std::min(w.end, t_last_);
    if (!(start < end)) return;
    if (start > emitted_until_) emit_static(emitted_until_, start);
    std::vector<SpeechIsland> transcript;
    transcript.reserve(w.islands.size());
    for (std::size_t idx : w.islands) transcript.push_back(islands_[idx]);
    for (std::size_t i = 0;; ++i) {
      const double s = start + static_cast<double>(i) * cfg_.p_u;
      if (!(s < end)) break;
      const double e = std::min(s + cfg_.p_u, end);
      EventChunk c;
      c.id = next_id();
      c.kind = ChunkKind::DynamicEvent;
      c.start = s;
      c.end = e;
      c.sampled_ts = sample_grid(s, e, cfg_.fps_dynamic);
      c.transcript = transcript;
      ready_.push_back(std::move(c));
    }
    emitted_until_ = end;
  }

  void emit_static(double s, double e) {
    if (!(s < e)) return;
    EventChunk c;
    c.id = next_id();
    c.kind = ChunkKind::StaticBackground;
    c.start = s;
    c.end = e;
    c.sampled_ts = sample_grid(s, e, cfg_.fps_static);
    for (std::size_t idx = 0; idx < islands_.size(); ++idx) {
      const auto& isl = islands_[idx];
      if (!absorbed_[idx] && isl.start >= s && isl.start < e)
        c.transcript.push_back(isl);
    }
    ready_.push_back(std::move(c));
    emitted_until_ = e;
  }

  static std::vector<double> sample_grid(double s, double e, double fps) {
    std::vector<double> out;
    for (std::size_t k = 0;; ++k) {
      const double t = s + static_cast<double>(k) / fps;
      if (!(t < e)) break;
      out.push_back(t);
    }
    return out;
  }

  std::string next_id() { return "c" + std::to_string(chunk_seq_++); }

  SegConfig cfg_;
  GaussianKernel kernel_;
  std::vector<SpeechIsland> islands_;
  std::vector<bool> absorbed_;

  std::size_t dim_ = 0;
  bool have_prev_ = false;
  bool finished_ = false;
  bool drained_ = false;
  std::vector<double> prev_v_;
  double prev_t_ = 0.0;
  double t_first_ = 0.0;
  double t_last_ = 0.0;

  std::deque<Trans> raw_;
  std::size_t raw_base_ = 0;
  std::size_t n_raw_ = 0;

  std::deque<Trans> sm_;
  std::size_t sm_base_ = 0;

  std::vector<Expansion> open_;
  std::vector<Pending> settle_q_;
  std::vector<Pooled> pool_;

  double emitted_until_ = 0.0;
  std::size_t chunk_seq_ = 0;
  std::vector<EventChunk> ready_;
};

// Whole-stream convenience wrapper over the streaming segmenter. Output
// chunks partition [t_first, t_last] seamlessly; an empty input yields an
// empty output.
inline std::vector<EventChunk> segment_stream(std::span<const FrameEmbedding> frames,
                                              std::vector<SpeechIsland> islands,
                                              const SegConfig& cfg) {
  StreamingSegmenter seg(cfg, std::move(islands));
  for (const auto& f : frames) seg.push(f);
  seg.finish();
  return seg.take_ready();
}

}  // namespace ekg
