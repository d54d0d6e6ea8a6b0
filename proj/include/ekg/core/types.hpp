#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace ekg {

// One video frame's timestamped embedding. Vectors are unit-normalized at
// ingestion; downstream similarity is a plain dot product.
struct FrameEmbedding {
  double t = 0.0;               // seconds, strictly increasing within a stream
  std::vector<double> v;        // unit vector, fixed dimension per stream
};

// Contiguous transcribed speech interval, punctuation preserved verbatim.
struct SpeechIsland {
  double start = 0.0;
  double end = 0.0;
  std::string text;

  bool operator==(const SpeechIsland&) const = default;
};

enum class ChunkKind { DynamicEvent, StaticBackground };

inline const char* to_string(ChunkKind k) {
  return k == ChunkKind::DynamicEvent ? "DynamicEvent" : "StaticBackground";
}

// A segment of the input timeline. Chunks emitted by one segmentation run
// partition [t_first, t_last] seamlessly.
struct EventChunk {
  std::string id;
  ChunkKind kind = ChunkKind::StaticBackground;
  double start = 0.0;
  double end = 0.0;                    // start < end; dynamic chunks <= 12 s
  std::vector<double> sampled_ts;      // grid in [start, end), 8 FPS dynamic / 2 FPS static
  std::vector<SpeechIsland> transcript;

  bool operator==(const EventChunk&) const = default;
};

// One pre-state -> event -> post-state record extracted from a chunk.
struct SESTriplet {
  int temporal_order = 0;          // 1..n within a chunk, unique
  std::string pre_state;
  std::string event;
  std::string post_state;
  std::vector<std::string> entities;
  std::string location;
  std::string chunk_id;
  double t_start = 0.0;
  double t_end = 0.0;
  bool explicit_span = false;      // true when the extractor supplied times

  bool operator==(const SESTriplet&) const = default;
};

// Seconds formatted for prompts and context lines: shortest form that keeps
// a decimal point (3 -> "3.0", 9.5 -> "9.5").
inline std::string format_seconds(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", t);
  std::string s(buf);
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

}  // namespace ekg
