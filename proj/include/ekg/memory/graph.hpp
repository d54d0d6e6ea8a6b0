#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ekg/core/errors.hpp"

namespace ekg {

enum class NodeKind { State, Event, Entity };
enum class Rel { PreconditionOf, ResultsIn, TemporalNext, Involves };

inline const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::State: return "State";
    case NodeKind::Event: return "Event";
    default: return "Entity";
  }
}

inline const char* to_string(Rel r) {
  switch (r) {
    case Rel::PreconditionOf: return "PRECONDITION_OF";
    case Rel::ResultsIn: return "RESULTS_IN";
    case Rel::TemporalNext: return "TEMPORAL_NEXT";
    default: return "INVOLVES";
  }
}

inline NodeKind node_kind_from(const std::string& s) {
  if (s == "State") return NodeKind::State;
  if (s == "Event") return NodeKind::Event;
  if (s == "Entity") return NodeKind::Entity;
  throw StoreError("unknown node kind '" + s + "'");
}

inline Rel rel_from(const std::string& s) {
  if (s == "PRECONDITION_OF") return Rel::PreconditionOf;
  if (s == "RESULTS_IN") return Rel::ResultsIn;
  if (s == "TEMPORAL_NEXT") return Rel::TemporalNext;
  if (s == "INVOLVES") return Rel::Involves;
  throw StoreError("unknown edge rel '" + s + "'");
}

struct EKGNode {
  std::string id;
  NodeKind kind = NodeKind::State;
  std::string text;
  std::vector<double> embedding;   // unit vector, store dimension
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<std::string> source_chunks;
  std::uint64_t counter = 0;       // insertion order, monotone
  bool pre_role = false;           // State served as a pre-state
  bool post_role = false;          // State served as a post-state
  bool alive = true;               // false once fused into a survivor
};

struct EKGEdge {
  std::string src;
  std::string dst;
  Rel rel = Rel::PreconditionOf;
  // Similarity that justified a merge-derived edge, recorded at creation.
  std::optional<double> sim;

  std::string key() const {
    return src + '\x1f' + dst + '\x1f' + to_string(rel);
  }
};

}  // namespace ekg
