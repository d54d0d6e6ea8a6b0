#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <json.hpp>

#include "ekg/core/errors.hpp"
#include "ekg/core/types.hpp"

namespace ekg {

// Parsed extractor reply for one chunk. Entities outside the scene inventory
// and rejected triplets are reported as warnings, never as hard failures.
struct ExtractionResult {
  std::vector<std::string> scene_inventory;
  std::vector<SESTriplet> triplets;
  std::vector<std::string> warnings;

  bool operator==(const ExtractionResult& o) const {
    return scene_inventory == o.scene_inventory && triplets == o.triplets;
  }
};

namespace detail {

inline double clamp_time(double t, double lo, double hi) {
  return std::min(std::max(t, lo), hi);
}

}  // namespace detail

// Parses a backend reply into an ExtractionResult. Tolerant framing: any
// prose or code fences outside the outermost {...} are stripped; strictness
// lives in the schema check. Total over arbitrary input: throws
// ExtractionError for unusable replies, never anything else.
inline ExtractionResult parse_extraction(const std::string& raw,
                                         const EventChunk& chunk) {
  const auto first = raw.find('{');
  const auto last = raw.rfind('}');
  if (first == std::string::npos || last == std::string::npos || last < first)
    throw ExtractionError(ExtractionErrorKind::Unparsable,
                          "extraction reply carries no JSON object");
  const nlohmann::json j =
      nlohmann::json::parse(raw.substr(first, last - first + 1), nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ExtractionError(ExtractionErrorKind::Unparsable,
                          "extraction reply is not valid JSON");
  if (!j.contains("events") || !j["events"].is_array())
    throw ExtractionError(ExtractionErrorKind::SchemaViolation,
                          "extraction reply lacks an \"events\" array");

  ExtractionResult out;
  if (j.contains("scene_inventory") && j["scene_inventory"].is_array()) {
    for (const auto& e : j["scene_inventory"])
      if (e.is_string()) out.scene_inventory.push_back(e.get<std::string>());
  }

  struct Ranked {
    long long given_order;
    std::size_t position;
    SESTriplet t;
  };
  std::vector<Ranked> ranked;
  std::size_t position = 0;
  for (const auto& ev : j["events"]) {
    ++position;
    if (!ev.is_object()) {
      out.warnings.push_back("event #" + std::to_string(position) +
                             " rejected: not an object");
      continue;
    }
    SESTriplet t;
    auto str_field = [&ev](const char* key) -> std::string {
      if (ev.contains(key) && ev[key].is_string()) return ev[key].get<std::string>();
      return {};
    };
    t.pre_state = str_field("pre_state");
    t.event = str_field("event");
    t.post_state = str_field("post_state");
    if (t.pre_state.empty() || t.event.empty() || t.post_state.empty()) {
      out.warnings.push_back("event #" + std::to_string(position) +
                             " rejected: empty pre/event/post state");
      continue;
    }
    t.location = str_field("location");
    if (ev.contains("entities") && ev["entities"].is_array()) {
      for (const auto& e : ev["entities"])
        if (e.is_string()) t.entities.push_back(e.get<std::string>());
    }
    long long given = static_cast<long long>(position);
    if (ev.contains("temporal_order") && ev["temporal_order"].is_number_integer())
      given = ev["temporal_order"].get<long long>();
    if (ev.contains("t_start") && ev["t_start"].is_number() &&
        ev.contains("t_end") && ev["t_end"].is_number()) {
      const double a = ev["t_start"].get<double>();
      const double b = ev["t_end"].get<double>();
      t.t_start = detail::clamp_time(std::min(a, b), chunk.start, chunk.end);
      t.t_end = detail::clamp_time(std::max(a, b), chunk.start, chunk.end);
      t.explicit_span = true;
    } else {
      t.t_start = chunk.start;
      t.t_end = chunk.end;
    }
    if (ev.contains("explicit_span") && ev["explicit_span"].is_boolean())
      t.explicit_span = ev["explicit_span"].get<bool>();
    t.chunk_id = chunk.id;
    for (const auto& name : t.entities) {
      if (std::find(out.scene_inventory.begin(), out.scene_inventory.end(), name) ==
          out.scene_inventory.end())
        out.warnings.push_back("entity \"" + name + "\" is not in scene_inventory");
    }
    ranked.push_back({given, position, std::move(t)});
  }

  // Stable rank by the backend's order, then normalize to 1..n.
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.given_order != b.given_order) return a.given_order < b.given_order;
    return a.position < b.position;
  });
  int order = 0;
  for (auto& r : ranked) {
    r.t.temporal_order = ++order;
    out.triplets.push_back(std::move(r.t));
  }
  return out;
}

// Triplets without an explicit time span get evenly divided sub-intervals of
// the chunk, in temporal order.
inline ExtractionResult triplet_timestamps(ExtractionResult result,
                                           const EventChunk& chunk) {
  std::vector<SESTriplet*> untimed;
  for (auto& t : result.triplets)
    if (!t.explicit_span) untimed.push_back(&t);
  const double n = static_cast<double>(untimed.size());
  const double span = chunk.end - chunk.start;
  for (std::size_t i = 0; i < untimed.size(); ++i) {
    untimed[i]->t_start = chunk.start + span * (static_cast<double>(i) / n);
    untimed[i]->t_end = chunk.start + span * (static_cast<double>(i + 1) / n);
  }
  return result;
}

inline nlohmann::json to_json(const SESTriplet& t) {
  return {{"temporal_order", t.temporal_order},
          {"pre_state", t.pre_state},
          {"event", t.event},
          {"post_state", t.post_state},
          {"entities", t.entities},
          {"location", t.location},
          {"chunk_id", t.chunk_id},
          {"t_start", t.t_start},
          {"t_end", t.t_end},
          {"explicit_span", t.explicit_span}};
}

inline nlohmann::json to_json(const ExtractionResult& r) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& t : r.triplets) events.push_back(to_json(t));
  return {{"scene_inventory", r.scene_inventory}, {"events", events}};
}

}  // namespace ekg
