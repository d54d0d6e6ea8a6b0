#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ekg/core/errors.hpp"
#include "ekg/core/types.hpp"
#include "ekg/core/vec.hpp"

namespace ekg {

// JSON-lines wire formats.
//   frames:  {"t": <seconds>, "v": [<d floats>]}
//   speech:  {"start": <s>, "end": <s>, "text": "<verbatim>"}
//   chunks:  {"id", "kind", "start", "end", "sampled_ts", "transcript"}

namespace detail {

inline nlohmann::json parse_line(const std::string& line, const std::string& what,
                                 std::size_t lineno) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw StoreError(what + ": line " + std::to_string(lineno) +
                     ": not a JSON object");
  return j;
}

}  // namespace detail

// Reads frame embeddings; vectors are normalized here (module boundary).
// Throws StoreError naming the first bad line.
inline std::vector<FrameEmbedding> read_frames_jsonl(std::istream& in,
                                                     const std::string& name = "frames") {
  std::vector<FrameEmbedding> out;
  std::string line;
  std::size_t lineno = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = detail::parse_line(line, name, lineno);
    if (!j.contains("t") || !j.contains("v") || !j["v"].is_array())
      throw StoreError(name + ": line " + std::to_string(lineno) +
                       ": expected {\"t\", \"v\"}");
    FrameEmbedding f;
    f.t = j["t"].get<double>();
    f.v = j["v"].get<std::vector<double>>();
    if (dim == 0) dim = f.v.size();
    if (f.v.empty() || f.v.size() != dim)
      throw StoreError(name + ": line " + std::to_string(lineno) +
                       ": embedding dimension mismatch");
    try {
      f.v = normalize(std::move(f.v));
    } catch (const std::invalid_argument&) {
      throw StoreError(name + ": line " + std::to_string(lineno) + ": zero vector");
    }
    if (!out.empty() && !(f.t > out.back().t))
      throw StoreError(name + ": line " + std::to_string(lineno) +
                       ": timestamps must be strictly increasing");
    out.push_back(std::move(f));
  }
  return out;
}

inline std::vector<SpeechIsland> read_speech_jsonl(std::istream& in,
                                                   const std::string& name = "speech") {
  std::vector<SpeechIsland> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = detail::parse_line(line, name, lineno);
    if (!j.contains("start") || !j.contains("end") || !j.contains("text"))
      throw StoreError(name + ": line " + std::to_string(lineno) +
                       ": expected {\"start\", \"end\", \"text\"}");
    SpeechIsland s;
    s.start = j["start"].get<double>();
    s.end = j["end"].get<double>();
    s.text = j["text"].get<std::string>();
    if (!(s.start < s.end) || s.text.empty())
      throw StoreError(name + ": line " + std::to_string(lineno) +
                       ": need start < end and non-empty text");
    out.push_back(std::move(s));
  }
  return out;
}

inline nlohmann::json to_json(const SpeechIsland& s) {
  return {{"start", s.start}, {"end", s.end}, {"text", s.text}};
}

inline nlohmann::json to_json(const EventChunk& c) {
  nlohmann::json tr = nlohmann::json::array();
  for (const auto& s : c.transcript) tr.push_back(to_json(s));
  return {{"id", c.id},
          {"kind", to_string(c.kind)},
          {"start", c.start},
          {"end", c.end},
          {"sampled_ts", c.sampled_ts},
          {"transcript", tr}};
}

inline EventChunk chunk_from_json(const nlohmann::json& j) {
  EventChunk c;
  c.id = j.at("id").get<std::string>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "DynamicEvent")
    c.kind = ChunkKind::DynamicEvent;
  else if (kind == "StaticBackground")
    c.kind = ChunkKind::StaticBackground;
  else
    throw StoreError("chunk: unknown kind '" + kind + "'");
  c.start = j.at("start").get<double>();
  c.end = j.at("end").get<double>();
  c.sampled_ts = j.at("sampled_ts").get<std::vector<double>>();
  for (const auto& s : j.at("transcript")) {
    SpeechIsland isl;
    isl.start = s.at("start").get<double>();
    isl.end = s.at("end").get<double>();
    isl.text = s.at("text").get<std::string>();
    c.transcript.push_back(std::move(isl));
  }
  return c;
}

inline std::vector<EventChunk> read_chunks_jsonl(std::istream& in,
                                                 const std::string& name = "chunks") {
  std::vector<EventChunk> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = detail::parse_line(line, name, lineno);
    try {
      out.push_back(chunk_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw StoreError(name + ": line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline void write_chunks_jsonl(std::ostream& out, const std::vector<EventChunk>& chunks) {
  for (const auto& c : chunks) out << to_json(c).dump() << '\n';
}

}  // namespace ekg
