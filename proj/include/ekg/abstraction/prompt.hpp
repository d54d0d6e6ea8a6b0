#pragma once

#include <string>

#include "ekg/core/types.hpp"

namespace ekg {

// Fixed two-part template sent to the vision extractor backend.
// {start_time}, {end_time} and {audio_context} are the only moving parts;
// the golden tests pin the byte-exact rendering.
inline constexpr const char* kExtractionPromptTemplate =
    "[SYSTEM PROMPT]\n"
    "You are a state-of-the-art Video-to-Graph Parser designed for high-fidelity "
    "Event-Causal Reasoning.\n"
    "[Strict Graph Construction Rules]:\n"
    "1. Task-Level Physical Actions (The 'Goldilocks' Granularity): Describe "
    "specific, observable physical tasks and object interactions...\n"
    " - DO NOT use vague umbrella terms (e.g., 'performing').\n"
    " - DO NOT over-decompose into meaningless joint kinematics.\n"
    "2. Visual Attribute Injection (CRITICAL): NEVER use generic IDs or pronouns. "
    "You MUST refer to entities by distinct visual attributes (e.g., write 'The "
    "man in the black t-shirt', NOT 'E1').\n"
    "3. Micro-Detail Exhaustion: Capture secondary background events, holding "
    "props, and screen text.\n"
    "4. Direct Visual Evidence (CRITICAL): Preserve only directly visible "
    "evidence. If text is blurry or uncertain, output an empty string.\n"
    "5. Strict Causality: An 'Event' is a directed edge bridging a 'Pre-State' "
    "and 'Post-State'.\n"
    "6. Output Format: Output ONLY pure JSON.\n"
    "\n"
    "[USER PROMPT TEMPLATE]\n"
    "Target Timestamp: {start_time} - {end_time}.\n"
    "{audio_context}\n"
    "Task: Deconstruct this clip into a chronological causal graph.\n"
    "Step 1: Inventory ALL interacting entities, detailing visual attributes.\n"
    "Step 2: Map the specific, task-level physical actions.\n"
    "Step 3: Preserve direct visual evidence useful for downstream QA.\n"
    "Step 4: If any text is unreadable, write an empty string.\n"
    "[Mandatory JSON Schema]: {scene_inventory: [...], events: [...]}";

namespace detail {

inline void replace_first(std::string& s, const std::string& from,
                          const std::string& to) {
  const auto pos = s.find(from);
  if (pos != std::string::npos) s.replace(pos, from.size(), to);
}

}  // namespace detail

// Concatenated transcript text, verbatim, space-joined; empty when the chunk
// carries no speech.
inline std::string audio_context_of(const EventChunk& chunk) {
  std::string out;
  for (const auto& isl : chunk.transcript) {
    if (!out.empty()) out += ' ';
    out += isl.text;
  }
  return out;
}

inline std::string build_extraction_prompt(const EventChunk& chunk) {
  std::string p = kExtractionPromptTemplate;
  detail::replace_first(p, "{start_time}", format_seconds(chunk.start));
  detail::replace_first(p, "{end_time}", format_seconds(chunk.end));
  detail::replace_first(p, "{audio_context}", audio_context_of(chunk));
  return p;
}

// What the extractor backend receives for one chunk.
struct ExtractionRequest {
  EventChunk chunk;
  std::string audio_context;
  std::string prompt;
};

inline ExtractionRequest make_extraction_request(const EventChunk& chunk) {
  ExtractionRequest r;
  r.chunk = chunk;
  r.audio_context = audio_context_of(chunk);
  r.prompt = build_extraction_prompt(chunk);
  return r;
}

}  // namespace ekg
