#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ekg/backends/backend.hpp"
#include "ekg/core/config.hpp"
#include "ekg/core/errors.hpp"
#include "ekg/core/types.hpp"
#include "ekg/core/vec.hpp"
#include "ekg/memory/store.hpp"

namespace ekg {

struct ContextEntry {
  std::string id;
  double t_start = 0.0;
  double t_end = 0.0;
  std::string text;
};

struct PrunedNode {
  std::string id;
  double s_max = 0.0;
};

// Chronologically ordered, deduplicated context. kept_embeddings is the
// M_seen set; pairwise cosine among kept embeddings stays <= tau_dup.
struct RetrievalContext {
  std::vector<ContextEntry> entries;
  std::vector<std::vector<double>> kept_embeddings;
  std::vector<PrunedNode> pruned;
};

struct Answer {
  std::optional<int> option;  // multiple-choice mode, 0..4
  std::string text;           // open mode
  std::string raw;
};

struct RetrievalTrace {
  std::vector<std::string> anchors;
  std::vector<std::string> walked;
  std::vector<std::string> kept;
  std::vector<PrunedNode> pruned;
  std::string prompt;
  std::string answer_raw;
  std::vector<std::string> chunk_ids;  // clips a caller may attach as evidence
};

// Entry anchoring: top-k most similar nodes to the question embedding.
// On exact similarity ties Event nodes outrank State/Entity, then older
// insertions win.
inline std::vector<std::string> anchor(const std::string& question, Embedder& embed,
                                       const EKGStore& store,
                                       const RetrievalConfig& cfg) {
  if (store.empty())
    throw RetrievalError(RetrievalErrorKind::EmptyStore, "store has no nodes");
  const std::vector<double> q = embed.embed_text(question);
  auto scored = store.scan_scored(q);
  std::sort(scored.begin(), scored.end(),
            [](const EKGStore::ScoredNode& a, const EKGStore::ScoredNode& b) {
              if (a.sim != b.sim) return a.sim > b.sim;
              const bool ae = a.kind == NodeKind::Event;
              const bool be = b.kind == NodeKind::Event;
              if (ae != be) return ae;
              return a.counter < b.counter;
            });
  const std::size_t k = std::min<std::size_t>(
      scored.size(), cfg.top_k > 0 ? static_cast<std::size_t>(cfg.top_k) : 0);
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(scored[i].id);
  return out;
}

// Flattens a walked node set chronologically by physical timestamps
// (ties by insertion counter). Entity nodes carry no temporal extent and are
// excluded; their names stay inside the event texts.
inline std::vector<EKGNode> flatten_chronological(const std::vector<std::string>& ids,
                                                  const EKGStore& store) {
  std::vector<EKGNode> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    EKGNode n = store.node(id);
    if (n.kind == NodeKind::Entity) continue;
    out.push_back(std::move(n));
  }
  std::sort(out.begin(), out.end(), [](const EKGNode& a, const EKGNode& b) {
    if (a.t_start != b.t_start) return a.t_start < b.t_start;
    return a.counter < b.counter;
  });
  return out;
}

// Single-pass semantic deduplication: a node is kept iff its maximum cosine
// against everything already kept is <= tau_dup (first seen wins under
// chronological order); kept embeddings join M_seen.
inline RetrievalContext dedup(const std::vector<EKGNode>& ordered, Embedder& embed,
                              double tau_dup) {
  RetrievalContext ctx;
  for (const auto& n : ordered) {
    const std::vector<double> e = embed.embed_text(n.text);
    double s_max = 0.0;
    bool first = ctx.kept_embeddings.empty();
    for (const auto& kept : ctx.kept_embeddings)
      s_max = std::max(s_max, dot(kept, e));
    if (first || s_max <= tau_dup) {
      ctx.entries.push_back({n.id, n.t_start, n.t_end, n.text});
      ctx.kept_embeddings.push_back(e);
    } else {
      ctx.pruned.push_back({n.id, s_max});
    }
  }
  return ctx;
}

// One line per kept entry: "[t_start–t_end] <text>", chronological.
inline std::string assemble_context(const RetrievalContext& ctx) {
  std::string out;
  for (const auto& e : ctx.entries) {
    if (!out.empty()) out += '\n';
    out += '[' + format_seconds(e.t_start) + "–" + format_seconds(e.t_end) +
           "] " + e.text;
  }
  return out;
}

// Fixed QA template; {q} and {ctx} are the only moving parts. The golden
// tests pin the byte-exact rendering.
inline constexpr const char* kQaPromptTemplate =
    "You must answer a multiple-choice question about the attached original "
    "video.\n"
    "Choose exactly one option index from 0 to 4.\n"
    "\n"
    "### [Question & Choices]\n"
    "{q}\n"
    "\n"
    "### [Decision Rules]\n"
    "1) Use the original video frames as the primary evidence.\n"
    "2) Use the retrieved graph memory as complementary evidence from the same "
    "video.\n"
    "3) Compare all five options against the visible action, object, person, "
    "and purpose.\n"
    "4) If video evidence and graph memory disagree, prefer the directly "
    "visible video evidence.\n"
    "5) If evidence is incomplete, make the best forced choice from the "
    "available options.\n"
    "\n"
    "### [Retrieved RAG Memory]\n"
    "The following graph memory was extracted from the same video and may help "
    "identify temporal actions, objects, participants, and causal context.\n"
    "{ctx}\n"
    "\n"
    "Output exactly one line and nothing else: [FINAL ANSWER: X]";

inline std::string build_qa_prompt(const std::string& question_block,
                                   const std::string& ctx_text) {
  std::string p = kQaPromptTemplate;
  const auto qpos = p.find("{q}");
  p.replace(qpos, 3, question_block);
  const auto cpos = p.find("{ctx}");
  p.replace(cpos, 5, ctx_text);
  return p;
}

// Extracts the last "[FINAL ANSWER: X]" occurrence. In multiple-choice mode X
// must parse as an integer in [0, 4]; open mode passes the reply through.
inline Answer parse_answer(const std::string& raw, bool multiple_choice = true) {
  if (!multiple_choice) return Answer{std::nullopt, raw, raw};
  const std::string marker = "[FINAL ANSWER:";
  const auto pos = raw.rfind(marker);
  if (pos == std::string::npos)
    throw AnswerError(AnswerErrorKind::Unparsable, "no [FINAL ANSWER: X] line");
  const auto close = raw.find(']', pos + marker.size());
  if (close == std::string::npos)
    throw AnswerError(AnswerErrorKind::Unparsable, "unterminated [FINAL ANSWER: X]");
  std::string inner = raw.substr(pos + marker.size(), close - pos - marker.size());
  const auto first = inner.find_first_not_of(" \t");
  const auto last = inner.find_last_not_of(" \t");
  if (first == std::string::npos)
    throw AnswerError(AnswerErrorKind::Unparsable, "empty answer slot");
  inner = inner.substr(first, last - first + 1);
  std::size_t i = inner[0] == '-' || inner[0] == '+' ? 1 : 0;
  if (i == inner.size())
    throw AnswerError(AnswerErrorKind::Unparsable, "answer is not an integer");
  for (std::size_t p2 = i; p2 < inner.size(); ++p2)
    if (!std::isdigit(static_cast<unsigned char>(inner[p2])))
      throw AnswerError(AnswerErrorKind::Unparsable, "answer is not an integer");
  const long v = std::stol(inner);
  if (v < 0 || v > 4)
    throw AnswerError(AnswerErrorKind::OutOfRange,
                      "option index " + inner + " outside 0..4");
  Answer a;
  a.option = static_cast<int>(v);
  a.text = inner;
  a.raw = raw;
  return a;
}

// Full query pipeline: anchor -> bidirectional walk -> chronological flatten
// -> dedup -> context -> QA prompt -> generator -> parse. The trace records
// the walked set, pruning decisions, the final prompt and the chunk ids whose
// clips a caller can attach to the generator request.
inline std::pair<Answer, RetrievalTrace> answer_question(const std::string& question,
                                                         const EKGStore& store,
                                                         const Backends& backends,
                                                         const RetrievalConfig& cfg,
                                                         bool multiple_choice = true) {
  RetrievalTrace trace;
  trace.anchors = anchor(question, *backends.embedder, store, cfg);
  trace.walked = store.neighbors_within(trace.anchors, cfg.max_hops);
  const auto flat = flatten_chronological(trace.walked, store);
  RetrievalContext ctx = dedup(flat, *backends.embedder, cfg.tau_dup);
  trace.pruned = ctx.pruned;
  for (const auto& e : ctx.entries) trace.kept.push_back(e.id);
  for (const auto& e : ctx.entries) {
    for (const auto& ch : store.node(e.id).source_chunks) {
      if (std::find(trace.chunk_ids.begin(), trace.chunk_ids.end(), ch) ==
          trace.chunk_ids.end())
        trace.chunk_ids.push_back(ch);
    }
  }
  trace.prompt = build_qa_prompt(question, assemble_context(ctx));
  trace.answer_raw = backends.generator->generate_answer(trace.prompt, trace.chunk_ids);
  Answer ans = parse_answer(trace.answer_raw, multiple_choice);
  return {std::move(ans), std::move(trace)};
}

inline nlohmann::json to_json(const RetrievalTrace& t) {
  nlohmann::json pruned = nlohmann::json::array();
  for (const auto& p : t.pruned) pruned.push_back({{"id", p.id}, {"s_max", p.s_max}});
  return {{"anchors", t.anchors},   {"walked", t.walked},
          {"kept", t.kept},         {"pruned", pruned},
          {"prompt", t.prompt},     {"answer", t.answer_raw},
          {"chunk_ids", t.chunk_ids}};
}

}  // namespace ekg
