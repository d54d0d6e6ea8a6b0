#pragma once

#include <span>
#include <string>
#include <vector>

#include "ekg/abstraction/extract.hpp"
#include "ekg/abstraction/prompt.hpp"
#include "ekg/backends/backend.hpp"
#include "ekg/memory/store.hpp"
#include "ekg/sentinel/segmenter.hpp"

namespace ekg {

struct IngestReport {
  std::size_t chunks = 0;
  std::size_t dynamic_chunks = 0;
  std::size_t static_chunks = 0;
  std::size_t triplets = 0;
  std::vector<std::string> warnings;
};

// Commits chunks in order: dynamic chunks are extracted and their triplets
// upserted; static backgrounds contribute no triplets. Extraction of distinct
// chunks could run concurrently, but commits stay serialized in chunk order
// for replay determinism.
inline IngestReport ingest_chunks(EKGStore& store, std::span<const EventChunk> chunks,
                                  TripletExtractor& extractor, Embedder& embedder) {
  IngestReport rep;
  for (const auto& c : chunks) {
    ++rep.chunks;
    if (c.kind == ChunkKind::StaticBackground) {
      ++rep.static_chunks;
      continue;
    }
    ++rep.dynamic_chunks;
    const ExtractionRequest req = make_extraction_request(c);
    const std::string raw = extractor.extract_triplets(req);
    const ExtractionResult res = triplet_timestamps(parse_extraction(raw, c), c);
    for (const auto& w : res.warnings) rep.warnings.push_back(c.id + ": " + w);
    for (const auto& t : res.triplets) {
      store.upsert_triplet(t, embedder);
      ++rep.triplets;
    }
  }
  return rep;
}

}  // namespace ekg
