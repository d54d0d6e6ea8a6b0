#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ekg/abstraction/prompt.hpp"
#include "ekg/core/errors.hpp"

namespace ekg {

// Model-access layer: text embedder, triplet extractor, answer generator.
// Each has a wire-protocol client and a deterministic offline stub; the whole
// engine runs against the stubs with no network.

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed_text(const std::string& text) = 0;
  virtual std::size_t dim() const = 0;
};

class TripletExtractor {
 public:
  virtual ~TripletExtractor() = default;
  // Returns the backend's raw textual reply for the chunk.
  virtual std::string extract_triplets(const ExtractionRequest& request) = 0;
};

class AnswerGenerator {
 public:
  virtual ~AnswerGenerator() = default;
  // chunk_ids reference the clips a caller may attach as visual evidence.
  virtual std::string generate_answer(const std::string& prompt,
                                      const std::vector<std::string>& chunk_ids) = 0;
};

struct Backends {
  std::shared_ptr<Embedder> embedder;
  std::shared_ptr<TripletExtractor> extractor;
  std::shared_ptr<AnswerGenerator> generator;
};

}  // namespace ekg
