#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ekg/backends/backend.hpp"
#include "ekg/core/vec.hpp"

namespace ekg {

// Deterministic bag-of-tokens embedder: lowercase, split on non-alphanumerics,
// hash each token into one of dim buckets, accumulate counts, normalize.
// Empty text maps to basis vector 0.
class StubEmbedder final : public Embedder {
 public:
  explicit StubEmbedder(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) throw std::invalid_argument("StubEmbedder: dim must be > 0");
  }

  std::vector<double> embed_text(const std::string& text) override {
    std::vector<double> v(dim_, 0.0);
    bool any = false;
    std::string tok;
    auto flush = [&] {
      if (tok.empty()) return;
      v[fnv1a64(tok) % dim_] += 1.0;
      any = true;
      tok.clear();
    };
    for (unsigned char c : text) {
      if (std::isalnum(c))
        tok.push_back(static_cast<char>(std::tolower(c)));
      else
        flush();
    }
    flush();
    if (!any) {
      v[0] = 1.0;
      return v;
    }
    return normalize(std::move(v));
  }

  std::size_t dim() const override { return dim_; }

 private:
  std::size_t dim_;
};

// Replays canned replies keyed by chunk id; the fixture file is a JSON map
// {"<chunk_id>": "<raw reply>", ...}.
class FixtureExtractor final : public TripletExtractor {
 public:
  explicit FixtureExtractor(std::map<std::string, std::string> replies)
      : replies_(std::move(replies)) {}

  static FixtureExtractor from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
      throw BackendError(BackendErrorKind::NoFixture,
                         "fixture file not readable: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw BackendError(BackendErrorKind::NoFixture,
                         "fixture file is not a JSON object: " + path);
    std::map<std::string, std::string> replies;
    for (const auto& [k, val] : j.items()) {
      if (val.is_string())
        replies[k] = val.get<std::string>();
      else
        replies[k] = val.dump();  // allow inline JSON replies
    }
    return FixtureExtractor(std::move(replies));
  }

  std::string extract_triplets(const ExtractionRequest& request) override {
    const auto it = replies_.find(request.chunk.id);
    if (it == replies_.end())
      throw BackendError(BackendErrorKind::NoFixture,
                         "no fixture reply for chunk " + request.chunk.id);
    return it->second;
  }

 private:
  std::map<std::string, std::string> replies_;
};

// Extracts the question block ({q} slot) from a QA prompt; falls back to the
// whole prompt when the markers are absent.
inline std::string question_block_of(const std::string& prompt) {
  const std::string open = "### [Question & Choices]\n";
  const std::string close = "\n\n### [Decision Rules]";
  const auto a = prompt.find(open);
  if (a == std::string::npos) return prompt;
  const auto b = prompt.find(close, a + open.size());
  if (b == std::string::npos) return prompt;
  return prompt.substr(a + open.size(), b - a - open.size());
}

// Scripted replies keyed by the FNV-1a-64 hex of the prompt's question block;
// a "default" entry answers anything unscripted.
class ScriptedGenerator final : public AnswerGenerator {
 public:
  explicit ScriptedGenerator(std::map<std::string, std::string> script)
      : script_(std::move(script)) {}

  static ScriptedGenerator from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
      throw BackendError(BackendErrorKind::NoFixture,
                         "script file not readable: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw BackendError(BackendErrorKind::NoFixture,
                         "script file is not a JSON object: " + path);
    std::map<std::string, std::string> script;
    for (const auto& [k, val] : j.items()) script[k] = val.get<std::string>();
    return ScriptedGenerator(std::move(script));
  }

  static std::string key_for_question(const std::string& question_block) {
    return fnv1a64_hex(question_block);
  }

  std::string generate_answer(const std::string& prompt,
                              const std::vector<std::string>&) override {
    const std::string key = key_for_question(question_block_of(prompt));
    auto it = script_.find(key);
    if (it != script_.end()) return it->second;
    it = script_.find("default");
    if (it != script_.end()) return it->second;
    throw BackendError(BackendErrorKind::NoFixture,
                       "no scripted reply for question key " + key);
  }

 private:
  std::map<std::string, std::string> script_;
};

}  // namespace ekg
