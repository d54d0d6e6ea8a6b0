#pragma once

#include <chrono>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "ekg/backends/backend.hpp"
#include "ekg/core/config.hpp"
#include "ekg/core/vec.hpp"

namespace ekg {

// Minimal chat-completion-style wire protocol:
//   POST /embed     {"model", "input"}                     -> {"output": [f...]}
//   POST /generate  {"model", "messages", "attachments"}   -> {"output": "text"}
// Frame/clip attachments travel as opaque references; pixels never enter the
// engine.

namespace detail {

class HttpJsonClient {
 public:
  explicit HttpJsonClient(const BackendConfig& cfg) : cfg_(cfg) {
    if (cfg_.endpoint.empty())
      throw BackendError(BackendErrorKind::Transport, "http backend has no endpoint");
  }

  nlohmann::json post(const std::string& path, const nlohmann::json& body) const {
    const std::string payload = body.dump();
    std::string last_err = "no attempt made";
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      httplib::Client cli(cfg_.endpoint);
      const auto to = std::chrono::milliseconds(
          static_cast<long long>(cfg_.timeout * 1000.0));
      cli.set_connection_timeout(to);
      cli.set_read_timeout(to);
      cli.set_write_timeout(to);
      auto res = cli.Post(path, payload, "application/json");
      if (!res) {
        last_err = "transport failure: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        last_err = "http status " + std::to_string(res->status);
        continue;
      }
      nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
      if (j.is_discarded()) {
        last_err = "response body is not JSON";
        continue;
      }
      return j;
    }
    throw BackendError(BackendErrorKind::Transport,
                       "POST " + cfg_.endpoint + path + " failed after " +
                           std::to_string(cfg_.max_retries + 1) +
                           " attempts: " + last_err);
  }

  const BackendConfig& config() const { return cfg_; }

 private:
  BackendConfig cfg_;
};

}  // namespace detail

class HttpEmbedder final : public Embedder {
 public:
  HttpEmbedder(const BackendConfig& cfg, std::size_t expected_dim)
      : client_(cfg), dim_(expected_dim) {}

  std::vector<double> embed_text(const std::string& text) override {
    const nlohmann::json req = {{"model", client_.config().model_name},
                                {"input", text}};
    const nlohmann::json rsp = client_.post("/embed", req);
    if (!rsp.contains("output") || !rsp["output"].is_array())
      throw BackendError(BackendErrorKind::Transport,
                         "embed response lacks an \"output\" array");
    auto v = rsp["output"].get<std::vector<double>>();
    if (dim_ != 0 && v.size() != dim_)
      throw BackendError(BackendErrorKind::Dim,
                         "embedding dim " + std::to_string(v.size()) +
                             " != expected " + std::to_string(dim_));
    if (dim_ == 0) dim_ = v.size();
    return normalize(std::move(v));
  }

  std::size_t dim() const override { return dim_; }

 private:
  detail::HttpJsonClient client_;
  std::size_t dim_;
};

class HttpExtractor final : public TripletExtractor {
 public:
  explicit HttpExtractor(const BackendConfig& cfg) : client_(cfg) {}

  std::string extract_triplets(const ExtractionRequest& request) override {
    nlohmann::json attachments = nlohmann::json::array();
    for (double t : request.chunk.sampled_ts)
      attachments.push_back({{"chunk_id", request.chunk.id}, {"t", t}});
    const nlohmann::json req = {
        {"model", client_.config().model_name},
        {"messages",
         nlohmann::json::array(
             {nlohmann::json{{"role", "user"}, {"content", request.prompt}}})},
        {"attachments", attachments}};
    return text_output(client_.post("/generate", req));
  }

 private:
  static std::string text_output(const nlohmann::json& rsp) {
    if (!rsp.contains("output") || !rsp["output"].is_string())
      throw BackendError(BackendErrorKind::Transport,
                         "generate response lacks an \"output\" string");
    return rsp["output"].get<std::string>();
  }

  detail::HttpJsonClient client_;
};

class HttpGenerator final : public AnswerGenerator {
 public:
  explicit HttpGenerator(const BackendConfig& cfg) : client_(cfg) {}

  std::string generate_answer(const std::string& prompt,
                              const std::vector<std::string>& chunk_ids) override {
    const nlohmann::json req = {
        {"model", client_.config().model_name},
        {"messages",
         nlohmann::json::array(
             {nlohmann::json{{"role", "user"}, {"content", prompt}}})},
        {"attachments", chunk_ids}};
    const nlohmann::json rsp = client_.post("/generate", req);
    if (!rsp.contains("output") || !rsp["output"].is_string())
      throw BackendError(BackendErrorKind::Transport,
                         "generate response lacks an \"output\" string");
    return rsp["output"].get<std::string>();
  }

 private:
  detail::HttpJsonClient client_;
};

}  // namespace ekg
