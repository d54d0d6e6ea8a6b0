#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <chrono>
#include <thread>

#include <httplib.h>

#include "ekg/abstraction/extract.hpp"
#include "ekg/backends/http.hpp"

namespace {

struct MockServer {
  httplib::Server svr;
  std::thread worker;
  int port = 0;
  std::atomic<int> requests{0};

  void start() {
    port = svr.bind_to_any_port("127.0.0.1");
    worker = std::thread([this] { svr.listen_after_bind(); });
    svr.wait_until_ready();
  }

  ~MockServer() {
    svr.stop();
    if (worker.joinable()) worker.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port); }
};

ekg::BackendConfig http_config(const std::string& endpoint, double timeout = 5.0,
                               int retries = 1) {
  ekg::BackendConfig cfg;
  cfg.kind = ekg::BackendKind::Http;
  cfg.endpoint = endpoint;
  cfg.model_name = "test-model";
  cfg.timeout = timeout;
  cfg.max_retries = retries;
  return cfg;
}

}  // namespace

TEST_CASE("http embedder round trip with dimension check") {
  MockServer mock;
  mock.svr.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
    ++mock.requests;
    const auto body = nlohmann::json::parse(req.body);
    REQUIRE(body.at("model") == "test-model");
    REQUIRE(body.at("input") == "door closed");
    res.set_content(R"({"output": [3.0, 4.0]})", "application/json");
  });
  mock.start();

  ekg::HttpEmbedder emb(http_config(mock.endpoint()), 2);
  const auto v = emb.embed_text("door closed");
  CHECK(v == std::vector<double>{0.6, 0.8});  // normalized on receipt

  ekg::HttpEmbedder wrong(http_config(mock.endpoint()), 3);
  try {
    wrong.embed_text("door closed");
    FAIL("expected Dim error");
  } catch (const ekg::BackendError& e) {
    CHECK(e.kind() == ekg::BackendErrorKind::Dim);
  }
}

TEST_CASE("http extractor reply parses downstream into triplets") {
  const std::string reply =
      R"({"scene_inventory":["pan","cook in apron"],"events":[)"
      R"({"temporal_order":1,"pre_state":"pan empty","event":"cook in apron pours batter","post_state":"pan holds batter","entities":["pan"]},)"
      R"({"temporal_order":2,"pre_state":"pan holds batter","event":"cook in apron flips pancake","post_state":"pancake browned","entities":["pan"]}]})";
  MockServer mock;
  mock.svr.Post("/generate", [&](const httplib::Request& req, httplib::Response& res) {
    ++mock.requests;
    const auto body = nlohmann::json::parse(req.body);
    REQUIRE(body.contains("messages"));
    REQUIRE(body.at("attachments").is_array());
    nlohmann::json out = {{"output", reply}};
    res.set_content(out.dump(), "application/json");
  });
  mock.start();

  ekg::EventChunk chunk;
  chunk.id = "c0";
  chunk.kind = ekg::ChunkKind::DynamicEvent;
  chunk.start = 0.0;
  chunk.end = 8.0;
  chunk.sampled_ts = {0.0, 0.125};

  ekg::HttpExtractor ext(http_config(mock.endpoint()));
  const std::string raw = ext.extract_triplets(ekg::make_extraction_request(chunk));
  const auto res = ekg::parse_extraction(raw, chunk);
  REQUIRE(res.triplets.size() == 2);
  CHECK(res.triplets[1].event == "cook in apron flips pancake");
}

TEST_CASE("http generator round trip") {
  MockServer mock;
  mock.svr.Post("/generate", [&](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    REQUIRE(body.at("attachments") == nlohmann::json::array({"c0", "c3"}));
    res.set_content(R"({"output": "[FINAL ANSWER: 2]"})", "application/json");
  });
  mock.start();
  ekg::HttpGenerator gen(http_config(mock.endpoint()));
  CHECK(gen.generate_answer("prompt", {"c0", "c3"}) == "[FINAL ANSWER: 2]");
}

TEST_CASE("transport failures surface after max_retries attempts") {
  MockServer mock;
  mock.svr.Post("/generate", [&](const httplib::Request&, httplib::Response& res) {
    ++mock.requests;
    std::this_thread::sleep_for(std::chrono::milliseconds(1500));
    res.set_content(R"({"output": "late"})", "application/json");
  });
  mock.start();

  ekg::HttpGenerator gen(http_config(mock.endpoint(), /*timeout=*/0.2, /*retries=*/1));
  try {
    gen.generate_answer("p", {});
    FAIL("expected Transport error");
  } catch (const ekg::BackendError& e) {
    CHECK(e.kind() == ekg::BackendErrorKind::Transport);
  }
  CHECK(mock.requests.load() == 2);  // initial attempt + one retry
}
