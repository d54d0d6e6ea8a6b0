#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace ekg {

// Dual-sentinel segmentation parameters. Thresholds are configured in
// similarity space and converted to distance space (d = 1 - s) where the
// segmenter operates.
struct SegConfig {
  double tau_evt = 0.97;   // event trigger similarity
  double tau_bg = 0.99;    // stable background similarity
  double sigma = 1.0;      // gaussian smoothing std, in frames (0 = identity)
  int patience_m = 2;      // consecutive quiet frames ending a window
  double p_l = 1.0;        // minimum event duration, seconds (exclusive)
  double p_u = 12.0;       // maximum chunk duration, seconds (inclusive)
  double fps_dynamic = 8.0;
  double fps_static = 2.0;

  void validate() const {
    if (!(tau_evt > 0.0 && tau_evt < 1.0) || !(tau_bg > 0.0 && tau_bg < 1.0))
      throw std::invalid_argument("SegConfig: thresholds must lie in (0,1)");
    if (!(tau_evt < tau_bg))
      throw std::invalid_argument("SegConfig: tau_evt must be < tau_bg");
    if (!(p_l > 0.0 && p_l < p_u && p_u <= 12.0))
      throw std::invalid_argument("SegConfig: need 0 < p_l < p_u <= 12.0");
    if (patience_m < 1)
      throw std::invalid_argument("SegConfig: patience_m must be >= 1");
    if (sigma < 0.0)
      throw std::invalid_argument("SegConfig: sigma must be >= 0");
    if (!(fps_dynamic > 0.0) || !(fps_static > 0.0))
      throw std::invalid_argument("SegConfig: sampling fps must be > 0");
  }

  double quiet_threshold() const { return 1.0 - tau_bg; }
  double anchor_threshold() const { return 1.0 - tau_evt; }
};

// Dual-store merge parameters.
struct MemConfig {
  double gamma_ent = 0.85;  // entity merge similarity (strict >)
  double gamma_evt = 0.85;  // state fusion / continuity similarity (strict >)
  std::size_t embed_dim = 64;
};

// Query-time parameters.
struct RetrievalConfig {
  int top_k = 3;
  int max_hops = 2;
  double tau_dup = 0.85;  // prune when S_max > tau_dup
};

enum class BackendKind { Stub, Http };

struct BackendConfig {
  BackendKind kind = BackendKind::Stub;
  std::string endpoint;        // Http only
  std::string model_name;
  double timeout = 30.0;       // seconds
  int max_retries = 2;
  std::string fixture_path;    // Stub extractor / generator fixtures
};

struct EngineConfig {
  SegConfig seg;
  MemConfig mem;
  RetrievalConfig retrieval;
  BackendConfig embedder;
  BackendConfig extractor;
  BackendConfig generator;
};

namespace detail {

inline void read_backend(const nlohmann::json& j, BackendConfig& b) {
  if (j.contains("kind")) {
    const std::string k = j.at("kind").get<std::string>();
    if (k == "stub")
      b.kind = BackendKind::Stub;
    else if (k == "http")
      b.kind = BackendKind::Http;
    else
      throw std::invalid_argument("config: unknown backend kind '" + k + "'");
  }
  b.endpoint = j.value("endpoint", b.endpoint);
  b.model_name = j.value("model", b.model_name);
  b.timeout = j.value("timeout", b.timeout);
  b.max_retries = j.value("max_retries", b.max_retries);
  b.fixture_path = j.value("fixtures", b.fixture_path);
  if (b.kind == BackendKind::Http && b.endpoint.empty())
    throw std::invalid_argument("config: http backend requires an endpoint");
}

}  // namespace detail

// All fields optional; absent fields keep the defaults above.
inline EngineConfig load_config_json(const nlohmann::json& j) {
  EngineConfig c;
  if (j.contains("seg")) {
    const auto& s = j.at("seg");
    c.seg.tau_evt = s.value("tau_evt", c.seg.tau_evt);
    c.seg.tau_bg = s.value("tau_bg", c.seg.tau_bg);
    c.seg.sigma = s.value("sigma", c.seg.sigma);
    c.seg.patience_m = s.value("patience_m", c.seg.patience_m);
    c.seg.p_l = s.value("p_l", c.seg.p_l);
    c.seg.p_u = s.value("p_u", c.seg.p_u);
    c.seg.fps_dynamic = s.value("fps_dynamic", c.seg.fps_dynamic);
    c.seg.fps_static = s.value("fps_static", c.seg.fps_static);
  }
  if (j.contains("mem")) {
    const auto& m = j.at("mem");
    c.mem.gamma_ent = m.value("gamma_ent", c.mem.gamma_ent);
    c.mem.gamma_evt = m.value("gamma_evt", c.mem.gamma_evt);
    c.mem.embed_dim = m.value("embed_dim", c.mem.embed_dim);
  }
  if (j.contains("retrieval")) {
    const auto& r = j.at("retrieval");
    c.retrieval.top_k = r.value("top_k", c.retrieval.top_k);
    c.retrieval.max_hops = r.value("max_hops", c.retrieval.max_hops);
    c.retrieval.tau_dup = r.value("tau_dup", c.retrieval.tau_dup);
  }
  if (j.contains("backends")) {
    const auto& b = j.at("backends");
    if (b.contains("embedder")) detail::read_backend(b.at("embedder"), c.embedder);
    if (b.contains("extractor")) detail::read_backend(b.at("extractor"), c.extractor);
    if (b.contains("generator")) detail::read_backend(b.at("generator"), c.generator);
  }
  c.seg.validate();
  return c;
}

inline EngineConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded())
    throw std::invalid_argument("config: " + path + " is not valid JSON");
  return load_config_json(j);
}

}  // namespace ekg
