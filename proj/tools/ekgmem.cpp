// ekgmem: operator surface for the event-causal memory engine.
// Subcommands: segment, ingest, query, stats, export.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 backend error.

#include <fcntl.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ekg/backends/http.hpp"
#include "ekg/ekg.hpp"

namespace fs = std::filesystem;

namespace {

// Advisory single-ingest lock: one ingest process per store at a time.
class LockFile {
 public:
  explicit LockFile(const fs::path& store_dir) {
    fs::create_directories(store_dir);
    path_ = store_dir / ".lock";
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0)
      throw ekg::StoreError("store is locked by another ingest (" + path_.string() +
                            " exists)");
  }
  ~LockFile() {
    if (fd_ >= 0) {
      ::close(fd_);
      ::unlink(path_.c_str());
    }
  }

 private:
  fs::path path_;
  int fd_ = -1;
};

struct Options {
  std::string config;
  std::string frames;
  std::string speech;
  std::string out;
  std::string store;
  std::string backend = "stub";
  std::string fixtures;
  std::string script;
  std::string question;
  std::string trace;
  std::string format = "jsonl";
  int topk = -1;
  int hops = -1;
  double taudup = -1.0;
  double fixed_chunk = 0.0;
  bool no_dedup = false;
  bool open_mode = false;
};

ekg::EngineConfig load_config(const Options& opt) {
  std::string path = opt.config;
  if (path.empty())
    if (const char* env = std::getenv("EKG_CONFIG")) path = env;
  ekg::EngineConfig cfg = path.empty() ? ekg::EngineConfig{} : ekg::load_config_file(path);
  if (const char* ep = std::getenv("EKG_ENDPOINT")) {
    cfg.embedder.endpoint = ep;
    cfg.extractor.endpoint = ep;
    cfg.generator.endpoint = ep;
  }
  if (const char* mn = std::getenv("EKG_MODEL")) {
    cfg.embedder.model_name = mn;
    cfg.extractor.model_name = mn;
    cfg.generator.model_name = mn;
  }
  return cfg;
}

std::vector<ekg::FrameEmbedding> read_frames(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ekg::StoreError("cannot open frames file " + path);
  return ekg::read_frames_jsonl(in, path);
}

std::vector<ekg::SpeechIsland> read_speech(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw ekg::StoreError("cannot open speech file " + path);
  return ekg::read_speech_jsonl(in, path);
}

// --fixed-chunk ablation: mechanical fixed-length partition, no sentinel.
std::vector<ekg::EventChunk> fixed_chunks(const std::vector<ekg::FrameEmbedding>& frames,
                                          const std::vector<ekg::SpeechIsland>& islands,
                                          double len, const ekg::SegConfig& seg) {
  std::vector<ekg::EventChunk> out;
  if (frames.size() < 2) return out;
  const double t0 = frames.front().t;
  const double t1 = frames.back().t;
  std::size_t seq = 0;
  for (std::size_t i = 0;; ++i) {
    const double s = t0 + static_cast<double>(i) * len;
    if (!(s < t1)) break;
    const double e = std::min(s + len, t1);
    ekg::EventChunk c;
    c.id = "c" + std::to_string(seq++);
    c.kind = ekg::ChunkKind::DynamicEvent;
    c.start = s;
    c.end = e;
    for (std::size_t k = 0;; ++k) {
      const double t = s + static_cast<double>(k) / seg.fps_dynamic;
      if (!(t < e)) break;
      c.sampled_ts.push_back(t);
    }
    for (const auto& isl : islands)
      if (isl.start < e && isl.end > s) c.transcript.push_back(isl);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<ekg::EventChunk> run_segmentation(const Options& opt,
                                              const ekg::EngineConfig& cfg) {
  const auto frames = read_frames(opt.frames);
  const auto islands = read_speech(opt.speech);
  if (opt.fixed_chunk > 0.0) return fixed_chunks(frames, islands, opt.fixed_chunk, cfg.seg);
  return ekg::segment_stream(frames, islands, cfg.seg);
}

std::shared_ptr<ekg::Embedder> make_embedder(const Options& opt,
                                             const ekg::EngineConfig& cfg,
                                             std::size_t dim) {
  if (opt.backend == "http" || cfg.embedder.kind == ekg::BackendKind::Http) {
    ekg::BackendConfig bc = cfg.embedder;
    bc.kind = ekg::BackendKind::Http;
    return std::make_shared<ekg::HttpEmbedder>(bc, dim);
  }
  return std::make_shared<ekg::StubEmbedder>(dim);
}

std::shared_ptr<ekg::TripletExtractor> make_extractor(const Options& opt,
                                                      const ekg::EngineConfig& cfg) {
  if (opt.backend == "http" || cfg.extractor.kind == ekg::BackendKind::Http) {
    ekg::BackendConfig bc = cfg.extractor;
    bc.kind = ekg::BackendKind::Http;
    return std::make_shared<ekg::HttpExtractor>(bc);
  }
  std::string fixtures = opt.fixtures.empty() ? cfg.extractor.fixture_path : opt.fixtures;
  if (fixtures.empty())
    throw ekg::BackendError(ekg::BackendErrorKind::NoFixture,
                            "stub extractor needs --fixtures <chunk-id -> reply JSON>");
  return std::make_shared<ekg::FixtureExtractor>(ekg::FixtureExtractor::from_file(fixtures));
}

std::shared_ptr<ekg::AnswerGenerator> make_generator(const Options& opt,
                                                     const ekg::EngineConfig& cfg) {
  if (opt.backend == "http" || cfg.generator.kind == ekg::BackendKind::Http) {
    ekg::BackendConfig bc = cfg.generator;
    bc.kind = ekg::BackendKind::Http;
    return std::make_shared<ekg::HttpGenerator>(bc);
  }
  std::string script = opt.script.empty() ? cfg.generator.fixture_path : opt.script;
  if (script.empty())
    throw ekg::BackendError(ekg::BackendErrorKind::NoFixture,
                            "stub generator needs --script <question-key -> reply JSON>");
  return std::make_shared<ekg::ScriptedGenerator>(ekg::ScriptedGenerator::from_file(script));
}

int cmd_segment(const Options& opt) {
  const ekg::EngineConfig cfg = load_config(opt);
  const auto chunks = run_segmentation(opt, cfg);
  std::ofstream out(opt.out, std::ios::binary | std::ios::trunc);
  if (!out) throw ekg::StoreError("cannot write " + opt.out);
  ekg::write_chunks_jsonl(out, chunks);
  std::size_t dyn = 0;
  for (const auto& c : chunks)
    if (c.kind == ekg::ChunkKind::DynamicEvent) ++dyn;
  std::cout << "chunks: " << chunks.size() << " (dynamic " << dyn << ", static "
            << chunks.size() - dyn << ")\n";
  return 0;
}

int cmd_ingest(const Options& opt) {
  const ekg::EngineConfig cfg = load_config(opt);
  const auto chunks = run_segmentation(opt, cfg);
  LockFile lock{fs::path(opt.store)};

  std::unique_ptr<ekg::EKGStore> store;
  if (fs::exists(fs::path(opt.store) / "meta.json"))
    store = ekg::EKGStore::load(opt.store);
  else
    store = std::make_unique<ekg::EKGStore>(cfg.mem);

  auto embedder = make_embedder(opt, cfg, store->config().embed_dim);
  auto extractor = make_extractor(opt, cfg);
  const ekg::IngestReport rep =
      ekg::ingest_chunks(*store, chunks, *extractor, *embedder);
  store->save(opt.store);

  const auto st = store->stats();
  std::cout << "chunks: " << rep.chunks << " (dynamic " << rep.dynamic_chunks
            << ", static " << rep.static_chunks << ")\n"
            << "triplets: " << rep.triplets << "\n"
            << "nodes: " << st.node_count << "\n"
            << "edges: " << st.edge_count << "\n";
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

int cmd_query(const Options& opt) {
  const ekg::EngineConfig cfg = load_config(opt);
  auto store = ekg::EKGStore::load(opt.store, /*read_only=*/true);

  ekg::RetrievalConfig rc = cfg.retrieval;
  if (opt.topk > 0) rc.top_k = opt.topk;
  if (opt.hops >= 0) rc.max_hops = opt.hops;
  if (opt.taudup >= 0.0) rc.tau_dup = opt.taudup;
  if (opt.no_dedup) rc.tau_dup = 2.0;  // above the cosine range: nothing prunes

  ekg::Backends backends;
  backends.embedder = make_embedder(opt, cfg, store->config().embed_dim);
  backends.generator = make_generator(opt, cfg);

  const auto [answer, trace] =
      ekg::answer_question(opt.question, *store, backends, rc, !opt.open_mode);
  if (!opt.trace.empty()) {
    std::ofstream out(opt.trace, std::ios::binary | std::ios::trunc);
    if (!out) throw ekg::StoreError("cannot write " + opt.trace);
    out << ekg::to_json(trace).dump(2) << "\n";
  }
  if (answer.option)
    std::cout << "[FINAL ANSWER: " << *answer.option << "]\n";
  else
    std::cout << answer.text << "\n";
  return 0;
}

int cmd_stats(const Options& opt) {
  auto store = ekg::EKGStore::load(opt.store, /*read_only=*/true);
  const auto st = store->stats();
  std::cout << "nodes: " << st.node_count << "\n";
  for (const auto& [kind, n] : st.nodes_by_kind)
    std::cout << "  " << kind << ": " << n << "\n";
  std::cout << "edges: " << st.edge_count << "\n";
  for (const auto& [rel, n] : st.edges_by_rel)
    std::cout << "  " << rel << ": " << n << "\n";
  std::cout << "chunks: " << st.chunk_count << "\n";
  for (const char* f : {"meta.json", "nodes.jsonl", "edges.jsonl", "vectors.jsonl"}) {
    const fs::path p = fs::path(opt.store) / f;
    std::cout << f << ": " << (fs::exists(p) ? fs::file_size(p) : 0) << " bytes\n";
  }
  return 0;
}

int cmd_export(const Options& opt) {
  auto store = ekg::EKGStore::load(opt.store, /*read_only=*/true);
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!opt.out.empty()) {
    file.open(opt.out, std::ios::binary | std::ios::trunc);
    if (!file) throw ekg::StoreError("cannot write " + opt.out);
    out = &file;
  }
  const auto nodes = store->nodes_copy();
  const auto edges = store->edges_copy();
  if (opt.format == "jsonl") {
    for (const auto& n : nodes) {
      nlohmann::json j = {{"type", "node"},       {"id", n.id},
                          {"kind", to_string(n.kind)}, {"text", n.text},
                          {"t_start", n.t_start}, {"t_end", n.t_end},
                          {"chunks", n.source_chunks}, {"counter", n.counter}};
      *out << j.dump() << "\n";
    }
    for (const auto& e : edges) {
      nlohmann::json j = {{"type", "edge"}, {"src", e.src}, {"dst", e.dst},
                          {"rel", to_string(e.rel)}};
      if (e.sim) j["sim"] = *e.sim;
      *out << j.dump() << "\n";
    }
  } else if (opt.format == "tgf") {
    for (const auto& n : nodes)
      *out << n.id << " [" << to_string(n.kind) << "] " << n.text << "\n";
    *out << "#\n";
    for (const auto& e : edges)
      *out << e.src << " " << e.dst << " " << to_string(e.rel) << "\n";
  } else {
    throw CLI::ValidationError("--format must be jsonl or tgf");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ekgmem: streaming event-causal memory engine"};
  app.require_subcommand(1);
  Options opt;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON config file (or EKG_CONFIG)");
  };

  CLI::App* seg = app.add_subcommand("segment", "segment a frame stream into chunks");
  seg->add_option("--frames", opt.frames, "frame embeddings JSONL")->required();
  seg->add_option("--speech", opt.speech, "speech islands JSONL");
  seg->add_option("--out", opt.out, "output chunks JSONL")->required();
  seg->add_option("--fixed-chunk", opt.fixed_chunk,
                  "bypass the sentinel with fixed-length chunks (seconds)");
  add_config(seg);

  CLI::App* ing = app.add_subcommand("ingest", "segment, extract and commit to a store");
  ing->add_option("--frames", opt.frames, "frame embeddings JSONL")->required();
  ing->add_option("--speech", opt.speech, "speech islands JSONL");
  ing->add_option("--store", opt.store, "store directory")->required();
  ing->add_option("--backend", opt.backend, "stub|http")
      ->check(CLI::IsMember({"stub", "http"}));
  ing->add_option("--fixtures", opt.fixtures, "stub extractor replies JSON");
  ing->add_option("--fixed-chunk", opt.fixed_chunk,
                  "bypass the sentinel with fixed-length chunks (seconds)");
  add_config(ing);

  CLI::App* qry = app.add_subcommand("query", "answer a question against a store");
  qry->add_option("--store", opt.store, "store directory")->required();
  qry->add_option("--question", opt.question, "question block")->required();
  qry->add_option("--topk", opt.topk, "anchor count");
  qry->add_option("--hops", opt.hops, "walk depth");
  qry->add_option("--taudup", opt.taudup, "dedup threshold");
  qry->add_flag("--no-dedup", opt.no_dedup, "disable semantic deduplication");
  qry->add_option("--trace", opt.trace, "write retrieval trace JSON here");
  qry->add_option("--backend", opt.backend, "stub|http")
      ->check(CLI::IsMember({"stub", "http"}));
  qry->add_option("--script", opt.script, "stub generator replies JSON");
  qry->add_flag("--open", opt.open_mode, "open-answer mode (no option parsing)");
  add_config(qry);

  CLI::App* sta = app.add_subcommand("stats", "print store statistics");
  sta->add_option("--store", opt.store, "store directory")->required();

  CLI::App* exp = app.add_subcommand("export", "dump the graph as jsonl or tgf");
  exp->add_option("--store", opt.store, "store directory")->required();
  exp->add_option("--format", opt.format, "jsonl|tgf")
      ->check(CLI::IsMember({"jsonl", "tgf"}));
  exp->add_option("--out", opt.out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (seg->parsed()) return cmd_segment(opt);
    if (ing->parsed()) return cmd_ingest(opt);
    if (qry->parsed()) return cmd_query(opt);
    if (sta->parsed()) return cmd_stats(opt);
    if (exp->parsed()) return cmd_export(opt);
    return 1;
  } catch (const ekg::BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return 3;
  } catch (const ekg::AnswerError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
