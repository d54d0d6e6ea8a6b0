#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "ekg/backends/backend.hpp"
#include "ekg/core/config.hpp"
#include "ekg/core/errors.hpp"
#include "ekg/core/types.hpp"
#include "ekg/core/vec.hpp"
#include "ekg/memory/graph.hpp"
#include "ekg/memory/vector_index.hpp"

namespace ekg {

// Dual-store Event Knowledge Graph: an exact-cosine vector index for node
// semantics plus a typed property graph for topology, with online entity
// merging and state-continuity fusion.
//
// Concurrency: single writer, many readers. A triplet commit holds the write
// lock end to end, so a reader never observes a half-committed triplet.
// Fusion keeps the earlier node's id, text and embedding; spans and source
// chunks are unioned. All similarity gates are strict (">").
class EKGStore {
 public:
  static constexpr double kEps = 1e-6;  // temporal tolerance, seconds

  explicit EKGStore(MemConfig cfg) : cfg_(cfg), vindex_(cfg.embed_dim) {}

  EKGStore(const EKGStore&) = delete;
  EKGStore& operator=(const EKGStore&) = delete;

  const MemConfig& config() const { return cfg_; }
  bool read_only() const { return read_only_; }
  void set_read_only(bool ro) { read_only_ = ro; }

  // ---- write path -------------------------------------------------------

  // Commits one SES triplet: creates/fuses the pre-State, Event and
  // post-State nodes, wires PRECONDITION_OF / RESULTS_IN / INVOLVES edges,
  // registers entities, and applies state continuity. Returns the (possibly
  // fused) node ids.
  std::tuple<std::string, std::string, std::string> upsert_triplet(
      const SESTriplet& t, Embedder& embed) {
    std::unique_lock lk(mu_);
    ensure_writable();
    if (t.pre_state.empty() || t.event.empty() || t.post_state.empty())
      throw std::invalid_argument("upsert_triplet: empty pre/event/post state");
    if (!(t.t_start <= t.t_end))
      throw std::invalid_argument("upsert_triplet: t_start > t_end");

    // State continuity takes precedence over generic state dedup: a new
    // pre-state that matches an earlier post-state fuses into it, which is
    // what welds SES units into chains. Runs before the post-state exists, so
    // a zero-length triplet cannot chain onto itself.
    const std::vector<double> pre_emb = embed_checked(embed, t.pre_state);
    const ContinuityMatch cont = find_continuity_locked(pre_emb, t.t_start);
    std::string pre_id;
    if (cont.node_id.empty()) {
      pre_id = upsert_state_locked(t.pre_state, pre_emb, t.t_start, t.t_start,
                                   t.chunk_id, /*pre=*/true, /*post=*/false);
    } else {
      EKGNode& survivor = node_mut_locked(cont.node_id);
      absorb_metadata(survivor, t.t_start, t.t_start, t.chunk_id, /*pre=*/true,
                      /*post=*/false);
      pre_id = survivor.id;
    }
    const std::string event_id =
        create_node_locked(NodeKind::Event, t.event, embed_checked(embed, t.event),
                           t.t_start, t.t_end, t.chunk_id);
    add_edge_locked(pre_id, event_id, Rel::PreconditionOf, std::nullopt);
    if (!cont.node_id.empty()) {
      const std::string prev = newest_event_resulting_in_locked(pre_id, event_id);
      if (!prev.empty())
        add_edge_locked(prev, event_id, Rel::TemporalNext, cont.sim);
    }

    const std::string post_id =
        upsert_state_locked(t.post_state, embed_checked(embed, t.post_state),
                            t.t_end, t.t_end, t.chunk_id, /*pre=*/false,
                            /*post=*/true);
    add_edge_locked(event_id, post_id, Rel::ResultsIn, std::nullopt);

    for (const auto& name : t.entities) {
      if (name.empty()) continue;
      const std::string ent_id = register_entity_locked(
          name, embed_checked(embed, name), t.t_start, t.t_end, t.chunk_id);
      add_edge_locked(event_id, ent_id, Rel::Involves, std::nullopt);
    }
    return {pre_id, event_id, post_id};
  }

  // Greedy-online entity resolution against canonical representatives: the
  // first mention's text and embedding stay canonical forever.
  std::string register_entity(const std::string& name, Embedder& embed) {
    std::unique_lock lk(mu_);
    ensure_writable();
    if (name.empty()) throw std::invalid_argument("register_entity: empty name");
    return register_entity_locked(name, embed_checked(embed, name), 0.0, 0.0, {});
  }

  // Finds the most recent earlier post-state matching the committed
  // pre-state, fuses the two (earlier id survives) and returns the
  // TEMPORAL_NEXT edge, if any. The later event is the newest event the
  // pre-state preconditions.
  std::optional<EKGEdge> link_state_continuity(const std::string& new_pre_id) {
    std::unique_lock lk(mu_);
    ensure_writable();
    const EKGNode& pre = node_ref_locked(new_pre_id);
    const ContinuityMatch m = find_continuity_locked(pre.embedding, pre.t_start);
    if (m.node_id.empty()) return std::nullopt;
    // the later event: the newest event this pre-state preconditions
    std::string later;
    std::uint64_t later_counter = 0;
    for (const auto& e : edges_) {
      if (e.rel != Rel::PreconditionOf || e.src != new_pre_id) continue;
      const EKGNode& ev = node_ref_locked(e.dst);
      if (later.empty() || ev.counter > later_counter) {
        later = e.dst;
        later_counter = ev.counter;
      }
    }
    if (later.empty()) return std::nullopt;
    const std::string prev = newest_event_resulting_in_locked(m.node_id, later);
    if (prev.empty()) return std::nullopt;
    if (m.node_id != new_pre_id) fuse_locked(new_pre_id, m.node_id);
    const std::size_t before = edges_.size();
    add_edge_locked(prev, later, Rel::TemporalNext, m.sim);
    if (edges_.size() == before) return std::nullopt;
    return edges_.back();
  }

  // ---- read path ---------------------------------------------------------

  bool empty() const {
    std::shared_lock lk(mu_);
    return vindex_.size() == 0;
  }

  std::size_t node_count() const {
    std::shared_lock lk(mu_);
    return vindex_.size();
  }

  std::size_t edge_count() const {
    std::shared_lock lk(mu_);
    return edges_.size();
  }

  // Exact top-k by cosine; ties broken by smaller insertion counter.
  std::vector<std::pair<std::string, double>> search(std::span<const double> query,
                                                     std::size_t k) const {
    std::shared_lock lk(mu_);
    if (vindex_.size() == 0) return {};
    return vindex_.search(query, k);
  }

  struct ScoredNode {
    std::string id;
    double sim;
    std::uint64_t counter;
    NodeKind kind;
  };

  std::vector<ScoredNode> scan_scored(std::span<const double> query) const {
    std::shared_lock lk(mu_);
    std::vector<ScoredNode> out;
    for (const auto& h : vindex_.scan(query)) {
      const EKGNode& n = node_ref_locked(h.id);
      out.push_back({h.id, h.sim, h.counter, n.kind});
    }
    return out;
  }

  // Breadth-first over edges treated as undirected, all edge types; returns
  // the distinct node ids within n_hops of the anchors (anchors included),
  // ordered by insertion counter.
  std::vector<std::string> neighbors_within(const std::vector<std::string>& anchor_ids,
                                            int n_hops) const {
    std::shared_lock lk(mu_);
    if (n_hops < 0) throw std::invalid_argument("neighbors_within: n_hops < 0");
    std::unordered_map<std::string, std::vector<const std::string*>> adj;
    for (const auto& e : edges_) {
      adj[e.src].push_back(&e.dst);
      adj[e.dst].push_back(&e.src);
    }
    std::unordered_map<std::string, int> dist;
    std::queue<std::string> q;
    for (const auto& a : anchor_ids) {
      const auto it = by_id_.find(a);
      if (it == by_id_.end() || !nodes_[it->second].alive)
        throw RetrievalError(RetrievalErrorKind::UnknownAnchor,
                             "unknown anchor node " + a);
      if (dist.emplace(a, 0).second) q.push(a);
    }
    while (!q.empty()) {
      const std::string cur = q.front();
      q.pop();
      const int d = dist[cur];
      if (d >= n_hops) continue;
      const auto it = adj.find(cur);
      if (it == adj.end()) continue;
      for (const std::string* nxt : it->second) {
        if (dist.emplace(*nxt, d + 1).second) q.push(*nxt);
      }
    }
    std::vector<std::string> out;
    out.reserve(dist.size());
    for (const auto& [id, _] : dist) out.push_back(id);
    std::sort(out.begin(), out.end(), [this](const std::string& a, const std::string& b) {
      return node_ref_locked(a).counter < node_ref_locked(b).counter;
    });
    return out;
  }

  EKGNode node(const std::string& id) const {
    std::shared_lock lk(mu_);
    return node_ref_locked(id);
  }

  std::vector<EKGNode> nodes_copy() const {
    std::shared_lock lk(mu_);
    std::vector<EKGNode> out;
    for (const auto& n : nodes_)
      if (n.alive) out.push_back(n);
    return out;
  }

  std::vector<EKGEdge> edges_copy() const {
    std::shared_lock lk(mu_);
    return edges_;
  }

  std::uint64_t next_counter() const {
    std::shared_lock lk(mu_);
    return next_counter_;
  }

  struct Stats {
    std::map<std::string, std::size_t> nodes_by_kind;
    std::map<std::string, std::size_t> edges_by_rel;
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    std::size_t chunk_count = 0;
  };

  Stats stats() const {
    std::shared_lock lk(mu_);
    Stats s;
    std::set<std::string> chunks;
    for (const auto& n : nodes_) {
      if (!n.alive) continue;
      ++s.nodes_by_kind[to_string(n.kind)];
      ++s.node_count;
      chunks.insert(n.source_chunks.begin(), n.source_chunks.end());
    }
    for (const auto& e : edges_) {
      ++s.edges_by_rel[to_string(e.rel)];
      ++s.edge_count;
    }
    s.chunk_count = chunks.size();
    return s;
  }

  // Full referential-integrity and edge-schema check.
  void validate() const {
    std::shared_lock lk(mu_);
    validate_locked();
  }

  bool integrity_ok() const {
    try {
      validate();
      return true;
    } catch (const StoreError&) {
      return false;
    }
  }

  // ---- persistence -------------------------------------------------------
  // Directory layout: meta.json, nodes.jsonl, edges.jsonl, vectors.jsonl,
  // all written in insertion-counter order. save . load . save is
  // byte-identical.

  void save(const std::filesystem::path& dir) const {
    std::shared_lock lk(mu_);
    std::filesystem::create_directories(dir);
    {
      nlohmann::json meta = {{"dim", cfg_.embed_dim},
                             {"gamma_ent", cfg_.gamma_ent},
                             {"gamma_evt", cfg_.gamma_evt},
                             {"next_counter", next_counter_}};
      write_file(dir / "meta.json", meta.dump() + "\n");
    }
    {
      std::string out;
      for (const auto& n : nodes_) {
        if (!n.alive) continue;
        nlohmann::json j = {{"id", n.id},
                            {"kind", to_string(n.kind)},
                            {"text", n.text},
                            {"t_start", n.t_start},
                            {"t_end", n.t_end},
                            {"chunks", n.source_chunks},
                            {"counter", n.counter},
                            {"pre_role", n.pre_role},
                            {"post_role", n.post_role}};
        out += j.dump();
        out += '\n';
      }
      write_file(dir / "nodes.jsonl", out);
    }
    {
      std::string out;
      for (const auto& e : edges_) {
        nlohmann::json j = {{"src", e.src}, {"dst", e.dst}, {"rel", to_string(e.rel)}};
        if (e.sim) j["sim"] = *e.sim;
        out += j.dump();
        out += '\n';
      }
      write_file(dir / "edges.jsonl", out);
    }
    {
      std::string out;
      for (const auto& n : nodes_) {
        if (!n.alive) continue;
        nlohmann::json j = {{"id", n.id}, {"v", n.embedding}};
        out += j.dump();
        out += '\n';
      }
      write_file(dir / "vectors.jsonl", out);
    }
  }

  // Reconstructs an equal store; a corrupt file fails the whole load, naming
  // the first bad record.
  static std::unique_ptr<EKGStore> load(const std::filesystem::path& dir,
                                        bool read_only = false) {
    const auto meta_path = dir / "meta.json";
    std::ifstream meta_in(meta_path);
    if (!meta_in) throw StoreError("load: cannot open " + meta_path.string());
    nlohmann::json meta = nlohmann::json::parse(meta_in, nullptr, false);
    if (meta.is_discarded() || !meta.is_object() || !meta.contains("dim"))
      throw StoreError("load: " + meta_path.string() + " is not a valid meta record");
    MemConfig cfg;
    cfg.embed_dim = meta["dim"].get<std::size_t>();
    cfg.gamma_ent = meta.value("gamma_ent", cfg.gamma_ent);
    cfg.gamma_evt = meta.value("gamma_evt", cfg.gamma_evt);
    auto store = std::make_unique<EKGStore>(cfg);
    store->next_counter_ = meta.value("next_counter", std::uint64_t{0});

    for_each_record(dir / "nodes.jsonl", [&](const nlohmann::json& j, const std::string& rec) {
      EKGNode n;
      if (!j.contains("id") || !j.contains("kind") || !j.contains("text") ||
          !j.contains("counter"))
        throw StoreError(rec + ": missing node field");
      n.id = j["id"].get<std::string>();
      n.kind = node_kind_from(j["kind"].get<std::string>());
      n.text = j["text"].get<std::string>();
      n.t_start = j.value("t_start", 0.0);
      n.t_end = j.value("t_end", 0.0);
      if (j.contains("chunks")) n.source_chunks = j["chunks"].get<std::vector<std::string>>();
      n.counter = j["counter"].get<std::uint64_t>();
      n.pre_role = j.value("pre_role", false);
      n.post_role = j.value("post_role", false);
      if (store->by_id_.count(n.id)) throw StoreError(rec + ": duplicate node id " + n.id);
      if (!store->nodes_.empty() && !(n.counter > store->nodes_.back().counter))
        throw StoreError(rec + ": counters out of order");
      store->by_id_[n.id] = store->nodes_.size();
      store->nodes_.push_back(std::move(n));
    });

    std::size_t vectors_seen = 0;
    for_each_record(dir / "vectors.jsonl", [&](const nlohmann::json& j, const std::string& rec) {
      if (!j.contains("id") || !j.contains("v"))
        throw StoreError(rec + ": missing vector field");
      const std::string id = j["id"].get<std::string>();
      const auto it = store->by_id_.find(id);
      if (it == store->by_id_.end())
        throw StoreError(rec + ": vector for unknown node " + id);
      EKGNode& n = store->nodes_[it->second];
      if (!n.embedding.empty()) throw StoreError(rec + ": duplicate vector for " + id);
      n.embedding = j["v"].get<std::vector<double>>();
      if (n.embedding.size() != cfg.embed_dim)
        throw StoreError(rec + ": vector dimension mismatch for " + id);
      ++vectors_seen;
    });
    if (vectors_seen != store->nodes_.size())
      throw StoreError("load: vectors.jsonl has " + std::to_string(vectors_seen) +
                       " records for " + std::to_string(store->nodes_.size()) + " nodes");
    for (const auto& n : store->nodes_)
      store->vindex_.insert(n.id, n.embedding, n.counter);

    for_each_record(dir / "edges.jsonl", [&](const nlohmann::json& j, const std::string& rec) {
      if (!j.contains("src") || !j.contains("dst") || !j.contains("rel"))
        throw StoreError(rec + ": missing edge field");
      EKGEdge e;
      e.src = j["src"].get<std::string>();
      e.dst = j["dst"].get<std::string>();
      e.rel = rel_from(j["rel"].get<std::string>());
      if (j.contains("sim")) e.sim = j["sim"].get<double>();
      if (!store->by_id_.count(e.src) || !store->by_id_.count(e.dst))
        throw StoreError(rec + ": edge endpoint missing");
      if (!store->edge_keys_.insert(e.key()).second)
        throw StoreError(rec + ": duplicate edge");
      store->edges_.push_back(std::move(e));
    });

    store->validate_locked();
    store->read_only_ = read_only;
    return store;
  }

 private:
  void ensure_writable() const {
    if (read_only_) throw StoreError("store is read-only");
  }

  std::vector<double> embed_checked(Embedder& embed, const std::string& text) const {
    std::vector<double> v = embed.embed_text(text);
    if (v.size() != cfg_.embed_dim)
      throw BackendError(BackendErrorKind::Dim,
                         "embedder produced dim " + std::to_string(v.size()) +
                             ", store expects " + std::to_string(cfg_.embed_dim));
    if (!is_unit(v)) v = normalize(std::move(v));
    return v;
  }

  const EKGNode& node_ref_locked(const std::string& id) const {
    const auto it = by_id_.find(id);
    if (it == by_id_.end())
      throw StoreError("unknown node id " + id);
    return nodes_[it->second];
  }

  EKGNode& node_mut_locked(const std::string& id) {
    return const_cast<EKGNode&>(node_ref_locked(id));
  }

  std::string create_node_locked(NodeKind kind, const std::string& text,
                                 std::vector<double> emb, double t0, double t1,
                                 const std::string& chunk) {
    EKGNode n;
    n.id = "n" + std::to_string(next_counter_);
    n.kind = kind;
    n.text = text;
    n.embedding = std::move(emb);
    n.t_start = t0;
    n.t_end = t1;
    if (!chunk.empty()) n.source_chunks.push_back(chunk);
    n.counter = next_counter_++;
    by_id_[n.id] = nodes_.size();
    vindex_.insert(n.id, n.embedding, n.counter);
    nodes_.push_back(std::move(n));
    return nodes_.back().id;
  }

  void absorb_metadata(EKGNode& survivor, double t0, double t1,
                       const std::string& chunk, bool pre, bool post) {
    survivor.t_start = std::min(survivor.t_start, t0);
    survivor.t_end = std::max(survivor.t_end, t1);
    if (!chunk.empty() &&
        std::find(survivor.source_chunks.begin(), survivor.source_chunks.end(),
                  chunk) == survivor.source_chunks.end())
      survivor.source_chunks.push_back(chunk);
    survivor.pre_role = survivor.pre_role || pre;
    survivor.post_role = survivor.post_role || post;
  }

  // State upsert with fusion: argmax cosine over existing State nodes above
  // gamma_evt reuses that node (its text and embedding stay canonical).
  std::string upsert_state_locked(const std::string& text, std::vector<double> emb,
                                  double t0, double t1, const std::string& chunk,
                                  bool pre, bool post) {
    const EKGNode* best = nullptr;
    double best_sim = 0.0;
    for (const auto& n : nodes_) {
      if (!n.alive || n.kind != NodeKind::State) continue;
      const double s = dot(n.embedding, emb);
      if (s > cfg_.gamma_evt && (!best || s > best_sim)) {
        best = &n;
        best_sim = s;
      }
    }
    if (best) {
      EKGNode& survivor = node_mut_locked(best->id);
      absorb_metadata(survivor, t0, t1, chunk, pre, post);
      return survivor.id;
    }
    const std::string id = create_node_locked(NodeKind::State, text, std::move(emb), t0, t1, chunk);
    EKGNode& n = node_mut_locked(id);
    n.pre_role = pre;
    n.post_role = post;
    return id;
  }

  std::string register_entity_locked(const std::string& name, std::vector<double> emb,
                                     double t0, double t1, const std::string& chunk) {
    const EKGNode* best = nullptr;
    double best_sim = 0.0;
    for (const auto& n : nodes_) {
      if (!n.alive || n.kind != NodeKind::Entity) continue;
      const double s = dot(n.embedding, emb);
      if (s > cfg_.gamma_ent && (!best || s > best_sim)) {
        best = &n;
        best_sim = s;
      }
    }
    if (best) {
      EKGNode& survivor = node_mut_locked(best->id);
      if (!chunk.empty() &&
          std::find(survivor.source_chunks.begin(), survivor.source_chunks.end(),
                    chunk) == survivor.source_chunks.end())
        survivor.source_chunks.push_back(chunk);
      return survivor.id;
    }
    return create_node_locked(NodeKind::Entity, name, std::move(emb), t0, t1, chunk);
  }

  struct ContinuityMatch {
    std::string node_id;  // empty when nothing qualifies
    double sim = 0.0;
  };

  // State continuity candidate: the most recent earlier post-state (t_end
  // within kEps of the pre-state's start) whose cosine exceeds gamma_evt;
  // ties on t_end go to the newest insertion.
  ContinuityMatch find_continuity_locked(std::span<const double> pre_emb,
                                         double pre_start) const {
    const double limit = pre_start + kEps;
    ContinuityMatch m;
    const EKGNode* best = nullptr;
    for (const auto& n : nodes_) {
      if (!n.alive || n.kind != NodeKind::State || !n.post_role) continue;
      if (!(n.t_end <= limit)) continue;
      const double s = dot(n.embedding, pre_emb);
      if (!(s > cfg_.gamma_evt)) continue;
      if (!best || n.t_end > best->t_end ||
          (n.t_end == best->t_end && n.counter > best->counter)) {
        best = &n;
        m.sim = s;
      }
    }
    if (best) m.node_id = best->id;
    return m;
  }

  // The event whose RESULTS_IN edge targets the given post-state; newest wins.
  std::string newest_event_resulting_in_locked(const std::string& post_id,
                                               const std::string& exclude) const {
    std::string prev;
    std::uint64_t prev_counter = 0;
    for (const auto& e : edges_) {
      if (e.rel != Rel::ResultsIn || e.dst != post_id || e.src == exclude) continue;
      const EKGNode& ev = node_ref_locked(e.src);
      if (prev.empty() || ev.counter > prev_counter) {
        prev = e.src;
        prev_counter = ev.counter;
      }
    }
    return prev;
  }

  // Earlier insertion survives; edges are redirected and deduplicated.
  std::string fuse_locked(const std::string& a_id, const std::string& b_id) {
    EKGNode& a = node_mut_locked(a_id);
    EKGNode& b = node_mut_locked(b_id);
    EKGNode& survivor = a.counter < b.counter ? a : b;
    EKGNode& loser = a.counter < b.counter ? b : a;
    absorb_metadata(survivor, loser.t_start, loser.t_end, {}, loser.pre_role,
                    loser.post_role);
    for (const auto& ch : loser.source_chunks)
      absorb_metadata(survivor, survivor.t_start, survivor.t_end, ch, false, false);

    const std::string loser_id = loser.id;
    const std::string survivor_id = survivor.id;
    std::vector<EKGEdge> rebuilt;
    rebuilt.reserve(edges_.size());
    edge_keys_.clear();
    for (auto& e : edges_) {
      if (e.src == loser_id) e.src = survivor_id;
      if (e.dst == loser_id) e.dst = survivor_id;
      if (edge_keys_.insert(e.key()).second) rebuilt.push_back(std::move(e));
    }
    edges_ = std::move(rebuilt);

    loser.alive = false;
    vindex_.erase(loser_id);
    by_id_.erase(loser_id);
    return survivor_id;
  }

  void add_edge_locked(const std::string& src, const std::string& dst, Rel rel,
                       std::optional<double> sim) {
    EKGEdge e{src, dst, rel, sim};
    if (!edge_keys_.insert(e.key()).second) return;  // no duplicate (src,dst,rel)
    edges_.push_back(std::move(e));
  }

  void validate_locked() const {
    std::unordered_set<std::string> keys;
    for (const auto& e : edges_) {
      const auto si = by_id_.find(e.src);
      const auto di = by_id_.find(e.dst);
      if (si == by_id_.end() || di == by_id_.end() || !nodes_[si->second].alive ||
          !nodes_[di->second].alive)
        throw StoreError("validate: edge endpoint missing: " + e.src + " -> " + e.dst);
      if (!keys.insert(e.key()).second)
        throw StoreError("validate: duplicate edge " + e.src + " -> " + e.dst);
      const EKGNode& s = nodes_[si->second];
      const EKGNode& d = nodes_[di->second];
      switch (e.rel) {
        case Rel::PreconditionOf:
          if (s.kind != NodeKind::State || d.kind != NodeKind::Event)
            throw StoreError("validate: PRECONDITION_OF must be State->Event");
          break;
        case Rel::ResultsIn:
          if (s.kind != NodeKind::Event || d.kind != NodeKind::State)
            throw StoreError("validate: RESULTS_IN must be Event->State");
          break;
        case Rel::Involves:
          if (s.kind != NodeKind::Event || d.kind != NodeKind::Entity)
            throw StoreError("validate: INVOLVES must be Event->Entity");
          break;
        case Rel::TemporalNext:
          if (s.kind != NodeKind::Event || d.kind != NodeKind::Event)
            throw StoreError("validate: TEMPORAL_NEXT must be Event->Event");
          if (!(s.t_end <= d.t_start + kEps))
            throw StoreError("validate: TEMPORAL_NEXT violates temporal order");
          break;
      }
    }
    std::size_t alive = 0;
    for (const auto& n : nodes_) {
      if (!n.alive) continue;
      ++alive;
      if (n.text.empty()) throw StoreError("validate: node " + n.id + " has empty text");
      if (n.embedding.size() != cfg_.embed_dim)
        throw StoreError("validate: node " + n.id + " dimension mismatch");
      if (!(n.t_start <= n.t_end))
        throw StoreError("validate: node " + n.id + " has t_start > t_end");
    }
    if (alive != vindex_.size())
      throw StoreError("validate: vector index size mismatch");
  }

  static void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError("save: cannot write " + p.string());
    out << content;
  }

  template <typename Fn>
  static void for_each_record(const std::filesystem::path& p, Fn&& fn) {
    std::ifstream in(p);
    if (!in) throw StoreError("load: cannot open " + p.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const std::string rec = p.filename().string() + ": line " + std::to_string(lineno);
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object())
        throw StoreError(rec + ": not a JSON object");
      try {
        fn(j, rec);
      } catch (const nlohmann::json::exception& e) {
        throw StoreError(rec + ": " + e.what());
      }
    }
  }

  MemConfig cfg_;
  bool read_only_ = false;
  mutable std::shared_mutex mu_;

  std::vector<EKGNode> nodes_;  // insertion order; fused losers stay, dead
  std::unordered_map<std::string, std::size_t> by_id_;
  std::vector<EKGEdge> edges_;  // creation order
  std::unordered_set<std::string> edge_keys_;
  VectorIndex vindex_;
  std::uint64_t next_counter_ = 0;
};

}  // namespace ekg
