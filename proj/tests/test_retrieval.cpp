#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ekg/backends/stub.hpp"
#include "ekg/memory/store.hpp"
#include "ekg/retrieval/retrieval.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using Catch::Approx;

namespace {

ekg::EKGNode make_node(const std::string& id, const std::string& text, double t0,
                       double t1, std::uint64_t counter,
                       ekg::NodeKind kind = ekg::NodeKind::State) {
  ekg::EKGNode n;
  n.id = id;
  n.kind = kind;
  n.text = text;
  n.t_start = t0;
  n.t_end = t1;
  n.counter = counter;
  return n;
}

ekg::SESTriplet triplet(const std::string& pre, const std::string& event,
                        const std::string& post, const std::string& chunk,
                        double t0, double t1) {
  ekg::SESTriplet t;
  t.temporal_order = 1;
  t.pre_state = pre;
  t.event = event;
  t.post_state = post;
  t.chunk_id = chunk;
  t.t_start = t0;
  t.t_end = t1;
  return t;
}

}  // namespace

TEST_CASE("anchor clamps and prefers events on exact ties") {
  ekg::MemConfig mc;
  mc.embed_dim = 64;
  ekg::EKGStore store(mc);
  ekg::StubEmbedder emb(64);
  ekg::RetrievalConfig rc;

  try {
    ekg::anchor("anything", emb, store, rc);
    FAIL("expected EmptyStore");
  } catch (const ekg::RetrievalError& e) {
    CHECK(e.kind() == ekg::RetrievalErrorKind::EmptyStore);
  }

  const auto only = store.register_entity("lighthouse", emb);
  CHECK(ekg::anchor("completely unrelated question", emb, store, rc) ==
        std::vector<std::string>{only});

  store.register_entity("harbor", emb);
  CHECK(ekg::anchor("query", emb, store, rc).size() == 2);  // k=3 over 2 nodes

  // identical text as State and Event: exact tie, Event outranks
  ekg::EKGStore tie(mc);
  const auto [pre, ev, post] = tie.upsert_triplet(
      triplet("harbor light blinking", "harbor light blinking",
              "ship turns toward port", "c0", 0.0, 1.0),
      emb);
  rc.top_k = 1;
  CHECK(ekg::anchor("harbor light blinking", emb, tie, rc) ==
        std::vector<std::string>{ev});
}

TEST_CASE("anchor equals a full-scan oracle on a random store") {
  ekg::MemConfig mc;
  mc.embed_dim = 32;
  ekg::EKGStore store(mc);
  ekg::StubEmbedder emb(32);
  for (int i = 0; i < 12; ++i) {
    store.upsert_triplet(triplet("state left " + std::to_string(i),
                                 "motion number " + std::to_string(i),
                                 "state right " + std::to_string(i),
                                 "c" + std::to_string(i), i * 2.0, i * 2.0 + 1.0),
                         emb);
  }
  const std::string q = "motion number 7 state";
  ekg::RetrievalConfig rc;
  const auto got = ekg::anchor(q, emb, store, rc);

  struct Row {
    double sim;
    bool event;
    std::uint64_t counter;
    std::string id;
  };
  std::vector<Row> rows;
  const auto qv = oracle::stub_embed(q, 32);
  for (const auto& n : store.nodes_copy()) {
    double s = 0.0;
    const auto nv = oracle::stub_embed(n.text, 32);
    for (std::size_t d = 0; d < 32; ++d) s += qv[d] * nv[d];
    rows.push_back({s, n.kind == ekg::NodeKind::Event, n.counter, n.id});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    if (a.event != b.event) return a.event;
    return a.counter < b.counter;
  });
  REQUIRE(got.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(got[static_cast<std::size_t>(i)] == rows[static_cast<std::size_t>(i)].id);
}

TEST_CASE("flatten_chronological sorts by time then insertion") {
  ekg::MemConfig mc;
  mc.embed_dim = 16;
  ekg::EKGStore store(mc);
  ekg::StubEmbedder emb(16);
  const auto [p1, e1, q1] =
      store.upsert_triplet(triplet("alpha notion", "beta motion", "gamma ocean",
                                   "c0", 5.0, 6.0),
                           emb);
  const auto [p2, e2, q2] =
      store.upsert_triplet(triplet("delta lotion", "epsilon potion", "zeta devotion",
                                   "c1", 1.0, 3.0),
                           emb);
  const auto flat = ekg::flatten_chronological({p1, e1, p2, e2}, store);
  REQUIRE(flat.size() == 4);
  CHECK(flat[0].id == p2);  // t=1
  CHECK(flat[1].id == e2);  // t=1, later counter
  CHECK(flat[2].id == p1);  // t=5
  CHECK(flat[3].id == e1);
  CHECK(ekg::flatten_chronological({}, store).empty());

  // entities are excluded from the flattened script
  const auto ent = store.register_entity("porcelain vase", emb);
  CHECK(ekg::flatten_chronological({ent, p1}, store).size() == 1);
}

TEST_CASE("dedup keeps first-seen and prunes near-duplicates") {
  ekg::StubEmbedder emb(64);
  std::vector<ekg::EKGNode> nodes;
  nodes.push_back(make_node("a", "rusty gate creaks", 0.0, 1.0, 0));
  nodes.push_back(make_node("b", "rusty gate creaks", 1.0, 2.0, 1));  // exact dup
  nodes.push_back(make_node("c", "owl lands on branch", 2.0, 3.0, 2));
  REQUIRE(oracle::stub_sim("rusty gate creaks", "owl lands on branch", 64) <= 0.85);

  const auto ctx = ekg::dedup(nodes, emb, 0.85);
  REQUIRE(ctx.entries.size() == 2);
  CHECK(ctx.entries[0].id == "a");
  CHECK(ctx.entries[1].id == "c");
  REQUIRE(ctx.pruned.size() == 1);
  CHECK(ctx.pruned[0].id == "b");
  CHECK(ctx.pruned[0].s_max == 1.0);
}

TEST_CASE("dedup matches the quadratic oracle on a redundancy fixture") {
  ekg::StubEmbedder emb(256);
  std::mt19937_64 rng(31337);
  std::vector<std::string> bases;
  std::vector<ekg::EKGNode> nodes;
  std::vector<std::size_t> expected_kept;
  for (std::size_t i = 0; i < 100; ++i) {
    std::string text;
    if (i % 5 < 2) {
      text = "scene token" + std::to_string(i) + " verb" + std::to_string(i * 7 + 1) +
             " object" + std::to_string(i * 13 + 5);
      bases.push_back(text);
      expected_kept.push_back(i);
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, bases.size() - 1);
      text = bases[pick(rng)];
    }
    nodes.push_back(make_node("n" + std::to_string(i), text, static_cast<double>(i),
                              static_cast<double>(i) + 1.0, i));
  }
  REQUIRE(bases.size() == 40);

  const auto ctx = ekg::dedup(nodes, emb, 0.85);
  REQUIRE(ctx.entries.size() == 40);
  REQUIRE(ctx.pruned.size() == 60);
  for (std::size_t i = 0; i < 40; ++i)
    CHECK(ctx.entries[i].id == "n" + std::to_string(expected_kept[i]));

  std::vector<std::vector<double>> embs;
  for (const auto& n : nodes) embs.push_back(oracle::stub_embed(n.text, 256));
  const auto want = oracle::quadratic_dedup(embs, 0.85);
  REQUIRE(want.size() == ctx.entries.size());
  for (std::size_t i = 0; i < want.size(); ++i)
    CHECK(nodes[want[i]].id == ctx.entries[i].id);

  // kept-set pairwise similarity stays at or below tau_dup
  for (std::size_t i = 0; i < ctx.kept_embeddings.size(); ++i)
    for (std::size_t j = i + 1; j < ctx.kept_embeddings.size(); ++j)
      REQUIRE(ekg::dot(ctx.kept_embeddings[i], ctx.kept_embeddings[j]) <= 0.85);

  // idempotence: dedup over already-deduplicated entries changes nothing
  std::vector<ekg::EKGNode> kept_nodes;
  for (const auto& e : ctx.entries)
    kept_nodes.push_back(make_node(e.id, e.text, e.t_start, e.t_end, kept_nodes.size()));
  const auto again = ekg::dedup(kept_nodes, emb, 0.85);
  CHECK(again.entries.size() == ctx.entries.size());
  CHECK(again.pruned.empty());
}

TEST_CASE("assemble_context formats chronological lines") {
  ekg::RetrievalContext ctx;
  CHECK(ekg::assemble_context(ctx).empty());
  ctx.entries.push_back({"n1", 2.0, 5.0, "man opens door"});
  CHECK(ekg::assemble_context(ctx) == "[2.0–5.0] man opens door");
  ctx.entries.push_back({"n2", 5.0, 9.0, "man walks through"});
  CHECK(ekg::assemble_context(ctx) ==
        "[2.0–5.0] man opens door\n[5.0–9.0] man walks through");
}

TEST_CASE("qa prompt matches the golden file byte for byte") {
  const std::string question =
      "What does the chef pour into the pan?\n0) water\n1) cream\n2) oil\n3) milk\n4) juice";
  const std::string ctx =
      "[2.0–5.0] man opens door\n[5.0–9.0] man walks through";
  const std::string prompt = ekg::build_qa_prompt(question, ctx);
  CHECK(prompt.find("### [Decision Rules]") != std::string::npos);
  CHECK(prompt.find("Output exactly one line and nothing else: [FINAL ANSWER: X]") !=
        std::string::npos);
  const std::string golden =
      testutil::slurp(std::string(EKG_GOLDEN_DIR) + "/qa_prompt.txt");
  REQUIRE_FALSE(golden.empty());
  REQUIRE(prompt == golden);

  const std::string empty_ctx = ekg::build_qa_prompt("q", "");
  CHECK(empty_ctx.find("### [Retrieved RAG Memory]") != std::string::npos);
  CHECK(empty_ctx.find("{ctx}") == std::string::npos);
}

TEST_CASE("parse_answer honors the bracket contract") {
  CHECK(ekg::parse_answer("[FINAL ANSWER: 3]").option == 3);
  CHECK(ekg::parse_answer("reasoning...\n[FINAL ANSWER: 1]\n[FINAL ANSWER: 0]").option == 0);
  try {
    ekg::parse_answer("[FINAL ANSWER: 7]");
    FAIL("expected OutOfRange");
  } catch (const ekg::AnswerError& e) {
    CHECK(e.kind() == ekg::AnswerErrorKind::OutOfRange);
  }
  try {
    ekg::parse_answer("no verdict here");
    FAIL("expected Unparsable");
  } catch (const ekg::AnswerError& e) {
    CHECK(e.kind() == ekg::AnswerErrorKind::Unparsable);
  }
  try {
    ekg::parse_answer("[FINAL ANSWER: maybe]");
    FAIL("expected Unparsable");
  } catch (const ekg::AnswerError& e) {
    CHECK(e.kind() == ekg::AnswerErrorKind::Unparsable);
  }
  const auto open = ekg::parse_answer("free form reply", /*multiple_choice=*/false);
  CHECK_FALSE(open.option.has_value());
  CHECK(open.text == "free form reply");
}

TEST_CASE("answer_question composes the full pipeline deterministically") {
  ekg::MemConfig mc;
  mc.embed_dim = 64;
  auto store = std::make_unique<ekg::EKGStore>(mc);
  ekg::StubEmbedder emb(64);
  store->upsert_triplet(triplet("parcel sealed with tape", "courier scans parcel",
                                "parcel logged in system", "c0", 0.0, 4.0),
                        emb);
  store->upsert_triplet(triplet("parcel logged in system", "courier loads van",
                                "van carries parcel away", "c1", 5.0, 9.0),
                        emb);

  const std::string question = "what happened to the parcel";
  ekg::Backends backends;
  backends.embedder = std::make_shared<ekg::StubEmbedder>(64);
  backends.generator = std::make_shared<ekg::ScriptedGenerator>(
      std::map<std::string, std::string>{{"default", "[FINAL ANSWER: 2]"}});

  ekg::RetrievalConfig rc;
  const auto [answer, trace] = ekg::answer_question(question, *store, backends, rc);
  CHECK(answer.option == 2);
  CHECK(answer.raw == "[FINAL ANSWER: 2]");
  CHECK(trace.anchors.size() == 3);
  CHECK(trace.walked.size() >= trace.anchors.size());
  CHECK_FALSE(trace.kept.empty());
  CHECK_FALSE(trace.chunk_ids.empty());
  CHECK(trace.prompt.find(question) != std::string::npos);

  // chronological context
  const auto ctx_entries = trace.kept;
  double prev = -1.0;
  for (const auto& id : ctx_entries) {
    const auto n = store->node(id);
    CHECK(n.t_start >= prev);
    prev = n.t_start;
  }

  // hops=0 restricts the walk to the anchors themselves
  ekg::RetrievalConfig zero = rc;
  zero.max_hops = 0;
  const auto [a2, t2] = ekg::answer_question(question, *store, backends, zero);
  std::set<std::string> anchors_set(t2.anchors.begin(), t2.anchors.end());
  std::set<std::string> walked_set(t2.walked.begin(), t2.walked.end());
  CHECK(anchors_set == walked_set);

  // determinism: identical queries yield identical traces
  const auto [a3, t3] = ekg::answer_question(question, *store, backends, rc);
  CHECK(ekg::to_json(t3).dump() == ekg::to_json(trace).dump());
}
