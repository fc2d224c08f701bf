// Acceptance run: one PASS/FAIL line per criterion. Criterion 9 needs real
// data and a live endpoint; it is reported but never affects the exit code.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "ehrcheck/app/config.hpp"
#include "ehrcheck/app/corpus.hpp"
#include "ehrcheck/app/pipeline.hpp"
#include "ehrcheck/app/report.hpp"
#include "ehrcheck/app/sweep.hpp"
#include "ehrcheck/errors.hpp"
#include "ehrcheck/gateway/json_schema.hpp"
#include "ehrcheck/gateway/mock.hpp"
#include "ehrcheck/gateway/replay.hpp"
#include "ehrcheck/judge/context.hpp"
#include "ehrcheck/judge/judge.hpp"
#include "ehrcheck/metrics/agreement.hpp"
#include "ehrcheck/summarize/summarizer.hpp"
#include "ehrcheck/text/chunker.hpp"
#include "ehrcheck/text/sentences.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace ehrcheck;
using namespace testsupport;
using nlohmann::json;

namespace {

// Collects the first few failure messages of a criterion.
struct Outcome {
  std::size_t checks = 0;
  std::vector<std::string> failures;
  std::string note;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok && failures.size() == 5) failures.push_back("...");
  }
  bool passed() const { return failures.empty(); }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = app::read_file(e.path());
  return out;
}

// 1
Outcome retrieval_oracle() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<std::size_t> n_facts(1, 1000), dims(1, 64);
  const std::vector<std::string> queries{"fact 7", "fact 18 fact 50", "nothing in common"};
  std::size_t compared = 0;
  for (int corpus = 0; corpus < 50; ++corpus) {
    const std::size_t dim = dims(rng);
    const auto facts = random_facts(rng, n_facts(rng), dim);
    index::FactIndex idx;
    idx.ingest(facts);
    const auto snap = idx.snapshot();
    auto gw = heuristic_gateway(dim);
    gateway::HeuristicEmbeddingBackend enc(dim);
    gateway::HeuristicRerankBackend rr;
    std::vector<std::string> texts;
    for (const auto& f : facts) texts.push_back(f.text);
    for (const auto& q : queries) {
      const auto qd = enc.embed_dense({q}).at(0);
      const auto qs = enc.embed_sparse({q}).at(0);
      const auto rscores = rr.rerank(q, texts);
      for (auto method : {RetrievalMethod::Dense, RetrievalMethod::Hybrid, RetrievalMethod::Rerank}) {
        for (int top_n : {5, 10, 25, 50}) {
          for (auto scope : {Scope::AllAdmissions, Scope::CurrentAdmission}) {
            index::IndexConfig cfg;
            cfg.retrieval_method = method;
            cfg.top_n = top_n;
            cfg.scope = scope;
            const auto got = snap->retrieve(q, cfg, *gw, index::make_scope_filter(scope, "A0"));
            const auto want = oracle::oracle_retrieve(
                facts, qd, qs, rscores, method, static_cast<std::size_t>(top_n), static_cast<std::size_t>(top_n),
                scope == Scope::CurrentAdmission ? std::optional<std::string>("A0") : std::nullopt);
            bool same = got.size() == want.size();
            for (std::size_t i = 0; same && i < got.size(); ++i)
              same = got[i].fact_id == want[i].fact->fact_id && std::abs(got[i].score - want[i].score) <= 1e-9;
            o.expect(same, "corpus " + std::to_string(corpus) + " " + to_string(method) + " N=" +
                               std::to_string(top_n) + " differs from the oracle");
            ++compared;
          }
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  o.expect(secs < 60.0, "took " + fmt("%.1f", secs) + " s");
  o.note = std::to_string(compared) + " retrievals over 50 corpora in " + fmt("%.1f", secs) + " s";
  return o;
}

// 2
Outcome dbsf_properties() {
  Outcome o;
  std::mt19937_64 rng(2002);
  std::uniform_int_distribution<std::size_t> len(1, 60);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> minute(0, 100000), text_id(0, 15);
  std::size_t strict_lists = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = len(rng);
    std::vector<Fact> facts;
    std::vector<index::SearchHit> hits;
    for (std::size_t i = 0; i < n; ++i) {
      Fact f;
      f.fact_id = "n:f" + std::to_string(i);
      f.note_id = "n";
      f.text = "text " + std::to_string(text_id(rng));
      f.dense_vec = {1.0};
      f.timestamp = parse_timestamp("2100-01-01") + std::chrono::minutes(minute(rng));
      facts.push_back(f);
      hits.push_back({f.fact_id, g(rng) * 5.0, index::ScoreKind::DotProduct});
    }
    index::Snapshot snap(facts, 1);
    std::map<std::string, double> original;
    for (const auto& h : hits) original[h.fact_id] = h.score;

    // Fusion of a single list never inverts the original order; when no
    // score is clamped it reproduces the original ranking exactly.
    const auto fused = snap.fuse_dbsf(hits, {});
    auto ranked = hits;
    snap.sort_hits(ranked);
    bool clamped = false;
    for (const auto& h : fused) clamped = clamped || h.score <= 0.0 || h.score >= 1.0;
    bool weak = true;
    for (std::size_t i = 1; i < fused.size(); ++i)
      weak = weak && original[fused[i - 1].fact_id] >= original[fused[i].fact_id];
    o.expect(weak, "list " + std::to_string(t) + ": fusion inverted the order");
    if (!clamped) {
      ++strict_lists;
      bool same = fused.size() == ranked.size();
      for (std::size_t i = 0; same && i < fused.size(); ++i) same = fused[i].fact_id == ranked[i].fact_id;
      o.expect(same, "list " + std::to_string(t) + ": argsort changed");
    }

    std::vector<double> constant(n, g(rng));
    o.expect(index::dbsf_normalize(constant) == std::vector<double>(n, 0.5), "constant list not all 0.5");

    const std::size_t keep = 1 + static_cast<std::size_t>(t) % 20;
    const auto once = snap.select_top_n(ranked, keep);
    o.expect(snap.select_top_n(once, keep) == once, "dedup not idempotent on list " + std::to_string(t));
    std::set<std::string> seen;
    for (const auto& h : once) o.expect(seen.insert(snap.find(h.fact_id)->text).second, "duplicate text kept");
  }
  o.note = "1000 lists, " + std::to_string(strict_lists) + " without clamping";
  return o;
}

// 3
Outcome chunker_bound() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(3003);
  gateway::HeuristicEmbeddingBackend enc(64);
  const text::EmbedFn embed = [&enc](const std::vector<std::string>& t) { return enc.embed_dense(t); };
  auto squeeze = [](std::string t) {
    std::erase_if(t, [](unsigned char ch) { return std::isspace(ch) != 0; });
    return t;
  };
  std::size_t chunks_total = 0, max_tokens_seen = 0;
  for (int d = 0; d < 500; ++d) {
    const auto doc = oracle::random_document(rng, 10000);
    const auto chunks = text::semantic_chunks("d" + std::to_string(d), doc, {}, embed);
    std::string joined;
    for (const auto& c : chunks) {
      const auto n = text::default_tokenizer().count(c.text);
      max_tokens_seen = std::max(max_tokens_seen, n);
      o.expect(n <= 128, "doc " + std::to_string(d) + " has a chunk of " + std::to_string(n) + " tokens");
      o.expect(doc.compare(c.begin, c.end - c.begin, c.text) == 0, "chunk offsets do not match the text");
      joined += c.text;
    }
    chunks_total += chunks.size();
    o.expect(squeeze(joined) == squeeze(doc), "doc " + std::to_string(d) + ": chunks lose text");
    std::string sentences;
    for (const auto& s : text::split_sentences(doc)) sentences += s + " ";
    o.expect(text::normalize_whitespace(sentences) == text::normalize_whitespace(doc),
             "doc " + std::to_string(d) + ": sentence split is lossy");
  }
  o.note = "500 documents, " + std::to_string(chunks_total) + " chunks, largest " + std::to_string(max_tokens_seen) +
           " tokens, " + fmt("%.1f", seconds_since(t0)) + " s";
  return o;
}

// 4
Outcome statistics() {
  Outcome o;
  using metrics::RatingsMatrix;
  constexpr int S = 0, N = 1, A = 2;
  struct Fixture {
    std::size_t q;
    std::vector<std::vector<int>> rows;
    double pa, ac1;
  };
  // Values worked out by hand.
  const std::vector<Fixture> fixtures{
      {3, {{S, S, N}, {S, S, S}}, 2.0 / 3.0, 19.0 / 31.0},
      {3, {{S, S}, {S, N}, {N, N}, {A, S}}, 0.5, 13.0 / 45.0},
      {2, {{0, 1}, {1, 0}, {0, 1}}, 0.0, -1.0},
      {3, {{S, S}, {N, N}, {A, A, A}}, 1.0, 1.0},
      {3, {{S, N, A}}, 0.0, -0.5},
      {2, {{0, 0, 0}, {0, 0, 1}, {1, 1, 1}, {0, 1, 1}}, 2.0 / 3.0, 1.0 / 3.0},
  };
  auto build = [](std::size_t q, const std::vector<std::vector<int>>& rows) {
    RatingsMatrix m;
    m.q = q;
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t r = 0; r < rows[i].size(); ++r)
        m.add("i" + std::to_string(i), "r" + std::to_string(r), rows[i][r]);
    return m;
  };
  for (std::size_t k = 0; k < fixtures.size(); ++k) {
    const auto m = build(fixtures[k].q, fixtures[k].rows);
    o.expect(std::abs(metrics::percent_agreement(m) - fixtures[k].pa) <= 1e-12,
             "fixture " + std::to_string(k) + " percent agreement");
    o.expect(std::abs(metrics::gwets_ac1(m) - fixtures[k].ac1) <= 1e-12, "fixture " + std::to_string(k) + " AC1");
    o.expect(std::abs(oracle::oracle_ac1(fixtures[k].q, fixtures[k].rows) - fixtures[k].ac1) <= 1e-12,
             "reference AC1 disagrees on fixture " + std::to_string(k));
  }
  o.expect(metrics::gwets_ac1(build(3, {{S, S}, {S, S, S}})) == 1.0, "AC1 on unanimous single category");

  std::mt19937_64 rng(4004);
  std::uniform_int_distribution<int> lab(0, 2), items(1, 30), raters(2, 4);
  for (int t = 0; t < 1000; ++t) {
    std::vector<metrics::Annotation> ann;
    const int n = items(rng);
    for (int i = 0; i < n; ++i) {
      const int r = raters(rng);
      for (int k = 0; k < r; ++k)
        ann.push_back({"p" + std::to_string(i), "r" + std::to_string(k), kAllVerdicts[lab(rng)]});
    }
    const double ter = metrics::percent_agreement(metrics::to_matrix(ann, metrics::LabelSpace::Ternary));
    const double bin = metrics::percent_agreement(metrics::to_matrix(ann, metrics::LabelSpace::Binary));
    o.expect(bin >= ter, "binarization lowered agreement in matrix " + std::to_string(t));
  }

  int contained = 0;
  std::bernoulli_distribution agree(0.7);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::vector<int>> rows(static_cast<std::size_t>(10 + t % 40));
    for (auto& row : rows) {
      const int base = lab(rng);
      const int r = raters(rng);
      for (int k = 0; k < r; ++k) row.push_back(agree(rng) ? base : lab(rng));
    }
    const auto m = build(3, rows);
    const auto a = metrics::bootstrap_ci(metrics::percent_agreement, m, 1000, 0.95, static_cast<std::uint64_t>(t));
    const auto b = metrics::bootstrap_ci(metrics::percent_agreement, m, 1000, 0.95, static_cast<std::uint64_t>(t), 3);
    o.expect(a.lo == b.lo && a.hi == b.hi, "bootstrap not deterministic for fixture " + std::to_string(t));
    const double pa = metrics::percent_agreement(m);
    if (a.lo <= pa && pa <= a.hi) ++contained;
  }
  o.expect(contained >= 190, "interval contained the estimate in only " + std::to_string(contained) + "/200");
  o.note = "6 hand fixtures, 1000 binarization checks, CI coverage " + std::to_string(contained) + "/200";
  return o;
}

// 5
Outcome gateway_ladder() {
  Outcome o;
  gateway::ChatRequest req;
  req.system_prompt = "s";
  req.user_prompt = "u";
  req.response_schema = gateway::object_schema({{"claims", gateway::string_array_schema()}});

  std::vector<double> temps;
  auto overflow = std::make_shared<gateway::FunctionChatBackend>([&temps](const gateway::ChatCall& c) {
    temps.push_back(c.temperature);
    return gateway::ChatReply{"", true};
  });
  gateway::Gateway gw(overflow, nullptr, nullptr);
  bool threw = false;
  try {
    gw.chat_structured(req);
  } catch (const StructuredOutputError&) {
    threw = true;
  }
  o.expect(threw, "overflowing backend did not raise");
  o.expect(temps == std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0},
           "temperature sequence differs from 0.1..1.0");

  for (int heals = 0; heals <= 4; ++heals) {
    auto garbage = std::make_shared<gateway::FunctionChatBackend>(
        [](const gateway::ChatCall&) { return gateway::ChatReply{"{\"claims\": 3}", false}; });
    gateway::Gateway g(garbage, nullptr, nullptr);
    auto r = req;
    r.max_retries_heal = heals;
    try {
      g.chat_structured(r);
    } catch (const StructuredOutputError&) {
    }
    o.expect(g.counters().heal_calls == static_cast<std::size_t>(heals), "heal calls exceed the budget");
  }

  static const std::vector<std::string> shapes{
      R"({"claims": "x"})", R"({"claims": [1]})", R"({"claims": ["a"], "x": 1})", R"({"claim": []})", "[]",
      R"({"claims": [null]})", "null", "", "text only", R"({"claims": {}})", R"({"claims": ["a"]})",
      "```json\n{\"claims\": [\"b\"]}\n```"};
  std::mt19937_64 rng(5005);
  std::uniform_int_distribution<std::size_t> pick(0, shapes.size() - 1), cut(0, 20);
  std::bernoulli_distribution truncate(0.3);
  std::size_t accepted = 0;
  for (int t = 0; t < 1000; ++t) {
    auto fuzz = std::make_shared<gateway::FunctionChatBackend>([&](const gateway::ChatCall&) {
      std::string s = shapes[pick(rng)];
      if (truncate(rng) && !s.empty()) s = s.substr(0, cut(rng) % s.size());
      return gateway::ChatReply{s, false};
    });
    gateway::Gateway g(fuzz, nullptr, nullptr);
    try {
      const json v = g.chat_structured(req);
      bool ok = v.is_object() && v.size() == 1 && v.contains("claims") && v["claims"].is_array();
      if (ok)
        for (const auto& c : v["claims"]) ok = ok && c.is_string();
      o.expect(ok, "schema-invalid value escaped: " + v.dump());
      ++accepted;
    } catch (const StructuredOutputError&) {
    }
  }
  o.note = "ladder 0.1..1.0, 1000 fuzzed replies, " + std::to_string(accepted) + " accepted";
  return o;
}

// 6
Outcome context_replay() {
  Outcome o;
  const auto facts = ambien_facts();
  const auto hits = ambien_hits();
  const auto window = ambien_window();
  const std::vector<std::tuple<ContextFormat, std::string, Verdict>> cases{
      {ContextFormat::RelevanceScore, kAmbienRelevanceContext, Verdict::NotSupported},
      {ContextFormat::AbsoluteTime, kAmbienAbsoluteContext, Verdict::Supported},
      {ContextFormat::RelativeTime, kAmbienRelativeContext, Verdict::Supported}};
  auto store = gateway::ReplayStore::load(fixture("reference_contexts.jsonl"));
  gateway::Gateway gw(std::make_shared<gateway::ReplayChatBackend>(store), nullptr, nullptr);
  const Proposition prop{"ambien:a0", "ambien", AuthorType::LLMWritten, PropType::AtomicClaim, kAmbienProposition, {}};
  for (const auto& [fmt_kind, expected, label] : cases) {
    const auto ctx = judge::format_context(hits, facts, fmt_kind, window);
    o.expect(ctx.rendered == expected, to_string(fmt_kind) + " context is not byte-identical");
    const auto v = judge::judge_proposition(prop, ctx, gw);
    o.expect(v.label == label, to_string(fmt_kind) + " verdict " + to_string(v.label));
  }
  o.note = "3 contexts byte-exact; verdicts Not Supported / Supported / Supported";
  return o;
}

// 7
Outcome determinism() {
  Outcome o;
  auto gw = heuristic_gateway(64);
  app::AppConfig cfg;
  const auto idx = app::build_index(pneumonia_notes(), PropType::Sentence, cfg, *gw, PromptLibrary::builtin());
  judge::VerifyConfig vc;
  vc.retrieval.top_n = 10;
  vc.context_format = ContextFormat::AbsoluteTime;
  std::vector<std::string> dumps;
  for (int run = 0; run < 2; ++run) {
    const auto r = judge::verify_text("cand", kPneumoniaCandidate, *idx.snapshot(), pneumonia_window(), vc, *gw);
    json all = app::score_sheet_to_json(r.sheet);
    for (const auto& v : r.verdicts) all["verdicts"].push_back(app::verdict_to_json(v));
    dumps.push_back(all.dump());
    if (run == 0) {
      o.expect(r.sheet.pct_supported() == 60.0 && r.sheet.pct_not_supported() == 20.0 &&
                   r.sheet.pct_not_addressed() == 20.0,
               "score sheet is " + fmt("%.1f", r.sheet.pct_supported()) + "/" +
                   fmt("%.1f", r.sheet.pct_not_supported()) + "/" + fmt("%.1f", r.sheet.pct_not_addressed()));
    }
  }
  o.expect(dumps[0] == dumps[1], "verify_text output differs between runs");

  const auto study = synthetic_study();
  const app::SweepInputs inputs{study.corpus, study.candidates, metrics::majority_vote(study.annotations).truth};
  auto store = gateway::ReplayStore::load(fixture("sweep_replay.jsonl"));
  const fs::path base = fs::temp_directory_path() / "ehrcheck_acceptance_sweep";
  fs::remove_all(base);
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::map<std::string, std::string>> trees;
  std::size_t cells = 0;
  for (int run = 0; run < 2; ++run) {
    gateway::Gateway replay(std::make_shared<gateway::ReplayChatBackend>(store),
                            std::make_shared<gateway::ReplayEmbeddingBackend>(store),
                            std::make_shared<gateway::ReplayRerankBackend>(store));
    const fs::path dir = base / ("run" + std::to_string(run));
    try {
      const auto summary = app::run_sweep(inputs, app::AppConfig{}, replay, PromptLibrary::builtin(), dir);
      cells = summary.cells_run;
      app::emit_report(dir);
      trees.push_back(read_tree(dir));
    } catch (const std::exception& e) {
      o.expect(false, std::string("sweep failed: ") + e.what());
      fs::remove_all(base);
      return o;
    }
  }
  const double secs = seconds_since(t0);
  fs::remove_all(base);
  o.expect(cells == 144, "sweep ran " + std::to_string(cells) + " cells");
  o.expect(trees[0] == trees[1], "sweep directories differ between runs");
  o.expect(secs < 300.0, "two sweeps took " + fmt("%.1f", secs) + " s");
  o.note = "60/20/20 twice; 144 cells x2 on replay in " + fmt("%.1f", secs) + " s, " +
           std::to_string(trees[0].size()) + " files identical";
  return o;
}

// 8
Outcome summarizer_bounds() {
  Outcome o;
  std::mt19937_64 rng(8008);
  std::uniform_int_distribution<int> n_notes(1, 30), n_sent(1, 40), word(0, 500);
  std::uniform_int_distribution<std::size_t> reply_len(1, 1800);
  std::size_t max_tokens = 0, compactions = 0;
  const auto& tok = text::default_tokenizer();
  for (int t = 0; t < 100; ++t) {
    std::vector<ClinicalNote> notes;
    const int nn = n_notes(rng);
    for (int i = 0; i < nn; ++i) {
      std::string body;
      const int ns = n_sent(rng);
      for (int s = 0; s < ns; ++s)
        body += "Finding" + std::to_string(word(rng)) + " was noted with value " + std::to_string(word(rng)) + ". ";
      notes.push_back(note("N" + std::to_string(i), "P", "A", "Physician", "Note",
                           "2100-01-01T00:00:00Z", body));
      notes.back().timestamp += std::chrono::minutes(i);
    }
    // Even trials use the heuristic writer; odd trials a writer that answers
    // with long, non-repeating text so compaction and truncation are exercised.
    std::unique_ptr<gateway::Gateway> gw;
    if (t % 2 == 0) {
      gw = heuristic_gateway(16);
    } else {
      const std::size_t seed = rng();
      gw = chat_gateway(std::make_shared<gateway::FunctionChatBackend>(
          [seed, &reply_len, counter = std::make_shared<std::size_t>(0)](const gateway::ChatCall&) {
            std::mt19937_64 local(seed + (*counter)++);
            const std::size_t n = reply_len(local);
            std::string s;
            for (std::size_t i = 0; i < n; ++i) s += "w" + std::to_string(local() % 100000) + (i % 12 == 11 ? ". " : " ");
            return gateway::ChatReply{s, false};
          }));
    }
    summarize::BhcTrace trace;
    const auto out = summarize::generate_bhc(notes, *gw, PromptLibrary::builtin(), {}, &trace);
    const auto n = tok.count(out);
    max_tokens = std::max(max_tokens, n);
    compactions += trace.compactions;
    o.expect(n <= 1000, "trial " + std::to_string(t) + " produced " + std::to_string(n) + " tokens");
  }

  auto store = gateway::ReplayStore::load(fixture("summarizer.jsonl"));
  const auto cfg = summarizer_test_config();
  gateway::Gateway bhc_gw(std::make_shared<gateway::ReplayChatBackend>(store), nullptr, nullptr);
  summarize::BhcTrace trace;
  summarize::generate_bhc(summarizer_notes(), bhc_gw, PromptLibrary::builtin(), cfg, &trace);
  gateway::Gateway note_gw(std::make_shared<gateway::ReplayChatBackend>(store), nullptr, nullptr);
  std::size_t per_note = 0;
  for (const auto& n : summarizer_notes()) {
    summarize::NoteSummaryTrace nt;
    summarize::summarize_note(n, note_gw, PromptLibrary::builtin(), cfg, &nt);
    per_note += nt.chunks + (nt.chunks > 1 ? 1 : 0) + (nt.reasked ? 1 : 0);
  }
  const std::size_t expected = per_note + 1 + (trace.bundles.size() - 1) + trace.compactions;
  o.expect(bhc_gw.counters().chat_calls == expected, "replay made " + std::to_string(bhc_gw.counters().chat_calls) +
                                                         " calls, formula gives " + std::to_string(expected));
  o.note = "100 note sets, longest output " + std::to_string(max_tokens) + " tokens, " + std::to_string(compactions) +
           " compactions; replay calls " + std::to_string(bhc_gw.counters().chat_calls) + " = formula";
  return o;
}

// 9: optional. Needs EHRCHECK_STUDY_NOTES, EHRCHECK_STUDY_CANDIDATES,
// EHRCHECK_STUDY_ANNOTATIONS and a reachable endpoint (EHRCHECK_CHAT_URL etc.).
std::string study_reproduction() {
  const char* notes = std::getenv("EHRCHECK_STUDY_NOTES");
  const char* cands = std::getenv("EHRCHECK_STUDY_CANDIDATES");
  const char* ann = std::getenv("EHRCHECK_STUDY_ANNOTATIONS");
  const char* chat = std::getenv("EHRCHECK_CHAT_URL");
  if (!notes || !cands || !ann || !chat) return "SKIP (study data or endpoint not configured)";
  try {
    app::AppConfig cfg;
    cfg.backend.mode = app::BackendMode::Http;
    app::apply_environment(cfg.backend);
    cfg.sweep.retrieval_methods = {RetrievalMethod::Rerank};
    cfg.sweep.top_n = {50};
    cfg.sweep.context_formats = {ContextFormat::AbsoluteTime};
    cfg.sweep.scopes = {Scope::AllAdmissions};
    cfg.sweep.prop_types = {PropType::AtomicClaim};
    auto gw = app::make_gateway(cfg.backend, PromptLibrary::builtin());
    app::SweepInputs inputs{app::load_notes(notes), app::load_candidates(cands),
                            metrics::majority_vote(app::load_annotations(ann)).truth};
    const fs::path dir = fs::temp_directory_path() / "ehrcheck_acceptance_study";
    fs::remove_all(dir);
    app::run_sweep(inputs, cfg, *gw, PromptLibrary::builtin(), dir);
    std::string out;
    for (const auto& e : fs::directory_iterator(dir / "cells")) {
      const auto agreement = json::parse(app::read_file(e.path() / "agreement.json"));
      const auto& llm = agreement.at(to_string(AuthorType::LLMWritten));
      if (llm.is_null()) return "INFO (no overlap between verdicts and labels)";
      const double pa = 100.0 * llm.at("ternary").at("cells").at(0).at("percent_agreement").get<double>();
      out = (std::abs(pa - 88.8) <= 5.0 ? "PASS" : "FAIL") + std::string(" (informational) ternary agreement ") +
            fmt("%.1f", pa) + "% vs 88.8% +/- 5";
    }
    return out.empty() ? "INFO (no cell produced)" : out;
  } catch (const std::exception& e) {
    return std::string("INFO (not run: ") + e.what() + ")";
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"retrieval oracle equivalence", retrieval_oracle},
      {"score fusion properties", dbsf_properties},
      {"chunk bound and losslessness", chunker_bound},
      {"agreement statistics", statistics},
      {"gateway retry ladder", gateway_ladder},
      {"reference context replay", context_replay},
      {"end-to-end determinism", determinism},
      {"summarizer bounds", summarizer_bounds},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.expect(false, std::string("exception: ") + e.what());
    }
    std::cout << "criterion " << i + 1 << " " << (o.passed() ? "PASS" : "FAIL") << "  " << criteria[i].first << ": ";
    if (o.passed()) {
      std::cout << o.note << " (" << o.checks << " checks)";
    } else {
      ++failed;
      for (std::size_t k = 0; k < o.failures.size(); ++k) std::cout << (k ? "; " : "") << o.failures[k];
    }
    std::cout << std::endl;
  }
  std::cout << "criterion 9 " << study_reproduction() << "  study reproduction" << std::endl;
  return failed == 0 ? 0 : 1;
}
