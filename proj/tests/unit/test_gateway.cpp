#include <doctest.h>

#include <atomic>
#include <chrono>
#include <random>
#include <thread>

#include "ehrcheck/errors.hpp"
#include "ehrcheck/gateway/gateway.hpp"
#include "ehrcheck/gateway/json_schema.hpp"
#include "ehrcheck/gateway/mock.hpp"
#include "ehrcheck/gateway/replay.hpp"
#include "support.hpp"

using namespace ehrcheck;
using namespace ehrcheck::gateway;

namespace {

ChatRequest claims_request() {
  ChatRequest req;
  req.system_prompt = "sys";
  req.user_prompt = "user";
  req.response_schema = object_schema({{"claims", string_array_schema()}});
  return req;
}

std::vector<double> rounded(const std::vector<double>& v) {
  std::vector<double> out;
  for (double x : v) out.push_back(std::round(x * 100.0) / 100.0);
  return out;
}

// Independent check of {"claims": [string...]} with nothing else.
bool is_claims_object(const json& v) {
  if (!v.is_object() || v.size() != 1 || !v.contains("claims") || !v["claims"].is_array()) return false;
  for (const auto& c : v["claims"])
    if (!c.is_string()) return false;
  return true;
}

std::string malformed_reply(std::mt19937_64& rng) {
  static const std::vector<std::string> shapes{
      R"({"claims": "x"})",
      R"({"claims": [1, 2]})",
      R"({"claims": ["a"], "extra": true})",
      R"({"claim": ["a"]})",
      R"(["a", "b"])",
      R"({"claims": ["a", null]})",
      R"({"claims": [["a"]]})",
      R"({"claims": )",
      "null",
      "true",
      "",
      "Sure! Here are the claims: a, b.",
      "```json\n{\"claims\": 5}\n```",
      R"({"claims": {"0": "a"}})",
      R"({"CLAIMS": []})",
  };
  static const std::vector<std::string> good{R"({"claims": ["a"]})", "```json\n{\"claims\": []}\n```",
                                             R"(Here you go: {"claims": ["x", "y"]} done)"};
  std::uniform_int_distribution<std::size_t> pick(0, shapes.size() - 1), pick_good(0, good.size() - 1);
  std::uniform_int_distribution<int> coin(0, 9), cut(0, 30);
  if (coin(rng) == 0) return good[pick_good(rng)];
  std::string s = shapes[pick(rng)];
  if (coin(rng) < 3 && !s.empty()) s = s.substr(0, static_cast<std::size_t>(cut(rng)) % s.size());
  if (coin(rng) == 0) s += "}}";
  return s;
}

}  // namespace

TEST_SUITE("gateway") {
  TEST_CASE("valid reply on the first try") {
    auto chat = std::make_shared<ScriptedChatBackend>(std::vector<ChatReply>{{R"({"claims": ["a"]})", false}});
    Gateway gw(chat, nullptr, nullptr);
    CHECK(gw.chat_structured(claims_request()) == json{{"claims", {"a"}}});
    CHECK(rounded(chat->temperatures()) == std::vector<double>{0.1});
    CHECK(gw.counters().chat_calls == 1);
  }

  TEST_CASE("overflow escalates temperature by one step per retry") {
    auto chat = std::make_shared<ScriptedChatBackend>(std::vector<ChatReply>{
        {"", true}, {"", true}, {"", true}, {R"({"claims": []})", false}});
    Gateway gw(chat, nullptr, nullptr);
    CHECK(gw.chat_structured(claims_request()) == json{{"claims", json::array()}});
    CHECK(rounded(chat->temperatures()) == std::vector<double>{0.1, 0.2, 0.3, 0.4});
    CHECK(gw.counters().escalations == 3);
    // Escalation restarts the original prompt.
    for (const auto& call : chat->calls()) CHECK(call.messages.size() == 2);
  }

  TEST_CASE("escalation stops at the ceiling") {
    auto chat = std::make_shared<FunctionChatBackend>([](const ChatCall&) { return ChatReply{"", true}; });
    std::vector<double> temps;
    auto spy = std::make_shared<FunctionChatBackend>([&](const ChatCall& c) {
      temps.push_back(c.temperature);
      return chat->chat(c);
    });
    Gateway gw(spy, nullptr, nullptr);
    try {
      gw.chat_structured(claims_request());
      FAIL("expected StructuredOutputError");
    } catch (const StructuredOutputError& e) {
      CHECK(e.transcript().size() == 10);
      CHECK(e.transcript().back().failure == "length overflow");
    }
    CHECK(rounded(temps) == std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
    // Exact decimal steps, not accumulated floating error.
    CHECK(temps[2] == 0.3);
    CHECK(temps[9] == 1.0);
  }

  TEST_CASE("repetitive output counts as degenerate") {
    std::string looping;
    for (int i = 0; i < 60; ++i) looping += "the the ";
    CHECK(repetition_ratio(looping, 200) > 0.5);
    CHECK(repetition_ratio("short", 200) == 0.0);
    const std::string prose =
        "The patient was admitted with fever and cough. Cultures were drawn and antibiotics started. Imaging showed "
        "a right lower lobe infiltrate. Oxygen requirement improved over three days and the patient was discharged.";
    CHECK(repetition_ratio(prose, 200) < 0.5);
    auto chat = std::make_shared<ScriptedChatBackend>(
        std::vector<ChatReply>{{looping, false}, {R"({"claims": ["a"]})", false}});
    Gateway gw(chat, nullptr, nullptr);
    gw.chat_structured(claims_request());
    CHECK(rounded(chat->temperatures()) == std::vector<double>{0.1, 0.2});
  }

  TEST_CASE("a type mismatch is healed with the model's own output") {
    auto chat = std::make_shared<ScriptedChatBackend>(
        std::vector<ChatReply>{{R"({"claims": "x"})", false}, {R"({"claims": ["x"]})", false}});
    Gateway gw(chat, nullptr, nullptr);
    CHECK(gw.chat_structured(claims_request()) == json{{"claims", {"x"}}});
    const auto calls = chat->calls();
    REQUIRE(calls.size() == 2);
    REQUIRE(calls[1].messages.size() == 4);
    CHECK(calls[1].messages[2].role == "assistant");
    CHECK(calls[1].messages[2].content == R"({"claims": "x"})");
    CHECK(calls[1].messages[3].content.find("correct the output to valid JSON") != std::string::npos);
    CHECK(gw.counters().heal_calls == 1);
  }

  TEST_CASE("healing is bounded") {
    for (int heals : {0, 1, 2, 3}) {
      auto chat = std::make_shared<FunctionChatBackend>([](const ChatCall&) { return ChatReply{"not json", false}; });
      Gateway gw(chat, nullptr, nullptr);
      auto req = claims_request();
      req.max_retries_heal = heals;
      CHECK_THROWS_AS(gw.chat_structured(req), StructuredOutputError);
      CHECK(gw.counters().heal_calls == static_cast<std::size_t>(heals));
      CHECK(chat->call_count() == static_cast<std::size_t>(heals + 1));
    }
  }

  TEST_CASE("no schema-invalid value escapes") {
    std::mt19937_64 rng(99);
    std::size_t returned = 0;
    for (int i = 0; i < 1000; ++i) {
      auto chat = std::make_shared<FunctionChatBackend>([&rng](const ChatCall&) {
        return ChatReply{malformed_reply(rng), false};
      });
      Gateway gw(chat, nullptr, nullptr);
      try {
        const json v = gw.chat_structured(claims_request());
        CHECK(is_claims_object(v));
        ++returned;
      } catch (const StructuredOutputError& e) {
        CHECK(e.transcript().size() == 3);
      }
      CHECK(gw.counters().heal_calls <= 2);
    }
    CHECK(returned > 0);
  }

  TEST_CASE("request validation") {
    auto chat = std::make_shared<ScriptedChatBackend>();
    Gateway gw(chat, nullptr, nullptr);
    auto req = claims_request();
    req.temperature = 1.5;
    CHECK_THROWS_AS(gw.chat_structured(req), InputError);
    req = claims_request();
    req.response_schema = json{{"type", "object"}};
    CHECK_THROWS_AS(gw.chat_structured(req), InputError);
    CHECK(chat->calls().empty());
  }

  TEST_CASE("plain text generation escalates on overflow only") {
    auto chat = std::make_shared<ScriptedChatBackend>(std::vector<ChatReply>{{"cut", true}, {"Summary.", false}});
    Gateway gw(chat, nullptr, nullptr);
    CHECK(gw.chat_text({"s", "u"}) == "Summary.");
    CHECK(rounded(chat->temperatures()) == std::vector<double>{0.1, 0.2});
  }

  TEST_CASE("json extraction") {
    CHECK(extract_json(R"({"a": 1})") == json{{"a", 1}});
    CHECK(extract_json("```json\n{\"a\": 2}\n```") == json{{"a", 2}});
    CHECK(extract_json(R"(Answer: {"a": {"b": 3}} thanks)") == json{{"a", {{"b", 3}}}});
    CHECK_FALSE(extract_json("no json here").has_value());
  }

  TEST_CASE("schema subset") {
    const json s = object_schema({{"verdict", string_schema(1)}, {"ok", boolean_schema()}});
    CHECK(is_closed_object_schema(s));
    CHECK_FALSE(validate_schema(s, {{"verdict", "Supported"}, {"ok", true}}).has_value());
    CHECK(validate_schema(s, {{"verdict", ""}, {"ok", true}}).has_value());
    CHECK(validate_schema(s, {{"verdict", "x"}}).has_value());
    CHECK(validate_schema(s, {{"verdict", "x"}, {"ok", 1}}).has_value());
    CHECK(validate_schema(s, {{"verdict", "x"}, {"ok", true}, {"more", 1}}).has_value());
    const json e{{"type", "string"}, {"enum", {"a", "b"}}};
    CHECK_FALSE(validate_schema(e, "a").has_value());
    CHECK(validate_schema(e, "c").has_value());
    const json n{{"type", "number"}, {"minimum", 0}, {"maximum", 1}};
    CHECK_FALSE(validate_schema(n, 0.5).has_value());
    CHECK(validate_schema(n, 2).has_value());
    const json arr{{"type", "array"}, {"items", {{"type", "integer"}}}, {"minItems", 1}, {"maxItems", 2}};
    CHECK_FALSE(validate_schema(arr, {1, 2}).has_value());
    CHECK(validate_schema(arr, json::array()).has_value());
    CHECK(validate_schema(arr, {1, 2, 3}).has_value());
    CHECK(validate_schema(arr, {1.5}).has_value());
  }

  TEST_CASE("embedding and rerank plumbing") {
    auto gw = testsupport::heuristic_gateway(16);
    const auto dense = gw->embed_dense({"fever and cough", "fever and cough", "broken arm"});
    REQUIRE(dense.size() == 3);
    CHECK(dense[0] == dense[1]);
    CHECK(dense[0].size() == 16);
    double norm = 0;
    for (double x : dense[0]) norm += x * x;
    CHECK(norm == doctest::Approx(1.0));
    CHECK_THROWS_AS(gw->embed_dense({}), InputError);
    const auto scores = gw->rerank("fever cough", {"fever cough", "", "fever"});
    CHECK(scores[0] == 1.0);
    CHECK(scores[1] == 0.0);
    CHECK(scores[2] > 0.0);
    Gateway bare(nullptr, nullptr, nullptr);
    CHECK_THROWS_AS(bare.rerank("q", {"c"}), BackendError);
    CHECK_THROWS_AS(bare.embed_dense({"x"}), BackendError);
  }

  TEST_CASE("in-flight requests respect the cap") {
    std::atomic<int> active{0}, peak{0};
    auto chat = std::make_shared<FunctionChatBackend>([&](const ChatCall&) {
      const int now = ++active;
      int seen = peak.load();
      while (now > seen && !peak.compare_exchange_weak(seen, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      --active;
      return ChatReply{R"({"claims": []})", false};
    });
    GatewayOptions opts;
    opts.max_in_flight = 2;
    Gateway gw(chat, nullptr, nullptr, opts);
    std::vector<std::thread> threads;
    for (int i = 0; i < 6; ++i) threads.emplace_back([&] { gw.chat_structured(claims_request()); });
    for (auto& t : threads) t.join();
    CHECK(peak.load() <= 2);
    CHECK(chat->call_count() == 6);
  }

  TEST_CASE("request hashes") {
    ChatCall a{{{"system", "s"}, {"user", "u"}}, 0.1};
    ChatCall b = a;
    b.temperature = 0.1 + 1e-12;
    CHECK(chat_request_hash(a) == chat_request_hash(b));
    b.temperature = 0.2;
    CHECK(chat_request_hash(a) != chat_request_hash(b));
    b = a;
    b.messages[1].content = "v";
    CHECK(chat_request_hash(a) != chat_request_hash(b));
    CHECK(chat_request_hash(a).size() == 64);
    CHECK(dense_request_hash("x") != sparse_request_hash("x"));
    CHECK(rerank_request_hash("q", "c") != rerank_request_hash("qc", ""));
  }

  TEST_CASE("record then replay gives identical answers") {
    auto rec = std::make_shared<Recorder>();
    Gateway live(std::make_shared<RecordingChatBackend>(std::make_shared<HeuristicChatBackend>(), rec),
                 std::make_shared<RecordingEmbeddingBackend>(std::make_shared<HeuristicEmbeddingBackend>(8), rec),
                 std::make_shared<RecordingRerankBackend>(std::make_shared<HeuristicRerankBackend>(), rec));
    ChatRequest req;
    req.system_prompt = "s";
    req.user_prompt = "u";
    req.response_schema = object_schema({{"x", boolean_schema()}});
    auto scripted = std::make_shared<ScriptedChatBackend>(std::vector<ChatReply>{{R"({"x": true})", false}});
    Gateway scripted_gw(std::make_shared<RecordingChatBackend>(scripted, rec), nullptr, nullptr);
    const json answer = scripted_gw.chat_structured(req);
    const auto dense = live.embed_dense({"alpha beta", "gamma"});
    const auto sparse = live.embed_sparse({"alpha beta"});
    const auto scores = live.rerank("alpha", {"alpha beta", "gamma"});

    const std::string fixture = rec->to_jsonl();
    CHECK(fixture == rec->to_jsonl());
    auto store = ReplayStore::from_lines(fixture);
    CHECK(store->size() == rec->size());
    Gateway replay(std::make_shared<ReplayChatBackend>(store), std::make_shared<ReplayEmbeddingBackend>(store),
                   std::make_shared<ReplayRerankBackend>(store));
    CHECK(replay.chat_structured(req) == answer);
    CHECK(replay.embed_dense({"gamma", "alpha beta"}) == std::vector<DenseVector>{dense[1], dense[0]});
    CHECK(replay.embed_sparse({"alpha beta"}) == sparse);
    CHECK(replay.rerank("alpha", {"gamma"}) == std::vector<double>{scores[1]});
    CHECK_THROWS_AS(replay.embed_dense({"never recorded"}), BackendContractError);
    req.user_prompt = "other";
    CHECK_THROWS_AS(replay.chat_structured(req), BackendContractError);
  }

  TEST_CASE("malformed fixtures are rejected") {
    CHECK_THROWS_AS(ReplayStore::from_lines("{not json}\n"), FormatError);
    CHECK_THROWS_AS(ReplayStore::from_lines(R"({"kind": "chat"})" "\n"), FormatError);
  }
}
