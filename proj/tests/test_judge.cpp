#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <limits>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "doctest.h"
#include "helpers.hpp"
#include "ideagap/judge.hpp"
#include "ideagap/judge_cache.hpp"
#include "ideagap/judge_http.hpp"

using namespace ideagap::judge;
using testutil::ScriptedBackend;
using testutil::TempDir;
using testutil::text_response;

namespace {

ChatRequest single_token_request() {
  ChatRequest r;
  r.model = "m";
  r.messages = {{Role::System, "s"}, {Role::User, "u"}};
  r.max_tokens = 1;
  r.temperature = 0.0;
  r.top_logprobs = 20;
  return r;
}

ChatResponse logprob_response(std::vector<TokenLogprob> alts, std::string chosen) {
  ChatResponse r;
  TokenAlternatives ta;
  ta.chosen_token = std::move(chosen);
  ta.alternatives = std::move(alts);
  r.alternatives = std::move(ta);
  return r;
}

}  // namespace

TEST_CASE("canonical request JSON is sorted, stable, and byte-frozen") {
  const auto req = single_token_request();
  CHECK(canonical_request_json(req) ==
        "{\"max_tokens\":1,\"messages\":[{\"content\":\"s\",\"role\":\"system\"},"
        "{\"content\":\"u\",\"role\":\"user\"}],\"model\":\"m\",\"temperature\":0.0,"
        "\"top_logprobs\":20}");
  CHECK(request_cache_key(req) ==
        "61f52dbbd08b5c6ab83d2dd92327c75045c4b8409b0e8cad69ae33664f3599f2");

  ChatRequest text;
  text.model = "m";
  text.messages = {{Role::User, "hi"}};
  text.max_tokens = 16;
  CHECK(canonical_request_json(text) ==
        "{\"max_tokens\":16,\"messages\":[{\"content\":\"hi\",\"role\":\"user\"}],"
        "\"model\":\"m\",\"temperature\":0.0}");
  CHECK(request_cache_key(text) ==
        "d685d935ffb73298ae1e5ecb42eda1fd30273e7199ba4842325d34b81cd773ff");
}

TEST_CASE("sha256_hex matches known digests") {
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("complete_single_token rejects non-classification parameters") {
  ScriptedBackend backend({});
  auto bad = single_token_request();
  bad.max_tokens = 2;
  CHECK_THROWS_AS(complete_single_token(backend, bad), std::invalid_argument);
  bad = single_token_request();
  bad.temperature = 0.5;
  CHECK_THROWS_AS(complete_single_token(backend, bad), std::invalid_argument);
  bad = single_token_request();
  bad.top_logprobs.reset();
  CHECK_THROWS_AS(complete_single_token(backend, bad), std::invalid_argument);
  CHECK(backend.seen.empty());  // validation happens before any call
}

TEST_CASE("complete_single_token validates the returned alternatives") {
  SUBCASE("missing logprob block") {
    ScriptedBackend backend({text_response("Strong")});
    CHECK_THROWS_AS(complete_single_token(backend, single_token_request()),
                    MalformedResponse);
  }
  SUBCASE("empty alternatives") {
    ScriptedBackend backend({logprob_response({}, "Strong")});
    CHECK_THROWS_AS(complete_single_token(backend, single_token_request()),
                    MalformedResponse);
  }
  SUBCASE("positive logprob") {
    ScriptedBackend backend({logprob_response({{"Strong", 0.5}}, "Strong")});
    CHECK_THROWS_AS(complete_single_token(backend, single_token_request()),
                    MalformedResponse);
  }
  SUBCASE("non-finite logprob") {
    ScriptedBackend backend(
        {logprob_response({{"Strong", std::numeric_limits<double>::quiet_NaN()}},
                          "Strong")});
    CHECK_THROWS_AS(complete_single_token(backend, single_token_request()),
                    MalformedResponse);
  }
  SUBCASE("chosen token absent") {
    ScriptedBackend backend({logprob_response({{"Fair", -1.0}}, "Strong")});
    CHECK_THROWS_AS(complete_single_token(backend, single_token_request()),
                    MalformedResponse);
  }
  SUBCASE("valid response passes through") {
    ScriptedBackend backend(
        {logprob_response({{"Strong", -0.2}, {"Fair", -2.0}}, "Strong")});
    const auto alts = complete_single_token(backend, single_token_request());
    CHECK(alts.chosen_token == "Strong");
    REQUIRE(alts.alternatives.size() == 2);
    CHECK(alts.alternatives[1].token == "Fair");
  }
}

TEST_CASE("complete_text returns content verbatim but rejects blank output") {
  ChatRequest req;
  req.model = "m";
  req.messages = {{Role::User, "hi"}};
  {
    ScriptedBackend backend({text_response("  hi there  ")});
    CHECK(complete_text(backend, req) == "  hi there  ");
  }
  {
    ScriptedBackend backend({text_response("   \n  ")});
    CHECK_THROWS_AS(complete_text(backend, req), EmptyResponse);
  }
}

TEST_CASE("extract_json_object finds the first parseable object") {
  CHECK(extract_json_object("{\"a\":1}") == std::string("{\"a\":1}"));
  CHECK(extract_json_object("Sure! Here you go:\n```json\n{\"a\": 1}\n```\nDone.") ==
        std::string("{\"a\": 1}"));
  // Braces inside string literals do not confuse the scanner.
  CHECK(extract_json_object("{\"s\": \"curly } brace { soup\", \"n\": 2}") ==
        std::string("{\"s\": \"curly } brace { soup\", \"n\": 2}"));
  // An invalid candidate is skipped in favor of a later valid one.
  const auto r = extract_json_object("{not json} and then {\"ok\": true}");
  CHECK(r == std::string("{\"ok\": true}"));
  CHECK_FALSE(extract_json_object("no objects here").has_value());
  CHECK_FALSE(extract_json_object("{never closes").has_value());
}

namespace {

class SlowCountingBackend : public JudgeBackend {
 public:
  ChatResponse complete(const ChatRequest&) override {
    const int now = in_flight.fetch_add(1) + 1;
    int prev = peak.load();
    while (now > prev && !peak.compare_exchange_weak(prev, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    in_flight.fetch_sub(1);
    calls.fetch_add(1);
    return text_response("ok");
  }
  std::string name() const override { return "slow"; }

  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};
  std::atomic<int> calls{0};
};

}  // namespace

TEST_CASE("BoundedBackend caps concurrent calls to the inner backend") {
  auto inner = std::make_shared<SlowCountingBackend>();
  BoundedBackend bounded(inner, 4);
  ChatRequest req;
  req.model = "m";
  req.messages = {{Role::User, "x"}};

  std::vector<std::thread> threads;
  for (int i = 0; i < 32; ++i)
    threads.emplace_back([&] { bounded.complete(req); });
  for (auto& t : threads) t.join();

  CHECK(inner->calls.load() == 32);
  CHECK(inner->peak.load() <= 4);
  CHECK(inner->peak.load() >= 1);
  CHECK(bounded.name() == "slow");  // transparent wrapper
}

TEST_CASE("BoundedBackend rejects nonsense construction") {
  CHECK_THROWS_AS(BoundedBackend(nullptr, 4), std::invalid_argument);
  CHECK_THROWS_AS(BoundedBackend(std::make_shared<SlowCountingBackend>(), 0),
                  std::invalid_argument);
}

namespace {

class CountingBackend : public JudgeBackend {
 public:
  ChatResponse complete(const ChatRequest& r) override {
    calls.fetch_add(1);
    auto resp = text_response("reply to " + r.messages.back().content);
    if (r.top_logprobs) {
      TokenAlternatives alts;
      alts.chosen_token = "Strong";
      alts.alternatives = {{"Strong", -0.5}, {"Fair", -1.5}};
      resp.alternatives = std::move(alts);
    }
    return resp;
  }
  std::string name() const override { return "counting"; }

  std::atomic<int> calls{0};
};

}  // namespace

TEST_CASE("CachingBackend is write-through and replayable") {
  TempDir dir;
  const auto cache_path = dir.path() / "judge_cache.jsonl";
  ChatRequest req;
  req.model = "m";
  req.messages = {{Role::User, "q1"}};

  auto inner = std::make_shared<CountingBackend>();
  {
    CachingBackend cache(inner, cache_path);
    CHECK(cache.name() == "cache+counting");
    const auto r1 = cache.complete(req);
    const auto r2 = cache.complete(req);
    CHECK(r1.content == "reply to q1");
    CHECK(r2.content == r1.content);
    CHECK(inner->calls.load() == 1);  // duplicate came from the cache
    CHECK(cache.hits() == 1);
    CHECK(cache.misses() == 1);
    CHECK(cache.size() == 1);
  }

  // One JSONL record on disk.
  const auto contents = testutil::read_file(cache_path);
  CHECK(std::count(contents.begin(), contents.end(), '\n') == 1);

  // Replay-only reload (no inner backend) serves the same bytes.
  {
    CachingBackend replay(nullptr, cache_path);
    CHECK(replay.name() == "cache");
    CHECK(replay.complete(req).content == "reply to q1");
    CHECK(replay.hits() == 1);

    ChatRequest other = req;
    other.messages = {{Role::User, "q2"}};
    CHECK_THROWS_AS(replay.complete(other), CacheMiss);
    CHECK(inner->calls.load() == 1);
  }
}

TEST_CASE("CachingBackend round-trips token alternatives") {
  TempDir dir;
  const auto cache_path = dir.path() / "cache.jsonl";
  auto req = single_token_request();
  auto inner = std::make_shared<CountingBackend>();
  {
    CachingBackend cache(inner, cache_path);
    cache.complete(req);
  }
  CachingBackend replay(nullptr, cache_path);
  const auto r = replay.complete(req);
  REQUIRE(r.alternatives.has_value());
  CHECK(r.alternatives->chosen_token == "Strong");
  REQUIRE(r.alternatives->alternatives.size() == 2);
  CHECK(r.alternatives->alternatives[0].token == "Strong");
  CHECK(r.alternatives->alternatives[0].logprob == doctest::Approx(-0.5));
}

TEST_CASE("CachingBackend tolerates corrupt lines and missing replay files") {
  TempDir dir;
  const auto cache_path = dir.path() / "cache.jsonl";
  ChatRequest req;
  req.model = "m";
  req.messages = {{Role::User, "q1"}};

  {
    auto inner = std::make_shared<CountingBackend>();
    CachingBackend cache(inner, cache_path);
    cache.complete(req);
  }
  // Simulate a torn write from an interrupted run.
  {
    std::ofstream out(cache_path, std::ios::app);
    out << "{\"key\": \"torn..." << '\n';
  }
  CachingBackend replay(nullptr, cache_path);
  CHECK(replay.complete(req).content == "reply to q1");

  CHECK_THROWS_AS(CachingBackend(nullptr, dir.path() / "missing.jsonl"), JudgeError);
}

namespace {

struct LocalServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  explicit LocalServer(httplib::Server::Handler handler) {
    server.Post("/v1/chat/completions", std::move(handler));
    port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~LocalServer() {
    server.stop();
    thread.join();
  }

  std::string url() const {
    return "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  }
};

JudgeConfig http_config(const std::string& url) {
  JudgeConfig cfg;
  cfg.endpoint_url = url;
  cfg.api_key_env = "IDEAGAP_TEST_KEY";
  cfg.timeout_seconds = 10;
  cfg.retry = {3, 250, 2.0};
  return cfg;
}

const std::string kChatBody = R"({
  "choices": [{
    "message": {"content": "Strong"},
    "logprobs": {"content": [{
      "token": "Strong",
      "logprob": -0.4,
      "top_logprobs": [
        {"token": "Strong", "logprob": -0.4},
        {"token": "Fair", "logprob": -1.9}
      ]
    }]}
  }]
})";

}  // namespace

TEST_CASE("HTTP backend retries retryable statuses with exponential backoff") {
  setenv("IDEAGAP_TEST_KEY", "test-key-123", 1);
  std::atomic<int> requests{0};
  std::string auth_header;
  std::string body_seen;
  LocalServer srv([&](const httplib::Request& req, httplib::Response& res) {
    const int n = requests.fetch_add(1) + 1;
    if (n == 1) auth_header = req.get_header_value("Authorization");
    if (n <= 2) {
      res.status = 429;
      res.set_content("slow down", "text/plain");
      return;
    }
    body_seen = req.body;
    res.set_content(kChatBody, "application/json");
  });

  HttpJudgeBackend backend(http_config(srv.url()));
  std::vector<int> sleeps;
  backend.set_sleeper([&](int ms) { sleeps.push_back(ms); });

  const auto alts = complete_single_token(backend, single_token_request());
  CHECK(alts.chosen_token == "Strong");
  REQUIRE(alts.alternatives.size() == 2);
  CHECK(alts.alternatives[1].logprob == doctest::Approx(-1.9));

  CHECK(backend.total_attempts() == 3);
  CHECK(sleeps == std::vector<int>{250, 500});
  CHECK(auth_header == "Bearer test-key-123");
  const auto wire = nlohmann::json::parse(body_seen);
  CHECK(wire.at("model") == "m");
  CHECK(wire.at("max_tokens") == 1);
  CHECK(wire.at("logprobs") == true);
  CHECK(wire.at("top_logprobs") == 20);
}

TEST_CASE("HTTP backend fails fast on non-retryable statuses") {
  setenv("IDEAGAP_TEST_KEY", "k", 1);
  LocalServer srv([](const httplib::Request&, httplib::Response& res) {
    res.status = 404;
    res.set_content("nope", "text/plain");
  });
  HttpJudgeBackend backend(http_config(srv.url()));
  backend.set_sleeper([](int) {});
  ChatRequest req;
  req.model = "m";
  req.messages = {{Role::User, "hi"}};
  CHECK_THROWS_AS(backend.complete(req), RequestFailed);
  CHECK(backend.total_attempts() == 1);
}

TEST_CASE("HTTP backend surfaces exhausted retries as RequestFailed") {
  setenv("IDEAGAP_TEST_KEY", "k", 1);
  std::atomic<int> requests{0};
  LocalServer srv([&](const httplib::Request&, httplib::Response& res) {
    requests.fetch_add(1);
    res.status = 503;
    res.set_content("down", "text/plain");
  });
  HttpJudgeBackend backend(http_config(srv.url()));
  std::vector<int> sleeps;
  backend.set_sleeper([&](int ms) { sleeps.push_back(ms); });
  ChatRequest req;
  req.model = "m";
  req.messages = {{Role::User, "hi"}};
  CHECK_THROWS_AS(backend.complete(req), RequestFailed);
  CHECK(requests.load() == 3);
  CHECK(sleeps == std::vector<int>{250, 500});
}

TEST_CASE("HTTP backend rejects malformed 200 responses without retrying") {
  setenv("IDEAGAP_TEST_KEY", "k", 1);
  std::atomic<int> requests{0};
  LocalServer srv([&](const httplib::Request&, httplib::Response& res) {
    requests.fetch_add(1);
    res.set_content("definitely not json", "application/json");
  });
  HttpJudgeBackend backend(http_config(srv.url()));
  ChatRequest req;
  req.model = "m";
  req.messages = {{Role::User, "hi"}};
  CHECK_THROWS_AS(backend.complete(req), MalformedResponse);
  CHECK(requests.load() == 1);
}

TEST_CASE("HTTP backend construction validates endpoint and credentials") {
  unsetenv("IDEAGAP_UNSET_KEY");
  auto cfg = http_config("http://127.0.0.1:1/v1/chat/completions");
  cfg.api_key_env = "IDEAGAP_UNSET_KEY";
  CHECK_THROWS_AS(HttpJudgeBackend{cfg}, JudgeError);

  setenv("IDEAGAP_TEST_KEY", "k", 1);
  auto bad = http_config("not-a-url");
  CHECK_THROWS_AS(HttpJudgeBackend{bad}, JudgeError);
}
